#include "filt/params.hpp"

#include <cmath>

#include "filt/random.hpp"
#include "filt/types.hpp"

namespace filt {

std::string_view to_string(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::filt: return "filt";
    case EncoderKind::rgcn: return "rgcn";
    case EncoderKind::time2vec: return "time2vec";
    case EncoderKind::functional: return "functional";
    case EncoderKind::attention: return "attention";
  }
  return "?";
}

std::string_view to_string(ConceptVariant variant) {
  switch (variant) {
    case ConceptVariant::full: return "full";
    case ConceptVariant::none: return "A1";
    case ConceptVariant::no_lower: return "A2";
    case ConceptVariant::no_upper: return "A3";
  }
  return "?";
}

EncoderKind parse_encoder(std::string_view name) {
  for (auto k : {EncoderKind::filt, EncoderKind::rgcn, EncoderKind::time2vec,
                 EncoderKind::functional, EncoderKind::attention}) {
    if (to_string(k) == name) return k;
  }
  if (name == "B1") return EncoderKind::rgcn;
  if (name == "B2") return EncoderKind::time2vec;
  if (name == "B3") return EncoderKind::functional;
  if (name == "B4") return EncoderKind::attention;
  throw ArgumentError("unknown encoder '" + std::string(name) +
                      "' (expected filt, rgcn, time2vec, functional, attention)");
}

ConceptVariant parse_concept_variant(std::string_view name) {
  if (name == "full") return ConceptVariant::full;
  if (name == "A1" || name == "none") return ConceptVariant::none;
  if (name == "A2" || name == "no_lower") return ConceptVariant::no_lower;
  if (name == "A3" || name == "no_upper") return ConceptVariant::no_upper;
  throw ArgumentError("unknown concept variant '" + std::string(name) +
                      "' (expected full, A1, A2, A3)");
}

std::size_t ModelDims::time_features() const {
  // Time2Vec keeps the linear component j = 0 in addition to d_t periodic ones.
  return encoder == EncoderKind::time2vec ? time_dim + 1 : time_dim;
}

std::vector<ParamTensor*> ModelParams::tensors() {
  std::vector<ParamTensor*> out;
  for (ParamTensor* p : {&entity, &relation, &concept_emb, &w_c1, &w_c2, &delta1, &delta2, &w_g,
                         &w_rel, &time_freq, &time_phase, &w_f, &b_f, &w_q, &w_k}) {
    if (p->allocated()) out.push_back(p);
  }
  return out;
}

std::vector<const ParamTensor*> ModelParams::tensors() const {
  std::vector<const ParamTensor*> out;
  for (ParamTensor* p : const_cast<ModelParams*>(this)->tensors()) out.push_back(p);
  return out;
}

ParamTensor* ModelParams::find(std::string_view name) {
  for (ParamTensor* p : tensors()) {
    if (p->name == name) return p;
  }
  return nullptr;
}

ModelParams allocate_params(const ModelDims& dims) {
  if (dims.dim == 0 || dims.dim % 2 != 0) {
    throw ArgumentError("embedding dimension must be even and positive, got " +
                        std::to_string(dims.dim));
  }
  if (dims.time_dim == 0) throw ArgumentError("time dimension must be at least 1");
  const std::size_t d = dims.dim;
  const std::size_t tf = dims.time_features();
  ModelParams p;
  p.dims = dims;
  p.entity = ParamTensor("entity", {dims.num_entities, d});
  p.relation = ParamTensor("relation", {2 * dims.num_relations, d});
  p.concept_emb = ParamTensor("concept", {dims.num_concepts, d});
  p.w_c1 = ParamTensor("w_c1", {d, d});
  p.w_c2 = ParamTensor("w_c2", {d, d});
  p.delta1 = ParamTensor("delta1", {1});
  p.delta2 = ParamTensor("delta2", {1});
  switch (dims.encoder) {
    case EncoderKind::filt:
      p.w_g = ParamTensor("w_g", {d, 2 * d});
      break;
    case EncoderKind::rgcn:
      p.w_rel = ParamTensor("w_rel", {2 * dims.num_relations, d, d});
      break;
    case EncoderKind::time2vec:
    case EncoderKind::functional:
      p.w_g = ParamTensor("w_g", {d, 2 * d});
      p.time_freq = ParamTensor("time_freq", {tf});
      p.time_phase = ParamTensor("time_phase", {tf});
      p.w_f = ParamTensor("w_f", {d, d + tf});
      p.b_f = ParamTensor("b_f", {d});
      break;
    case EncoderKind::attention:
      p.w_g = ParamTensor("w_g", {d, 2 * d});
      p.time_freq = ParamTensor("time_freq", {tf});
      p.time_phase = ParamTensor("time_phase", {tf});
      p.w_q = ParamTensor("w_q", {d, d + tf});
      p.w_k = ParamTensor("w_k", {d, d + tf});
      break;
  }
  return p;
}

namespace {

void fill_uniform(ParamTensor& p, double a, Rng& rng) {
  for (double& v : p.values) v = rng.uniform(-a, a);
}

void fill_xavier(ParamTensor& p, std::size_t fan_out, std::size_t fan_in, Rng& rng) {
  fill_uniform(p, std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)), rng);
}

}  // namespace

ModelParams init_params(const ModelDims& dims, std::uint64_t seed) {
  ModelParams p = allocate_params(dims);
  Rng rng(seed);
  const std::size_t d = dims.dim;
  const double emb = 0.5 / static_cast<double>(d);
  fill_uniform(p.entity, emb, rng);
  fill_uniform(p.relation, emb, rng);
  fill_uniform(p.concept_emb, emb, rng);
  fill_xavier(p.w_c1, d, d, rng);
  fill_xavier(p.w_c2, d, d, rng);
  p.delta1.values[0] = 1.0;
  p.delta2.values[0] = 1.0;

  if (p.w_g.allocated()) fill_xavier(p.w_g, d, 2 * d, rng);
  if (p.w_rel.allocated()) fill_xavier(p.w_rel, d, d, rng);
  if (p.time_freq.allocated()) {
    // Frequencies spread over a few octaves so sin/cos features vary on raw time indices.
    const std::size_t n = p.time_freq.size();
    for (std::size_t j = 0; j < n; ++j) {
      p.time_freq.values[j] = 1.0 / std::pow(10.0, 2.0 * static_cast<double>(j) / static_cast<double>(n));
    }
  }
  if (p.w_f.allocated()) fill_xavier(p.w_f, d, p.w_f.row_size(), rng);
  if (p.w_q.allocated()) fill_xavier(p.w_q, d, p.w_q.row_size(), rng);
  if (p.w_k.allocated()) fill_xavier(p.w_k, d, p.w_k.row_size(), rng);
  return p;
}

}  // namespace filt
