#include "filt/concepts.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace filt {

ConceptInitResult init_concepts(TableView entity_emb, const ConceptMap& concepts,
                                const std::vector<bool>& contributes, bool allow_empty) {
  const std::size_t d = entity_emb.dim;
  const std::size_t n_concepts = concepts.concepts.size();
  ConceptInitResult out;
  out.embeddings.assign(n_concepts * d, 0.0);
  std::vector<std::size_t> counts(n_concepts, 0);
  for (EntityId e = 0; e < concepts.concepts_of.size(); ++e) {
    if (e >= contributes.size() || !contributes[e]) continue;
    const auto h = entity_emb.row(e);
    for (ConceptId c : concepts.concepts_of[e]) {
      double* dst = out.embeddings.data() + c * d;
      for (std::size_t i = 0; i < d; ++i) dst[i] += h[i];
      ++counts[c];
    }
  }
  for (ConceptId c = 0; c < n_concepts; ++c) {
    if (counts[c] == 0) {
      if (!allow_empty) {
        throw ArgumentError("concept '" + concepts.concepts.token(c) +
                            "' has no contributing entity");
      }
      out.empty.push_back(c);
      continue;
    }
    double* dst = out.embeddings.data() + c * d;
    const double inv = 1.0 / static_cast<double>(counts[c]);
    for (std::size_t i = 0; i < d; ++i) dst[i] *= inv;
  }
  return out;
}

std::vector<double> concept_attention(std::span<const double> concept_vec,
                                      const std::vector<std::span<const double>>& entity_vecs) {
  std::vector<double> logits(entity_vecs.size());
  for (std::size_t k = 0; k < entity_vecs.size(); ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < concept_vec.size(); ++i) acc += entity_vecs[k][i] * concept_vec[i];
    logits[k] = acc;
  }
  if (logits.empty()) return logits;
  const double mx = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& z : logits) {
    z = std::exp(z - mx);
    total += z;
  }
  for (double& z : logits) z /= total;
  return logits;
}

std::vector<double> correct_concepts(TableView concept_emb, TableView entity_emb,
                                     const ConceptMap& concepts,
                                     const std::vector<bool>& contributes) {
  const std::size_t d = concept_emb.dim;
  std::vector<double> out(concept_emb.values.begin(), concept_emb.values.end());
  const auto members = concepts.members();
  for (ConceptId c = 0; c < members.size(); ++c) {
    std::vector<std::span<const double>> neighbors;
    for (EntityId e : members[c]) {
      if (e < contributes.size() && contributes[e]) neighbors.push_back(entity_emb.row(e));
    }
    if (neighbors.empty()) continue;
    const auto alpha = concept_attention(concept_emb.row(c), neighbors);
    double* dst = out.data() + c * d;
    std::fill(dst, dst + d, 0.0);
    for (std::size_t k = 0; k < neighbors.size(); ++k) {
      for (std::size_t i = 0; i < d; ++i) dst[i] += alpha[k] * neighbors[k][i];
    }
  }
  return out;
}

Var entity_concept_vector(Tape& t, Var entity_vec, std::span<const Var> concept_vecs) {
  if (concept_vecs.empty()) throw ArgumentError("entity_concept_vector: entity has no concepts");
  if (concept_vecs.size() == 1) return concept_vecs[0];
  std::vector<Var> logits;
  logits.reserve(concept_vecs.size());
  for (Var c : concept_vecs) logits.push_back(dot(t, c, entity_vec));
  Var beta = softmax(t, stack(t, logits));
  return weighted_sum(t, beta, concept_vecs);
}

std::string_view to_string(Activation act) {
  switch (act) {
    case Activation::leaky_relu: return "leaky_relu";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  if (name == "leaky_relu" || name == "leakyrelu" || name == "LeakyReLU") return Activation::leaky_relu;
  if (name == "relu" || name == "ReLU") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw ArgumentError("unknown activation '" + std::string(name) + "'");
}

Var activate(Tape& t, Var x, Activation act) {
  switch (act) {
    case Activation::leaky_relu: return leaky_relu(t, x);
    case Activation::relu: return relu(t, x);
    case Activation::tanh: return filt::tanh(t, x);
  }
  return x;
}

namespace {

Var inject(Tape& t, Var base, Var concept_vec, Var w, Var delta, double p, bool train, Rng& rng,
           Activation act) {
  Var branch = activate(t, linear(t, w, concept_vec), act);
  branch = dropout(t, branch, p, train, rng);
  return add(t, base, scale(t, delta, branch));
}

}  // namespace

Var inject_upper(Tape& t, Var entity_vec, Var concept_vec, Var w_c1, Var delta1,
                 double dropout_p, bool train, Rng& rng, Activation act) {
  return inject(t, entity_vec, concept_vec, w_c1, delta1, dropout_p, train, rng, act);
}

Var inject_lower(Tape& t, Var aggregated, Var concept_vec, Var w_c2, Var delta2,
                 double dropout_p, bool train, Rng& rng, Activation act) {
  return inject(t, aggregated, concept_vec, w_c2, delta2, dropout_p, train, rng, act);
}

}  // namespace filt
