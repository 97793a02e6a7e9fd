#include "filt/model.hpp"

#include <string>

namespace filt {

FiltGraph::FiltGraph(Tape& tape, ModelParams& params, const ConceptMap& concepts,
                     ForwardConfig config, std::uint64_t dropout_seed,
                     const std::vector<double>* entity_inputs)
    : tape_(tape),
      params_(params),
      concepts_(concepts),
      config_(config),
      entity_inputs_(entity_inputs),
      upper_rng_(mix_seed(dropout_seed, 1)),
      lower_rng_(mix_seed(dropout_seed, 2)),
      output_rng_(mix_seed(dropout_seed, 3)),
      entity_memo_(params.dims.num_entities),
      concept_memo_(params.dims.num_entities),
      owner_slot_(params.dims.num_entities, 0) {
  if (concepts.concepts_of.size() != params.dims.num_entities) {
    throw ArgumentError("concept map covers " + std::to_string(concepts.concepts_of.size()) +
                        " entities, model has " + std::to_string(params.dims.num_entities));
  }
  if (entity_inputs != nullptr &&
      entity_inputs->size() != params.dims.num_entities * params.dims.dim) {
    throw ShapeError("precomputed entity table has the wrong size");
  }
}

bool FiltGraph::upper_active() const {
  return config_.concepts == ConceptVariant::full || config_.concepts == ConceptVariant::no_lower;
}

bool FiltGraph::lower_active() const {
  return config_.concepts == ConceptVariant::full || config_.concepts == ConceptVariant::no_upper;
}

Var FiltGraph::param(ParamTensor& p) {
  if (!p.allocated()) throw ArgumentError("tensor '" + p.name + "' is not allocated for this encoder");
  return tape_.param(p);
}

Var FiltGraph::relation(RelationId r) { return tape_.param_row(params_.relation, r); }

Var FiltGraph::concept_vector(EntityId e) {
  Var& memo = concept_memo_.at(e);
  if (memo.valid()) return memo;
  std::vector<Var> vecs;
  for (ConceptId c : concepts_.concepts_of[e]) vecs.push_back(tape_.param_row(params_.concept_emb, c));
  memo = entity_concept_vector(tape_, tape_.param_row(params_.entity, e), vecs);
  return memo;
}

Var FiltGraph::entity_input(EntityId e) {
  Var& memo = entity_memo_.at(e);
  if (memo.valid()) return memo;
  if (entity_inputs_ != nullptr) {
    const std::size_t d = params_.dims.dim;
    memo = tape_.constant(
        std::vector<double>(entity_inputs_->begin() + static_cast<std::ptrdiff_t>(e * d),
                            entity_inputs_->begin() + static_cast<std::ptrdiff_t>((e + 1) * d)));
    return memo;
  }
  Var h = tape_.param_row(params_.entity, e);
  if (upper_active()) {
    h = inject_upper(tape_, h, concept_vector(e), param(params_.w_c1), param(params_.delta1),
                     config_.dropout, config_.train, upper_rng_, config_.activation);
  }
  memo = h;
  return memo;
}

const OwnerContext& FiltGraph::owner(EntityId e, std::span<const Quadruple> support) {
  std::size_t& slot = owner_slot_.at(e);
  if (slot != 0) return *owners_[slot - 1];
  const auto nbhd = make_neighborhood(e, support, params_.dims.num_relations);
  if (nbhd.neighbors.empty()) throw ArgumentError("owner has no support quadruples");
  auto ctx = std::make_unique<OwnerContext>();
  ctx->owner = e;
  for (const auto& n : nbhd.neighbors) {
    ctx->entities.push_back(entity_input(n.entity));
    ctx->relations.push_back(relation(n.relation));
    ctx->times.push_back(n.time);
  }
  switch (params_.dims.encoder) {
    case EncoderKind::filt:
    case EncoderKind::attention: {
      Var w_g = param(params_.w_g);
      for (std::size_t i = 0; i < ctx->entities.size(); ++i) {
        ctx->messages.push_back(neighbor_message(tape_, w_g, ctx->entities[i], ctx->relations[i]));
      }
      break;
    }
    case EncoderKind::rgcn: {
      const std::size_t d = params_.dims.dim;
      std::vector<Var> mats;
      for (const auto& n : nbhd.neighbors) {
        mats.push_back(tape_.param_row_matrix(params_.w_rel, n.relation, d, d));
      }
      ctx->fixed_output = encode_rgcn_mean(tape_, ctx->entities, mats);
      break;
    }
    case EncoderKind::time2vec:
      ctx->fixed_output = encode_time2vec(tape_, ctx->entities, ctx->relations, ctx->times,
                                          param(params_.w_g), param(params_.w_f), param(params_.b_f),
                                          param(params_.time_freq), param(params_.time_phase));
      break;
    case EncoderKind::functional:
      ctx->fixed_output = encode_functional_time(
          tape_, ctx->entities, ctx->relations, ctx->times, param(params_.w_g), param(params_.w_f),
          param(params_.b_f), param(params_.time_freq), param(params_.time_phase));
      break;
  }
  owners_.push_back(std::move(ctx));
  slot = owners_.size();
  return *owners_.back();
}

Var FiltGraph::encode(const OwnerContext& ctx, TimeId query_time, RelationId query_relation) {
  Var h;
  switch (params_.dims.encoder) {
    case EncoderKind::filt:
      h = aggregate_filt(tape_, ctx.messages, ctx.times, query_time, config_.lambda);
      break;
    case EncoderKind::attention: {
      Var gamma = attention_weights(tape_, ctx.relations, ctx.times, relation(query_relation),
                                    query_time, param(params_.w_q), param(params_.w_k),
                                    param(params_.time_freq), param(params_.time_phase));
      h = weighted_sum(tape_, gamma, ctx.messages);
      break;
    }
    case EncoderKind::rgcn:
    case EncoderKind::time2vec:
    case EncoderKind::functional:
      h = ctx.fixed_output;
      break;
  }
  h = dropout(tape_, h, config_.dropout, config_.train, output_rng_);
  if (lower_active()) {
    h = inject_lower(tape_, h, concept_vector(ctx.owner), param(params_.w_c2),
                     param(params_.delta2), config_.dropout, config_.train, lower_rng_,
                     config_.activation);
  }
  return h;
}

std::vector<double> injected_entity_table(ModelParams& params, const ConceptMap& concepts,
                                          ForwardConfig config) {
  config.train = false;
  Tape tape;
  FiltGraph graph(tape, params, concepts, config, 0);
  const std::size_t d = params.dims.dim;
  std::vector<double> table(params.dims.num_entities * d);
  for (EntityId e = 0; e < params.dims.num_entities; ++e) {
    const auto v = tape.value(graph.entity_input(e));
    std::copy(v.begin(), v.end(), table.begin() + static_cast<std::ptrdiff_t>(e * d));
  }
  return table;
}

}  // namespace filt
