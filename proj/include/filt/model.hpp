#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "filt/concepts.hpp"
#include "filt/encoders.hpp"
#include "filt/params.hpp"
#include "filt/tape.hpp"
#include "filt/tkg_data.hpp"

namespace filt {

struct ForwardConfig {
  ConceptVariant concepts = ConceptVariant::full;
  double lambda = 0.2;
  double dropout = 0.3;
  Activation activation = Activation::leaky_relu;
  bool train = false;
};

/// Per-owner encoder state that does not depend on the query.
struct OwnerContext {
  EntityId owner = 0;
  std::vector<Var> entities;
  std::vector<Var> relations;
  std::vector<TimeId> times;
  /// filt / attention: W_g(h || r) per neighbor.
  std::vector<Var> messages;
  /// rgcn / time2vec / functional: the aggregate itself (query independent).
  Var fixed_output;
};

/// One forward graph of the full model on a tape.
///
/// Memoizes concept-injected entity inputs, concept vectors and owner contexts, so each
/// is computed (and dropped out) once per tape. Dropout draws come from three separate
/// streams (upper branch, lower branch, encoder output) so that disabling a concept branch
/// leaves the other streams untouched.
class FiltGraph {
 public:
  FiltGraph(Tape& tape, ModelParams& params, const ConceptMap& concepts, ForwardConfig config,
            std::uint64_t dropout_seed, const std::vector<double>* entity_inputs = nullptr);

  /// Entity embedding with the upper concept branch applied (when active).
  Var entity_input(EntityId e);
  Var relation(RelationId r);
  /// softmax-weighted aggregate of the entity's concept vectors.
  Var concept_vector(EntityId e);

  const OwnerContext& owner(EntityId e, std::span<const Quadruple> support);
  /// Encoder output for the owner at (query_time, query_relation), lower branch applied.
  /// `query_relation` is oriented with the owner on the object side.
  Var encode(const OwnerContext& ctx, TimeId query_time, RelationId query_relation);

  bool upper_active() const;
  bool lower_active() const;
  Tape& tape() { return tape_; }
  ModelParams& params() { return params_; }
  const ForwardConfig& config() const { return config_; }

 private:
  Var param(ParamTensor& p);

  Tape& tape_;
  ModelParams& params_;
  const ConceptMap& concepts_;
  ForwardConfig config_;
  const std::vector<double>* entity_inputs_;
  Rng upper_rng_;
  Rng lower_rng_;
  Rng output_rng_;
  std::vector<Var> entity_memo_;
  std::vector<Var> concept_memo_;
  std::vector<std::unique_ptr<OwnerContext>> owners_;
  /// owners_ position + 1 per entity; 0 when not built yet.
  std::vector<std::size_t> owner_slot_;
};

/// Values of entity_input for every entity, computed in eval mode (no dropout).
std::vector<double> injected_entity_table(ModelParams& params, const ConceptMap& concepts,
                                          ForwardConfig config);

}  // namespace filt
