#pragma once

#include <span>
#include <vector>

#include "filt/episodes.hpp"
#include "filt/model.hpp"

namespace filt {

/// The owner is treated as the subject whenever it sits on the subject side
/// (self-loops included); the other side is then the object.
inline bool owner_is_subject(const Quadruple& q, EntityId owner) { return q.subject == owner; }

/// The true entity on the side opposite to the owner.
inline EntityId other_entity(const Quadruple& q, EntityId owner) {
  return owner_is_subject(q, owner) ? q.object : q.subject;
}

/// Query relation oriented with the owner on the object side (inverse id when the owner
/// is the subject), matching how support neighbors are oriented.
RelationId oriented_query_relation(const Quadruple& q, EntityId owner, std::size_t num_relations);

/// complex_score with the encoded owner in its slot and `other` (concept-injected
/// embedding) in the opposite slot.
Var score_query(FiltGraph& g, const Quadruple& query, EntityId owner, Var encoded, EntityId other);
Var score_query(FiltGraph& g, const Quadruple& query, EntityId owner, Var encoded);

/// negatives[entity position][query position] = corruptions of that query.
using EpisodeNegatives = std::vector<std::vector<std::vector<NegativeSample>>>;

/// Draws `num_neg` negatives per query from `pool`, corrupting the side opposite the owner.
EpisodeNegatives draw_episode_negatives(const EpisodeTask& task, std::span<const EntityId> pool,
                                        std::size_t num_neg, Rng& rng);

struct LossConfig {
  double margin = 1.0;
  /// Divide the summed hinge terms by the number of queries.
  bool normalize = false;
};

/// sum over entities, queries and negatives of max(margin - s(q+) + s(q-), 0).
/// `terms`, when given, receives every hinge term in summation order.
Var episode_loss(FiltGraph& g, const EpisodeTask& task, const EpisodeNegatives& negatives,
                 const LossConfig& config, std::vector<Var>* terms = nullptr);

}  // namespace filt
