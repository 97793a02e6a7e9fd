#include "filt/scoring.hpp"

#include <string>

namespace filt {

RelationId oriented_query_relation(const Quadruple& q, EntityId owner, std::size_t num_relations) {
  return owner_is_subject(q, owner) ? static_cast<RelationId>(q.relation + num_relations)
                                    : q.relation;
}

Var score_query(FiltGraph& g, const Quadruple& query, EntityId owner, Var encoded, EntityId other) {
  Tape& t = g.tape();
  Var r = g.relation(query.relation);
  Var o = g.entity_input(other);
  return owner_is_subject(query, owner) ? complex_score(t, encoded, r, o)
                                        : complex_score(t, o, r, encoded);
}

Var score_query(FiltGraph& g, const Quadruple& query, EntityId owner, Var encoded) {
  return score_query(g, query, owner, encoded, other_entity(query, owner));
}

EpisodeNegatives draw_episode_negatives(const EpisodeTask& task, std::span<const EntityId> pool,
                                        std::size_t num_neg, Rng& rng) {
  EpisodeNegatives out(task.entities.size());
  for (std::size_t i = 0; i < task.entities.size(); ++i) {
    const auto& ep = task.entities[i];
    out[i].reserve(ep.query.size());
    for (const auto& q : ep.query) {
      out[i].push_back(
          sample_negatives(q, owner_is_subject(q, ep.entity), num_neg, pool, nullptr, rng));
    }
  }
  return out;
}

Var episode_loss(FiltGraph& g, const EpisodeTask& task, const EpisodeNegatives& negatives,
                 const LossConfig& config, std::vector<Var>* terms_out) {
  if (!(config.margin > 0.0)) throw ArgumentError("margin must be positive");
  if (negatives.size() != task.entities.size()) {
    throw ArgumentError("negatives do not match the episode's entities");
  }
  Tape& t = g.tape();
  const std::size_t num_relations = g.params().dims.num_relations;
  std::vector<Var> terms;
  std::size_t num_queries = 0;
  for (std::size_t i = 0; i < task.entities.size(); ++i) {
    const auto& ep = task.entities[i];
    if (ep.query.empty()) continue;
    if (negatives[i].size() != ep.query.size()) {
      throw ArgumentError("negatives do not match the queries of entity " + std::to_string(ep.entity));
    }
    const OwnerContext& ctx = g.owner(ep.entity, ep.support);
    for (std::size_t j = 0; j < ep.query.size(); ++j) {
      const auto& q = ep.query[j];
      Var encoded = g.encode(ctx, q.time, oriented_query_relation(q, ep.entity, num_relations));
      Var positive = score_query(g, q, ep.entity, encoded);
      for (const auto& neg : negatives[i][j]) {
        Var negative = score_query(g, q, ep.entity, encoded, neg.corrupted_entity);
        terms.push_back(hinge(t, config.margin, positive, negative));
      }
      ++num_queries;
    }
  }
  Var loss = sum(t, terms);
  if (terms_out != nullptr) *terms_out = terms;
  if (config.normalize && num_queries > 0) {
    loss = scale(t, 1.0 / static_cast<double>(num_queries), loss);
  }
  return loss;
}

}  // namespace filt
