#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "filt/episodes.hpp"
#include "filt/model.hpp"

namespace filt {

/// Known-true entities per (fixed entity, relation, time, predicted side).
class FilterIndex {
 public:
  FilterIndex() = default;
  explicit FilterIndex(const std::vector<Quadruple>& facts);

  /// Entities x with (fixed, r, x, t) known when `predict_object`, else (x, r, fixed, t).
  const std::vector<EntityId>& known(EntityId fixed, RelationId relation, TimeId time,
                                     bool predict_object) const;

 private:
  struct Key {
    EntityId entity;
    RelationId relation;
    TimeId time;
    bool predict_object;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };
  std::unordered_map<Key, std::vector<EntityId>, KeyHash> index_;
  std::vector<EntityId> empty_;
};

enum class Direction { predict_object, predict_subject };

struct RankResult {
  Quadruple query;
  Direction direction = Direction::predict_object;
  std::size_t rank = 0;
  bool filtered = true;
  /// Candidates left after filtering (ground truth included).
  std::size_t num_candidates = 0;
};

/// Pessimistic rank of `truth_score`: 1 + #(strictly greater) + #(ties), counted over
/// candidates whose `keep` flag is set. The ground truth itself is excluded by index.
std::size_t pessimistic_rank(std::span<const double> scores, std::size_t truth_index,
                             const std::vector<bool>& keep);

/// Filtered rank of the true missing entity. `encoded` is the owner's encoder output,
/// `entity_table` the concept-injected embedding of every entity (row-major, d columns).
RankResult rank_query(std::span<const double> encoded, std::span<const double> relation_vec,
                      const Quadruple& query, EntityId owner, std::span<const EntityId> candidates,
                      const std::vector<EntityId>& known_true, std::span<const double> entity_table,
                      bool filtered = true);

/// Independent check of rank_query: materializes all scores, sorts them with the ground
/// truth placed after its ties, and reads off its position. Test use only.
std::size_t oracle_rank(std::span<const double> encoded, std::span<const double> relation_vec,
                        const Quadruple& query, EntityId owner, std::span<const EntityId> candidates,
                        const std::vector<EntityId>& known_true,
                        std::span<const double> entity_table, bool filtered = true);

struct Metrics {
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits3 = 0.0;
  double hits10 = 0.0;
  std::size_t num_queries = 0;
};

/// MRR and Hits@{1,3,10} over a multiset of ranks. Throws on an empty set.
Metrics metrics_from_ranks(std::span<const std::size_t> ranks);

struct EvalConfig {
  ForwardConfig forward;
  bool filtered = true;
  std::size_t workers = 1;
};

struct EvalResult {
  Metrics metrics;
  std::vector<RankResult> ranks;
  /// Raw score of the true entity per query, in rank order (used by equivalence checks).
  std::vector<double> true_scores;
};

/// Ranks every query of the episode against `candidates`, the owner's side fixed.
EvalResult evaluate(ModelParams& params, const ConceptMap& concepts, const EpisodeTask& episode,
                    std::span<const EntityId> candidates, const FilterIndex& filter,
                    const EvalConfig& config);

/// One line of a metrics table.
struct MetricsRow {
  std::string dataset;
  std::string shot;
  std::string encoder;
  Metrics metrics;
  std::uint64_t seed = 0;
};

/// Header `dataset,shot,encoder,MRR,H@1,H@3,H@10,num_queries,seed` plus one line per row.
std::string metrics_csv(const std::vector<MetricsRow>& rows);
std::string metrics_json(const std::vector<MetricsRow>& rows);

/// Every entity id 0..n-1.
std::vector<EntityId> all_entities(std::size_t n);

}  // namespace filt
