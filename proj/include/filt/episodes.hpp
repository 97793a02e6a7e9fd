#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "filt/random.hpp"
#include "filt/types.hpp"

namespace filt {

/// Support/query partition of one unseen entity's quadruples.
struct EntityEpisode {
  EntityId entity = 0;
  /// Indices into the meta set the episode was drawn from.
  std::vector<std::size_t> support_idx;
  std::vector<std::size_t> query_idx;
  std::vector<Quadruple> support;
  std::vector<Quadruple> query;
};

struct EpisodeTask {
  std::vector<EntityEpisode> entities;
  std::uint64_t seed = 0;
  /// Shot size the episode was built with; 0 for per-entity random shots.
  std::size_t shots = 0;
  std::vector<std::string> warnings;

  std::size_t num_queries() const;
};

/// For every unseen entity, the positions of meta-set quadruples that contain it.
class MetaSetIndex {
 public:
  MetaSetIndex(const std::vector<Quadruple>& meta_set, std::span<const EntityId> unseen);

  std::span<const std::size_t> quads_of(EntityId e) const;
  const std::vector<EntityId>& entities() const { return entities_; }
  const std::vector<Quadruple>& meta_set() const { return *meta_set_; }

 private:
  const std::vector<Quadruple>* meta_set_;
  std::vector<EntityId> entities_;
  std::unordered_map<EntityId, std::vector<std::size_t>> by_entity_;
};

/// Meta-training task: N entities drawn without replacement among those with more
/// than K quadruples, K support quadruples each, the rest as queries.
EpisodeTask sample_task(const MetaSetIndex& index, std::size_t n, std::size_t k, std::uint64_t seed);
EpisodeTask sample_task(const std::vector<Quadruple>& meta_set, std::span<const EntityId> unseen,
                        std::size_t n, std::size_t k, std::uint64_t seed);

/// Evaluation episode over every unseen entity. Each entity's quadruples are put in a
/// seeded order derived from (seed, entity id) and the first K become support, so the
/// support sets for K = 1 < 3 < 5 are nested. Entities with at most K quadruples keep
/// all of them as support and contribute no queries.
EpisodeTask build_eval_episode(const std::vector<Quadruple>& meta_set,
                               std::span<const EntityId> unseen, std::size_t k,
                               std::uint64_t seed);

/// As build_eval_episode, with each entity's K drawn uniformly from `shot_choices`.
EpisodeTask build_random_shot_episode(const std::vector<Quadruple>& meta_set,
                                      std::span<const EntityId> unseen,
                                      std::span<const std::size_t> shot_choices,
                                      std::uint64_t seed);

/// (s, r, o, t) -> (o, r + |R|, s, t). Throws if r is already an inverse id.
Quadruple add_inverse(const Quadruple& q, std::size_t num_relations);
/// Maps an inverse-relation quadruple back; involution partner of add_inverse.
Quadruple invert_back(const Quadruple& q, std::size_t num_relations);

struct NegativeSample {
  Quadruple positive;
  EntityId corrupted_entity = 0;
  /// True when the subject slot was corrupted.
  bool subject_side = false;

  Quadruple corrupted() const;
};

/// Draws `num_neg` entities uniformly (with replacement) from `pool`, never equal to the
/// entity being replaced. `subject_unseen` says the unseen entity is the subject, so the
/// object is corrupted (and vice versa). When `known_true` is non-null, those entities are
/// rejected too (filtered sampling).
std::vector<NegativeSample> sample_negatives(const Quadruple& positive, bool subject_unseen,
                                             std::size_t num_neg,
                                             std::span<const EntityId> pool,
                                             const std::vector<EntityId>* known_true, Rng& rng);
std::vector<NegativeSample> sample_negatives(const Quadruple& positive, bool subject_unseen,
                                             std::size_t num_neg,
                                             std::span<const EntityId> pool,
                                             const std::vector<EntityId>* known_true,
                                             std::uint64_t seed);

/// Audit form: entity ids, support/query indices and the seed, as JSON text.
std::string episode_to_json(const EpisodeTask& task);

}  // namespace filt
