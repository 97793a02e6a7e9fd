#include "filt/episodes.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

namespace filt {

std::size_t EpisodeTask::num_queries() const {
  std::size_t n = 0;
  for (const auto& e : entities) n += e.query.size();
  return n;
}

MetaSetIndex::MetaSetIndex(const std::vector<Quadruple>& meta_set, std::span<const EntityId> unseen)
    : meta_set_(&meta_set), entities_(unseen.begin(), unseen.end()) {
  for (EntityId e : entities_) by_entity_[e];
  for (std::size_t i = 0; i < meta_set.size(); ++i) {
    const auto& q = meta_set[i];
    if (auto it = by_entity_.find(q.subject); it != by_entity_.end()) it->second.push_back(i);
    if (q.object != q.subject) {
      if (auto it = by_entity_.find(q.object); it != by_entity_.end()) it->second.push_back(i);
    }
  }
}

std::span<const std::size_t> MetaSetIndex::quads_of(EntityId e) const {
  const auto it = by_entity_.find(e);
  if (it == by_entity_.end()) return {};
  return it->second;
}

namespace {

/// First k of a seeded permutation become support, the rest queries.
EntityEpisode partition(const MetaSetIndex& index, EntityId e, std::size_t k, Rng& rng) {
  std::vector<std::size_t> order(index.quads_of(e).begin(), index.quads_of(e).end());
  rng.shuffle(std::span<std::size_t>(order));
  EntityEpisode ep;
  ep.entity = e;
  const std::size_t n_support = std::min(k, order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& q = index.meta_set()[order[i]];
    if (i < n_support) {
      ep.support_idx.push_back(order[i]);
      ep.support.push_back(q);
    } else {
      ep.query_idx.push_back(order[i]);
      ep.query.push_back(q);
    }
  }
  return ep;
}

}  // namespace

EpisodeTask sample_task(const MetaSetIndex& index, std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw ArgumentError("shot size K must be at least 1");
  if (n == 0) throw ArgumentError("task size N must be at least 1");
  EpisodeTask task;
  task.seed = seed;
  task.shots = k;
  std::vector<EntityId> eligible;
  std::size_t skipped = 0;
  for (EntityId e : index.entities()) {
    if (index.quads_of(e).size() > k) {
      eligible.push_back(e);
    } else {
      ++skipped;
    }
  }
  if (skipped > 0) {
    task.warnings.push_back(std::to_string(skipped) + " entities with at most K=" +
                            std::to_string(k) + " quadruples skipped");
  }
  if (eligible.size() < n) {
    throw ArgumentError("sample_task: need N=" + std::to_string(n) + " entities with more than K=" +
                        std::to_string(k) + " quadruples, only " + std::to_string(eligible.size()) +
                        " available (short by " + std::to_string(n - eligible.size()) + ")");
  }
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    std::swap(eligible[i], eligible[i + rng.uniform_index(eligible.size() - i)]);
  }
  for (std::size_t i = 0; i < n; ++i) task.entities.push_back(partition(index, eligible[i], k, rng));
  return task;
}

EpisodeTask sample_task(const std::vector<Quadruple>& meta_set, std::span<const EntityId> unseen,
                        std::size_t n, std::size_t k, std::uint64_t seed) {
  return sample_task(MetaSetIndex(meta_set, unseen), n, k, seed);
}

namespace {

template <typename ShotFn>
EpisodeTask eval_episode(const std::vector<Quadruple>& meta_set, std::span<const EntityId> unseen,
                         std::uint64_t seed, std::size_t shots_tag, ShotFn shots_for) {
  const MetaSetIndex index(meta_set, unseen);
  EpisodeTask task;
  task.seed = seed;
  task.shots = shots_tag;
  std::vector<EntityId> entities(unseen.begin(), unseen.end());
  std::sort(entities.begin(), entities.end());
  std::size_t starved = 0;
  for (EntityId e : entities) {
    const std::size_t k = shots_for(e);
    Rng rng(mix_seed(seed, e));
    task.entities.push_back(partition(index, e, k, rng));
    if (index.quads_of(e).size() <= k) ++starved;
  }
  if (starved > 0) {
    task.warnings.push_back(std::to_string(starved) +
                            " entities have no more quadruples than their shot size; they "
                            "contribute no queries");
  }
  return task;
}

}  // namespace

EpisodeTask build_eval_episode(const std::vector<Quadruple>& meta_set,
                               std::span<const EntityId> unseen, std::size_t k,
                               std::uint64_t seed) {
  if (k == 0) throw ArgumentError("shot size K must be at least 1");
  return eval_episode(meta_set, unseen, seed, k, [k](EntityId) { return k; });
}

EpisodeTask build_random_shot_episode(const std::vector<Quadruple>& meta_set,
                                      std::span<const EntityId> unseen,
                                      std::span<const std::size_t> shot_choices,
                                      std::uint64_t seed) {
  if (shot_choices.empty() ||
      std::any_of(shot_choices.begin(), shot_choices.end(), [](std::size_t k) { return k == 0; })) {
    throw ArgumentError("random shots need a non-empty list of positive shot sizes");
  }
  return eval_episode(meta_set, unseen, seed, 0, [&](EntityId e) {
    Rng pick(mix_seed(seed ^ 0x5eedULL, e));
    return shot_choices[pick.uniform_index(shot_choices.size())];
  });
}

Quadruple add_inverse(const Quadruple& q, std::size_t num_relations) {
  if (q.relation >= num_relations) {
    throw ArgumentError("add_inverse: relation " + std::to_string(q.relation) +
                        " is already an inverse id (|R| = " + std::to_string(num_relations) + ")");
  }
  return {q.object, static_cast<RelationId>(q.relation + num_relations), q.subject, q.time};
}

Quadruple invert_back(const Quadruple& q, std::size_t num_relations) {
  if (q.relation < num_relations || q.relation >= 2 * num_relations) {
    throw ArgumentError("invert_back: relation " + std::to_string(q.relation) +
                        " is not an inverse id");
  }
  return {q.object, static_cast<RelationId>(q.relation - num_relations), q.subject, q.time};
}

Quadruple NegativeSample::corrupted() const {
  Quadruple q = positive;
  (subject_side ? q.subject : q.object) = corrupted_entity;
  return q;
}

std::vector<NegativeSample> sample_negatives(const Quadruple& positive, bool subject_unseen,
                                             std::size_t num_neg,
                                             std::span<const EntityId> pool,
                                             const std::vector<EntityId>* known_true, Rng& rng) {
  if (num_neg == 0) throw ArgumentError("num_neg must be at least 1");
  const EntityId truth = subject_unseen ? positive.object : positive.subject;
  auto rejected = [&](EntityId e) {
    if (e == truth) return true;
    return known_true != nullptr &&
           std::find(known_true->begin(), known_true->end(), e) != known_true->end();
  };
  const bool any = std::any_of(pool.begin(), pool.end(), [&](EntityId e) { return !rejected(e); });
  if (!any) throw ArgumentError("negative sampling: candidate pool exhausted");

  std::vector<NegativeSample> out;
  out.reserve(num_neg);
  while (out.size() < num_neg) {
    const EntityId e = pool[rng.uniform_index(pool.size())];
    if (rejected(e)) continue;
    out.push_back({positive, e, !subject_unseen});
  }
  return out;
}

std::vector<NegativeSample> sample_negatives(const Quadruple& positive, bool subject_unseen,
                                             std::size_t num_neg,
                                             std::span<const EntityId> pool,
                                             const std::vector<EntityId>* known_true,
                                             std::uint64_t seed) {
  Rng rng(seed);
  return sample_negatives(positive, subject_unseen, num_neg, pool, known_true, rng);
}

std::string episode_to_json(const EpisodeTask& task) {
  nlohmann::ordered_json j;
  j["seed"] = task.seed;
  j["shots"] = task.shots;
  j["entities"] = nlohmann::ordered_json::array();
  for (const auto& e : task.entities) {
    j["entities"].push_back(
        {{"entity", e.entity}, {"support", e.support_idx}, {"query", e.query_idx}});
  }
  return j.dump(2);
}

}  // namespace filt
