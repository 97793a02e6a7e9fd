#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include <json.hpp>

#include "filt/episodes.hpp"

using namespace filt;

namespace {

// Unseen entity 100 + i has counts[i] quadruples with background entities.
std::vector<Quadruple> meta_set_with_counts(const std::vector<std::size_t>& counts) {
  std::vector<Quadruple> out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const auto e = static_cast<EntityId>(100 + i);
    for (std::size_t j = 0; j < counts[i]; ++j) {
      const auto other = static_cast<EntityId>(j % 7);
      const auto t = static_cast<TimeId>(j);
      out.push_back(j % 2 == 0 ? Quadruple{e, 1, other, t} : Quadruple{other, 2, e, t});
    }
  }
  return out;
}

std::vector<EntityId> ids(std::size_t n) {
  std::vector<EntityId> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(static_cast<EntityId>(100 + i));
  return v;
}

}  // namespace

TEST_CASE("entity with 12 quadruples and K=3 splits 3/9 without overlap") {
  const auto meta = meta_set_with_counts({12});
  const auto unseen = ids(1);
  const auto task = sample_task(meta, unseen, 1, 3, 42);
  REQUIRE(task.entities.size() == 1);
  const auto& ep = task.entities[0];
  CHECK(ep.support.size() == 3);
  CHECK(ep.query.size() == 9);
  std::set<std::size_t> all(ep.support_idx.begin(), ep.support_idx.end());
  all.insert(ep.query_idx.begin(), ep.query_idx.end());
  CHECK(all.size() == 12);
  for (std::size_t i = 0; i < ep.support.size(); ++i) CHECK(meta[ep.support_idx[i]] == ep.support[i]);
}

TEST_CASE("entities with at most K quadruples are skipped with a warning") {
  const auto meta = meta_set_with_counts({3, 8, 5});
  const auto unseen = ids(3);
  const auto task = sample_task(meta, unseen, 2, 3, 1);
  CHECK(task.entities.size() == 2);
  for (const auto& ep : task.entities) CHECK(ep.entity != 100);
  CHECK(!task.warnings.empty());
  CHECK_THROWS_AS(sample_task(meta, unseen, 3, 3, 1), ArgumentError);
  CHECK_THROWS_AS(sample_task(meta, unseen, 1, 0, 1), ArgumentError);
}

TEST_CASE("sampled entities are distinct and the task is seed-determined") {
  const auto meta = meta_set_with_counts({6, 7, 8, 9, 10, 11});
  const auto unseen = ids(6);
  const auto a = sample_task(meta, unseen, 4, 1, 9);
  const auto b = sample_task(meta, unseen, 4, 1, 9);
  std::set<EntityId> seen;
  for (const auto& ep : a.entities) CHECK(seen.insert(ep.entity).second);
  CHECK(episode_to_json(a) == episode_to_json(b));
  const auto j = nlohmann::json::parse(episode_to_json(a));
  CHECK(j.contains("seed"));
}

TEST_CASE("evaluation episodes are deterministic and nested across shots") {
  const auto meta = meta_set_with_counts({2, 6, 9, 12});
  const auto unseen = ids(4);
  const auto e1 = build_eval_episode(meta, unseen, 1, 5);
  const auto e3 = build_eval_episode(meta, unseen, 3, 5);
  const auto e5 = build_eval_episode(meta, unseen, 5, 5);
  CHECK(episode_to_json(e3) == episode_to_json(build_eval_episode(meta, unseen, 3, 5)));
  REQUIRE(e1.entities.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& s1 = e1.entities[i].support_idx;
    const auto& s3 = e3.entities[i].support_idx;
    const auto& s5 = e5.entities[i].support_idx;
    CHECK(std::equal(s1.begin(), s1.end(), s3.begin()));
    CHECK(std::equal(s3.begin(), s3.end(), s5.begin()));
  }
  // The entity with 2 quadruples has no queries at K = 3.
  CHECK(e3.entities[0].query.empty());
  CHECK(e1.entities[0].query.size() == 1);
  CHECK(e3.num_queries() == 0 + 3 + 6 + 9);
}

TEST_CASE("K above every count gives zero queries") {
  const auto meta = meta_set_with_counts({2, 4});
  const auto unseen = ids(2);
  const auto e = build_eval_episode(meta, unseen, 10, 0);
  CHECK(e.num_queries() == 0);
  CHECK(!e.warnings.empty());
}

TEST_CASE("random shot episodes draw from the allowed sizes") {
  const auto meta = meta_set_with_counts({20, 20, 20, 20, 20, 20, 20, 20});
  const auto unseen = ids(8);
  const std::vector<std::size_t> choices{1, 3, 5};
  const auto e = build_random_shot_episode(meta, unseen, choices, 3);
  CHECK(e.shots == 0);
  for (const auto& ep : e.entities) {
    CHECK(std::find(choices.begin(), choices.end(), ep.support.size()) != choices.end());
  }
  CHECK(episode_to_json(e) == episode_to_json(build_random_shot_episode(meta, unseen, choices, 3)));
}

TEST_CASE("inverse relations") {
  CHECK(add_inverse({5, 2, 9, 7}, 10) == Quadruple{9, 12, 5, 7});
  CHECK(invert_back(add_inverse({5, 2, 9, 7}, 10), 10) == Quadruple{5, 2, 9, 7});
  CHECK(add_inverse({0, 9, 0, 0}, 10) == Quadruple{0, 19, 0, 0});
  CHECK_THROWS_AS(add_inverse({0, 12, 0, 0}, 10), ArgumentError);
  CHECK_THROWS_AS(invert_back({0, 2, 0, 0}, 10), ArgumentError);
}

TEST_CASE("negative sampling") {
  const Quadruple q{100, 1, 3, 0};
  SUBCASE("forced choice") {
    const std::vector<EntityId> pool{3, 4};
    const auto negs = sample_negatives(q, true, 1, pool, nullptr, 7);
    REQUIRE(negs.size() == 1);
    CHECK(negs[0].corrupted_entity == 4);
    CHECK(!negs[0].subject_side);
    CHECK(negs[0].corrupted() == Quadruple{100, 1, 4, 0});
  }
  SUBCASE("subject corrupted when the object is unseen") {
    const std::vector<EntityId> pool{0, 1, 2, 3};
    const Quadruple r{2, 1, 100, 0};
    for (const auto& n : sample_negatives(r, false, 16, pool, nullptr, 1)) {
      CHECK(n.subject_side);
      CHECK(n.corrupted_entity != 2);
      CHECK(n.corrupted().object == 100);
    }
  }
  SUBCASE("deterministic and filtered") {
    std::vector<EntityId> pool;
    for (EntityId e = 0; e < 40; ++e) pool.push_back(e);
    const std::vector<EntityId> known{5, 6, 7};
    const auto a = sample_negatives(q, true, 32, pool, &known, 11);
    const auto b = sample_negatives(q, true, 32, pool, &known, 11);
    REQUIRE(a.size() == 32);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].corrupted_entity == b[i].corrupted_entity);
      CHECK(a[i].corrupted_entity != 3);
      CHECK(std::find(known.begin(), known.end(), a[i].corrupted_entity) == known.end());
    }
  }
  SUBCASE("exhausted pool") {
    const std::vector<EntityId> pool{3};
    CHECK_THROWS_AS(sample_negatives(q, true, 1, pool, nullptr, 0), ArgumentError);
  }
}
