#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "filt/evaluator.hpp"
#include "filt/toy.hpp"

using namespace filt;

namespace {

struct Instance {
  std::vector<double> table;
  std::vector<double> encoded;
  std::vector<double> relation;
  std::vector<EntityId> candidates;
  std::vector<EntityId> known;
  Quadruple query;
  EntityId owner = 0;
};

// Entity rows drawn from a small value set so ties are frequent.
Instance random_instance(Rng& rng, bool ties, bool heavy_filter) {
  Instance in;
  const std::size_t d = 4;
  const std::size_t n = 3 + rng.uniform_index(30);
  in.table.resize(n * d);
  for (auto& v : in.table) {
    v = ties ? static_cast<double>(rng.uniform_index(3)) - 1.0 : rng.uniform(-1, 1);
  }
  in.encoded.resize(d);
  in.relation.resize(d);
  for (auto& v : in.encoded) v = ties ? static_cast<double>(rng.uniform_index(2)) : rng.uniform(-1, 1);
  for (auto& v : in.relation) v = ties ? 1.0 : rng.uniform(-1, 1);
  in.owner = static_cast<EntityId>(n);  // not in the table; never a candidate
  const auto truth = static_cast<EntityId>(rng.uniform_index(n));
  in.query = rng.uniform_index(2) == 0 ? Quadruple{in.owner, 0, truth, 0}
                                       : Quadruple{truth, 0, in.owner, 0};
  for (EntityId e = 0; e < n; ++e) {
    if (e == truth || rng.uniform01() < 0.8) in.candidates.push_back(e);
  }
  if (rng.uniform_index(4) == 0) in.candidates.push_back(truth);  // duplicate listing
  Rng shuffle_rng(rng.next());
  shuffle_rng.shuffle(std::span<EntityId>(in.candidates));
  const double p = heavy_filter ? 0.7 : 0.15;
  for (EntityId e = 0; e < n; ++e) {
    if (rng.uniform01() < p) in.known.push_back(e);  // may include the truth
  }
  return in;
}

}  // namespace

TEST_CASE("pessimistic rank examples") {
  const std::vector<double> scores{3, 2, 2, 1, 2};
  const std::vector<bool> keep(5, true);
  CHECK(pessimistic_rank(scores, 4, keep) == 4);
  CHECK(pessimistic_rank(std::vector<double>{0.1, 5, 0.3}, 1, std::vector<bool>(3, true)) == 1);
  CHECK(pessimistic_rank(std::vector<double>{7, 7, 7, 7}, 2, std::vector<bool>(4, true)) == 4);
  CHECK(pessimistic_rank(scores, 4, {false, true, true, true, true}) == 3);
  CHECK_THROWS(pessimistic_rank(scores, 4, {true, true, true, true, false}));
}

TEST_CASE("rank_query agrees with the sorting oracle") {
  Rng rng(2024);
  for (int i = 0; i < 600; ++i) {
    const auto in = random_instance(rng, i % 2 == 0, i % 3 == 0);
    for (bool filtered : {true, false}) {
      const auto fast = rank_query(in.encoded, in.relation, in.query, in.owner, in.candidates,
                                   in.known, in.table, filtered);
      const auto slow = oracle_rank(in.encoded, in.relation, in.query, in.owner, in.candidates,
                                    in.known, in.table, filtered);
      REQUIRE(fast.rank == slow);
    }
  }
}

TEST_CASE("filtered rank ignores added known-true distractors") {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    auto in = random_instance(rng, false, false);
    const std::size_t d = in.encoded.size();
    const auto base = rank_query(in.encoded, in.relation, in.query, in.owner, in.candidates,
                                 in.known, in.table, true);
    // A new known-true entity with an extreme embedding.
    const auto extra = static_cast<EntityId>(in.table.size() / d + 1);
    in.table.resize((extra + 1) * d, 1e6);
    in.candidates.push_back(extra);
    in.known.push_back(extra);
    std::sort(in.known.begin(), in.known.end());
    const auto after = rank_query(in.encoded, in.relation, in.query, in.owner, in.candidates,
                                  in.known, in.table, true);
    CHECK(after.rank == base.rank);
  }
}

TEST_CASE("truth missing from candidates is an error") {
  const std::vector<double> table{1, 0, 0, 1};
  const std::vector<EntityId> cands{0};
  CHECK_THROWS_AS(rank_query(std::vector<double>{1, 0}, std::vector<double>{1, 0}, {5, 0, 1, 0}, 5,
                             cands, {}, table),
                  ArgumentError);
}

TEST_CASE("metric formulas") {
  const std::vector<std::size_t> ranks{1, 2, 4};
  const auto m = metrics_from_ranks(ranks);
  CHECK(std::abs(m.mrr - 1.75 / 3.0) < 1e-12);
  CHECK(std::abs(m.hits1 - 1.0 / 3.0) < 1e-12);
  CHECK(std::abs(m.hits3 - 2.0 / 3.0) < 1e-12);
  CHECK(m.hits10 == 1.0);
  CHECK(m.num_queries == 3);
  const auto ones = metrics_from_ranks(std::vector<std::size_t>{1, 1, 1, 1});
  CHECK(ones.mrr == 1.0);
  CHECK(ones.hits1 == 1.0);
  CHECK_THROWS_AS(metrics_from_ranks(std::vector<std::size_t>{}), ArgumentError);
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    std::vector<std::size_t> r(1 + rng.uniform_index(20));
    for (auto& x : r) x = 1 + rng.uniform_index(30);
    const auto q = metrics_from_ranks(r);
    CHECK(q.hits1 <= q.hits3);
    CHECK(q.hits3 <= q.hits10);
    CHECK(q.mrr > 0.0);
    CHECK(q.mrr <= 1.0);
  }
}

TEST_CASE("filter index lists known entities per side") {
  const std::vector<Quadruple> facts{{0, 1, 2, 3}, {0, 1, 4, 3}, {0, 1, 4, 3}, {5, 1, 2, 3}, {0, 1, 6, 2}};
  const FilterIndex f(facts);
  CHECK(f.known(0, 1, 3, true) == std::vector<EntityId>{2, 4});
  CHECK(f.known(2, 1, 3, false) == std::vector<EntityId>{0, 5});
  CHECK(f.known(0, 1, 2, true) == std::vector<EntityId>{6});
  CHECK(f.known(0, 2, 3, true).empty());
  CHECK(f.known(0, 1, 3, false).empty());
}

TEST_CASE("metrics tables") {
  MetricsRow row{"toy", "3", "filt", metrics_from_ranks(std::vector<std::size_t>{1, 2, 4}), 7};
  const auto csv = metrics_csv({row});
  CHECK(csv.rfind("dataset,shot,encoder,MRR,H@1,H@3,H@10,num_queries,seed\n", 0) == 0);
  CHECK(csv.find("toy,3,filt,0.583333,0.333333,0.666667,1.000000,3,7") != std::string::npos);
  CHECK(metrics_json({row}).find("\"MRR\"") != std::string::npos);
}

TEST_CASE("evaluate is independent of the worker count") {
  auto fx = make_toy_fixture(EncoderKind::filt, ConceptVariant::full);
  std::vector<Quadruple> facts;
  for (const auto& ep : fx.task.entities) {
    facts.insert(facts.end(), ep.support.begin(), ep.support.end());
    facts.insert(facts.end(), ep.query.begin(), ep.query.end());
  }
  const FilterIndex filter(facts);
  const auto cands = all_entities(fx.params.dims.num_entities);
  EvalConfig cfg;
  cfg.forward = fx.forward;
  const auto one = evaluate(fx.params, fx.concepts, fx.task, cands, filter, cfg);
  cfg.workers = 3;
  const auto three = evaluate(fx.params, fx.concepts, fx.task, cands, filter, cfg);
  REQUIRE(one.ranks.size() == three.ranks.size());
  CHECK(one.true_scores == three.true_scores);
  for (std::size_t i = 0; i < one.ranks.size(); ++i) CHECK(one.ranks[i].rank == three.ranks[i].rank);
  CHECK(one.metrics.mrr == three.metrics.mrr);
  CHECK(one.ranks.size() == fx.task.num_queries());

  cfg.filtered = false;
  const auto raw = evaluate(fx.params, fx.concepts, fx.task, cands, filter, cfg);
  for (std::size_t i = 0; i < raw.ranks.size(); ++i) CHECK(raw.ranks[i].rank >= one.ranks[i].rank);

  EpisodeTask empty;
  CHECK_THROWS_AS(evaluate(fx.params, fx.concepts, empty, cands, filter, cfg), ArgumentError);
}
