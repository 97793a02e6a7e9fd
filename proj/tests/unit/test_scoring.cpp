#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>

#include "filt/scoring.hpp"
#include "filt/toy.hpp"

using namespace filt;

namespace {

double oracle_score(const std::vector<double>& s, const std::vector<double>& r,
                    const std::vector<double>& o) {
  const std::size_t h = s.size() / 2;
  double total = 0.0;
  for (std::size_t i = 0; i < h; ++i) {
    const std::complex<double> cs(s[i], s[h + i]), cr(r[i], r[h + i]), co(o[i], o[h + i]);
    total += (cs * cr * std::conj(co)).real();
  }
  return total;
}

}  // namespace

TEST_CASE("complex score examples") {
  CHECK(complex_score_value(std::vector<double>{1, 0}, std::vector<double>{1, 0},
                            std::vector<double>{1, 0}) == 1.0);
  CHECK(complex_score_value(std::vector<double>{0, 0}, std::vector<double>{3, 1},
                            std::vector<double>{2, 5}) == 0.0);
  CHECK(complex_score_value(std::vector<double>{1, 2}, std::vector<double>{3, 4},
                            std::vector<double>{5, 6}) == 35.0);
  CHECK(oracle_score({1, 2}, {3, 4}, {5, 6}) == 35.0);

  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s(8), r(8), o(8), s2(8);
    for (auto* v : {&s, &r, &o, &s2})
      for (auto& x : *v) x = rng.uniform(-2, 2);
    CHECK(complex_score_value(s, r, o) == doctest::Approx(oracle_score(s, r, o)).epsilon(1e-12));
    std::vector<double> mix(8);
    for (std::size_t i = 0; i < 8; ++i) mix[i] = 2.0 * s[i] + s2[i];
    CHECK(complex_score_value(mix, r, o) ==
          doctest::Approx(2.0 * complex_score_value(s, r, o) + complex_score_value(s2, r, o)));
    Tape t;
    CHECK(t.scalar_value(complex_score(t, t.constant(s), t.constant(r), t.constant(o))) ==
          complex_score_value(s, r, o));
  }
}

TEST_CASE("hinge examples") {
  Tape t;
  CHECK(t.scalar_value(hinge(t, 1.0, t.scalar(0.2), t.scalar(0.5))) == doctest::Approx(1.3).epsilon(1e-15));
  CHECK(t.scalar_value(hinge(t, 1.0, t.scalar(0.4), t.scalar(0.4))) == 1.0);
  CHECK(t.scalar_value(hinge(t, 1.0, t.scalar(3.0), t.scalar(0.5))) == 0.0);
}

TEST_CASE("score_query on a hand-set two-dimensional model") {
  ModelDims dims;
  dims.num_entities = 3;
  dims.num_relations = 1;
  dims.num_concepts = 1;
  dims.dim = 2;
  dims.time_dim = 2;
  auto params = allocate_params(dims);
  params.entity.values = {1, 2, 5, 6, -1, 0.5};
  params.relation.values = {3, 4, 0, 0};
  const auto concepts = region_only_concepts(3);
  ForwardConfig fwd;
  fwd.concepts = ConceptVariant::none;
  Tape tape;
  FiltGraph g(tape, params, concepts, fwd, 0);
  Var enc = tape.constant({1, 2});
  // Owner 2 as subject: s = encoded, o = entity 1.
  const Quadruple q{2, 0, 1, 0};
  CHECK(tape.scalar_value(score_query(g, q, 2, enc)) == 35.0);
  // Owner 2 as object: s = entity 1, o = encoded.
  const Quadruple p{1, 0, 2, 0};
  const double flipped = tape.scalar_value(score_query(g, p, 2, enc));
  CHECK(flipped == oracle_score({5, 6}, {3, 4}, {1, 2}));
  CHECK(flipped != 35.0);
  CHECK(tape.scalar_value(score_query(g, q, 2, enc)) == tape.scalar_value(score_query(g, q, 2, enc)));
}

TEST_CASE("episode loss is the sum of non-negative hinge terms") {
  auto fx = make_toy_fixture(EncoderKind::filt, ConceptVariant::full);
  std::size_t num_queries = 0, num_pairs = 0;
  for (std::size_t i = 0; i < fx.task.entities.size(); ++i) {
    num_queries += fx.task.entities[i].query.size();
    for (const auto& negs : fx.negatives[i]) num_pairs += negs.size();
  }
  Tape t;
  FiltGraph g(t, fx.params, fx.concepts, fx.forward, fx.dropout_seed);
  std::vector<Var> terms;
  Var loss = episode_loss(g, fx.task, fx.negatives, LossConfig{2.0, false}, &terms);
  CHECK(terms.size() == num_pairs);
  double total = 0.0;
  for (Var v : terms) {
    CHECK(t.scalar_value(v) >= 0.0);
    total += t.scalar_value(v);
  }
  CHECK(t.scalar_value(loss) == doctest::Approx(total).epsilon(1e-14));

  Tape t2;
  FiltGraph g2(t2, fx.params, fx.concepts, fx.forward, fx.dropout_seed);
  Var norm = episode_loss(g2, fx.task, fx.negatives, LossConfig{2.0, true});
  CHECK(t2.scalar_value(norm) == doctest::Approx(total / static_cast<double>(num_queries)));

  CHECK_THROWS_AS(episode_loss(g2, fx.task, fx.negatives, LossConfig{0.0, false}), ArgumentError);
}

TEST_CASE("a negative equal to the positive costs exactly the margin") {
  auto fx = make_toy_fixture(EncoderKind::rgcn, ConceptVariant::none);
  fx.forward.train = false;
  for (std::size_t i = 0; i < fx.task.entities.size(); ++i) {
    const auto& ep = fx.task.entities[i];
    for (std::size_t j = 0; j < ep.query.size(); ++j) {
      for (auto& n : fx.negatives[i][j]) n.corrupted_entity = other_entity(ep.query[j], ep.entity);
    }
  }
  Tape t;
  FiltGraph g(t, fx.params, fx.concepts, fx.forward, 0);
  std::vector<Var> terms;
  episode_loss(g, fx.task, fx.negatives, LossConfig{1.0, false}, &terms);
  for (Var v : terms) CHECK(t.scalar_value(v) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("query relation orientation") {
  CHECK(oriented_query_relation({4, 1, 9, 0}, 4, 10) == 11);
  CHECK(oriented_query_relation({4, 1, 9, 0}, 9, 10) == 1);
  CHECK(other_entity({4, 1, 9, 0}, 4) == 9);
  CHECK(other_entity({4, 1, 9, 0}, 9) == 4);
}
