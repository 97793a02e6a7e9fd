#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "filt/encoders.hpp"

using namespace filt;

namespace {

std::vector<double> values(const Tape& t, Var v) {
  const auto s = t.value(v);
  return {s.begin(), s.end()};
}

Var identity(Tape& t, std::size_t n) {
  std::vector<double> m(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) m[i * n + i] = 1.0;
  return t.constant(m, n, n);
}

}  // namespace

TEST_CASE("time-difference weights") {
  SUBCASE("hand-computed pair") {
    const std::vector<TimeId> times{4, 1};
    const auto g = filt_time_weights(times, 5, 0.2);
    const long double a = std::exp(1.0L), b = std::exp(0.25L);
    CHECK(std::abs(g[0] - static_cast<double>(a / (a + b))) < 1e-15);
    CHECK(std::abs(g[1] - static_cast<double>(b / (a + b))) < 1e-15);
    CHECK(g[0] == doctest::Approx(0.6792).epsilon(1e-4));
  }
  SUBCASE("single neighbor and equal gaps") {
    CHECK(filt_time_weights(std::vector<TimeId>{9}, 2, 0.2) == std::vector<double>{1.0});
    const auto g = filt_time_weights(std::vector<TimeId>{3, 7, 3, 7}, 5, 0.2);
    for (double v : g) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("lambda at zero difference") {
    const auto g = filt_time_weights(std::vector<TimeId>{5, 6}, 5, 0.2);
    const double e1 = std::exp(1.0);
    CHECK(g[0] == doctest::Approx(0.2 / (0.2 + e1)).epsilon(1e-14));
    CHECK(g[1] == doctest::Approx(e1 / (0.2 + e1)).epsilon(1e-14));
  }
  SUBCASE("symmetric in the sign of the difference and shift invariant") {
    const auto a = filt_time_weights(std::vector<TimeId>{3, 8, 10}, 6, 0.5);
    const auto b = filt_time_weights(std::vector<TimeId>{13, 18, 20}, 16, 0.5);
    CHECK(a == b);
    const auto c = filt_time_weights(std::vector<TimeId>{4, 9}, 6, 0.5);
    const auto d = filt_time_weights(std::vector<TimeId>{8, 3}, 6, 0.5);
    CHECK(c[0] == doctest::Approx(d[0]));
  }
  SUBCASE("bad inputs") {
    CHECK_THROWS_AS(filt_time_weights(std::vector<TimeId>{}, 0, 0.2), ArgumentError);
    CHECK_THROWS_AS(filt_time_weights(std::vector<TimeId>{1}, 0, 0.0), ArgumentError);
  }
}

TEST_CASE("neighborhoods orient the owner as object") {
  const std::vector<Quadruple> support{{1, 2, 7, 3}, {7, 0, 4, 5}};
  const auto n = make_neighborhood(7, support, 10, 9, 1);
  REQUIRE(n.neighbors.size() == 2);
  CHECK(n.neighbors[0].entity == 1);
  CHECK(n.neighbors[0].relation == 2);
  CHECK(n.neighbors[1].entity == 4);
  CHECK(n.neighbors[1].relation == 10);
  CHECK(n.neighbors[1].time == 5);
  const std::vector<Quadruple> foreign{{1, 2, 3, 3}};
  CHECK_THROWS_AS(make_neighborhood(7, foreign, 10), ArgumentError);
}

TEST_CASE("filt encoder with one neighbor is the message") {
  Tape t;
  Var w = t.constant({1, 0, 2, 0, 0, 1, 0, 3}, 2, 4);
  std::vector<Var> ents{t.constant({0.5, -1})};
  std::vector<Var> rels{t.constant({2, 1})};
  const std::vector<TimeId> times{3};
  const auto out = values(t, encode_filt(t, ents, rels, times, w, 8, 0.2));
  CHECK(out[0] == doctest::Approx(0.5 + 4.0));
  CHECK(out[1] == doctest::Approx(-1.0 + 3.0));
}

TEST_CASE("filt encoder weights messages by time difference") {
  Tape t;
  // With W_g = [I 0] shape 2x4 the message is the entity vector.
  Var wg = t.constant({1, 0, 0, 0, 0, 1, 0, 0}, 2, 4);
  std::vector<Var> ents{t.constant({1, 0}), t.constant({0, 1})};
  std::vector<Var> rels{t.constant({0, 0}), t.constant({0, 0})};
  const std::vector<TimeId> times{4, 1};
  const auto out = values(t, encode_filt(t, ents, rels, times, wg, 5, 0.2));
  const auto g = filt_time_weights(times, 5, 0.2);
  CHECK(out[0] == doctest::Approx(g[0]).epsilon(1e-15));
  CHECK(out[1] == doctest::Approx(g[1]).epsilon(1e-15));
}

TEST_CASE("rgcn mean") {
  Tape t;
  Var eye = identity(t, 2);
  std::vector<Var> one{t.constant({3, -1})};
  std::vector<Var> mats1{eye};
  CHECK(values(t, encode_rgcn_mean(t, one, mats1)) == std::vector<double>{3, -1});
  std::vector<Var> two{t.constant({3, -1}), t.constant({3, -1})};
  std::vector<Var> mats2{eye, eye};
  CHECK(values(t, encode_rgcn_mean(t, two, mats2)) == std::vector<double>{3, -1});
  std::vector<Var> diff{t.constant({1, 2}), t.constant({3, -4})};
  CHECK(values(t, encode_rgcn_mean(t, diff, mats2)) == std::vector<double>{2, -1});
}

TEST_CASE("time2vec features") {
  Tape t;
  const auto phi = values(t, time2vec(t, t.constant({1, 0.5}), t.constant({0, 0}), 2.0));
  CHECK(phi[0] == 2.0);
  CHECK(phi[1] == doctest::Approx(std::sin(1.0)).epsilon(1e-15));
  CHECK(std::abs(phi[1] - 0.841471) < 1e-6);
  const auto zero = values(t, time2vec(t, t.constant({0, 0, 0}), t.constant({0, 0, 0}), 17.0));
  for (double v : zero) CHECK(v == 0.0);
  const auto pi = values(t, time2vec(t, t.constant({1, std::numbers::pi}), t.constant({0, 0}), 1.0));
  CHECK(std::abs(pi[1]) < 1e-12);
}

TEST_CASE("cosine time features") {
  Tape t;
  const auto at0 = values(t, functional_time(t, t.constant({3, 5, 7, 9}), t.constant({0, 0, 0, 0}), 0.0));
  for (double v : at0) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));
  const auto two = values(t, functional_time(t, t.constant({1, 2}), t.constant({0, 0}), 1.0));
  CHECK(two[0] == doctest::Approx(std::sqrt(0.5) * std::cos(1.0)).epsilon(1e-15));
  CHECK(two[1] == doctest::Approx(std::sqrt(0.5) * std::cos(2.0)).epsilon(1e-15));
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> w(6), p(6);
    for (auto& v : w) v = rng.uniform(-3, 3);
    for (auto& v : p) v = rng.uniform(-3, 3);
    const auto f = values(t, functional_time(t, t.constant(w), t.constant(p), rng.uniform(0, 100)));
    CHECK(std::inner_product(f.begin(), f.end(), f.begin(), 0.0) <= 1.0 + 1e-12);
  }
}

TEST_CASE("time-blind time2vec encoder equals itself across times") {
  Tape t;
  Var wg = t.constant({1, 0, 0, 0, 0, 1, 0, 0}, 2, 4);
  Var wf = t.constant({1, 0, 5, 5, 0, 1, 5, 5}, 2, 4);
  Var bf = t.constant({0, 0});
  std::vector<Var> ents{t.constant({0.5, 1})};
  std::vector<Var> rels{t.constant({0, 0})};
  Var freq = t.constant({0, 0});
  Var phase = t.constant({0, 0});
  const auto a = values(t, encode_time2vec(t, ents, rels, std::vector<TimeId>{2}, wg, wf, bf, freq, phase));
  const auto b = values(t, encode_time2vec(t, ents, rels, std::vector<TimeId>{40}, wg, wf, bf, freq, phase));
  CHECK(a == b);
  CHECK(a == std::vector<double>{0.5, 1});
}

TEST_CASE("functional encoder applies the leaky relu entity map") {
  Tape t;
  Var wg = t.constant({1, 0, 0, 0, 0, 1, 0, 0}, 2, 4);
  Var wf = t.constant({1, 0, 0, 0, 0, 1, 0, 0}, 2, 4);
  Var bf = t.constant({0.1, 0.0});
  std::vector<Var> ents{t.constant({0.5, -1}), t.constant({1.5, 1})};
  std::vector<Var> rels{t.constant({0, 0}), t.constant({0, 0})};
  const auto out = values(t, encode_functional_time(t, ents, rels, std::vector<TimeId>{1, 2}, wg, wf,
                                                    bf, t.constant({1, 1}), t.constant({0, 0})));
  CHECK(out[0] == doctest::Approx((0.6 + 1.6) / 2));
  CHECK(out[1] == doctest::Approx((-0.01 + 1.0) / 2));
}

TEST_CASE("attention weights") {
  Tape t;
  Var freq = t.constant({1.0, 0.5});
  Var phase = t.constant({0.0, 0.3});
  SUBCASE("single neighbor") {
    std::vector<Var> rels{t.constant({1, 2})};
    Var w = t.constant(std::vector<double>(8, 0.7), 2, 4);
    CHECK(values(t, attention_weights(t, rels, std::vector<TimeId>{3}, t.constant({0, 1}), 5, w, w,
                                      freq, phase)) == std::vector<double>{1.0});
  }
  SUBCASE("zero query matrix is uniform") {
    std::vector<Var> rels{t.constant({1, 2}), t.constant({-1, 0}), t.constant({4, 4})};
    Var wq = t.constant(std::vector<double>(8, 0.0), 2, 4);
    Var wk = t.constant({1, 2, 3, 4, 5, 6, 7, 8}, 2, 4);
    const auto g = values(t, attention_weights(t, rels, std::vector<TimeId>{1, 2, 3},
                                               t.constant({1, 1}), 9, wq, wk, freq, phase));
    for (double v : g) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("matches a direct evaluation") {
    const std::vector<double> wq{0.2, -0.1, 0.3, 0.5, 0.4, 0.1, -0.2, 0.3};
    const std::vector<double> wk{-0.3, 0.2, 0.1, 0.4, 0.6, -0.5, 0.2, 0.1};
    const std::vector<std::vector<double>> r{{0.5, -1.0}, {1.5, 0.25}};
    const std::vector<double> rq{1.0, 0.5};
    const std::vector<TimeId> times{2, 7};
    const TimeId tq = 4;
    auto feat = [](double time) {
      return std::vector<double>{std::sqrt(0.5) * std::cos(1.0 * time + 0.0),
                                 std::sqrt(0.5) * std::cos(0.5 * time + 0.3)};
    };
    auto apply = [](const std::vector<double>& m, const std::vector<double>& a,
                    const std::vector<double>& b) {
      std::vector<double> x(a);
      x.insert(x.end(), b.begin(), b.end());
      std::vector<double> y(2, 0.0);
      for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 4; ++j) y[i] += m[i * 4 + j] * x[j];
      return y;
    };
    const auto q = apply(wq, rq, feat(tq));
    std::vector<double> logits;
    for (std::size_t i = 0; i < 2; ++i) {
      const auto k = apply(wk, r[i], feat(times[i]));
      const double s = q[0] * k[0] + q[1] * k[1];
      logits.push_back(s > 0 ? s : 0.01 * s);
    }
    const double z = std::exp(logits[0]) + std::exp(logits[1]);
    std::vector<Var> rels{t.constant(r[0]), t.constant(r[1])};
    const auto g = values(t, attention_weights(t, rels, times, t.constant(rq), tq,
                                               t.constant(wq, 2, 4), t.constant(wk, 2, 4), freq, phase));
    CHECK(g[0] == doctest::Approx(std::exp(logits[0]) / z).epsilon(1e-14));
    CHECK(g[1] == doctest::Approx(std::exp(logits[1]) / z).epsilon(1e-14));
  }
}
