#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "filt/checkpoint.hpp"
#include "support/fixture.hpp"

using namespace filt;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

ModelParams cycle_model(std::uint64_t seed) {
  ModelDims dims;
  dims.num_entities = 3;
  dims.num_relations = 1;
  dims.num_concepts = 1;
  dims.dim = 8;
  dims.time_dim = 2;
  return init_params(dims, seed);
}

// Mean hinge violation over every object corruption of the training triples.
double mean_violation(const ModelParams& p, const std::vector<Quadruple>& facts, double margin) {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& q : facts) {
    const double pos = complex_score_value(p.entity.row(q.subject), p.relation.row(q.relation),
                                           p.entity.row(q.object));
    for (EntityId e = 0; e < p.dims.num_entities; ++e) {
      if (e == q.object) continue;
      const double neg = complex_score_value(p.entity.row(q.subject), p.relation.row(q.relation),
                                             p.entity.row(e));
      total += std::max(0.0, margin - pos + neg);
      ++n;
    }
  }
  return total / static_cast<double>(n);
}

TrainConfig small_config() {
  TrainConfig c;
  c.d = 16;
  c.d_t = 4;
  c.K = 3;
  c.N = 5;
  c.negatives = 8;
  c.dropout = 0.1;
  c.lr = 0.005;
  c.batches = 40;
  c.eval_every = 20;
  c.pretrain_epochs = 5;
  return c;
}

}  // namespace

TEST_CASE("config files parse and validate") {
  std::istringstream in("# comment\nd = 32\nN=7  # trailing\n\nencoder = attention\nfreeze_delta = true\n");
  const auto c = parse_train_config(in, {}, "mem");
  CHECK(c.d == 32);
  CHECK(c.N == 7);
  CHECK(c.encoder == EncoderKind::attention);
  CHECK(c.freeze_delta);
  CHECK(c.K == 3);

  std::istringstream bad("d = 32\nbogus = 1\n");
  try {
    parse_train_config(bad, {}, "mem");
    FAIL("unknown key accepted");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("mem:2") != std::string::npos);
  }
  std::istringstream noeq("d 32\n");
  CHECK_THROWS_AS(parse_train_config(noeq, {}, "mem"), ParseError);

  TrainConfig v;
  v.d = 7;
  CHECK_THROWS_AS(v.validate(), ArgumentError);
  v = {};
  v.lambda = 0.0;
  CHECK_THROWS_AS(v.validate(), ArgumentError);
  v = {};
  v.K = 0;
  CHECK_THROWS_AS(v.validate(), ArgumentError);
  TrainConfig{}.validate();

  // Text form round-trips.
  TrainConfig w;
  w.lr = 0.0123;
  w.concepts = ConceptVariant::no_lower;
  std::istringstream text(config_to_text(w));
  const auto back = parse_train_config(text);
  CHECK(back.lr == w.lr);
  CHECK(back.concepts == ConceptVariant::no_lower);
  CHECK(config_to_json(back) == config_to_json(w));
}

TEST_CASE("shipped configs") {
  const std::filesystem::path dir = std::filesystem::path(FILT_SOURCE_DIR) / "configs";
  const auto c14 = load_train_config(dir / "icews14_oog.conf");
  const auto c18 = load_train_config(dir / "icews18_oog.conf");
  CHECK(c14.N == 100);
  CHECK(c18.N == 200);
  CHECK(c14.d == 100);
  CHECK(c14.negatives == 32);
  CHECK(c18.batches == 15000);
  load_train_config(dir / "synthetic.conf").validate();
}

TEST_CASE("pre-training on a 3-entity cycle reduces the margin violation") {
  const std::vector<Quadruple> cycle{{0, 0, 1, 0}, {1, 0, 2, 0}, {2, 0, 0, 0}};
  TrainConfig c;
  c.pretrain_epochs = 200;
  c.pretrain_lr = 0.05;
  c.negatives = 4;
  auto p = cycle_model(3);
  const double before = mean_violation(p, cycle, c.margin);
  const auto report = pretrain_background(p, cycle, {false, false, false}, c);
  const double after = mean_violation(p, cycle, c.margin);
  CHECK(report.epoch_loss.size() == 200);
  CHECK(after < before);
  CHECK(report.epoch_loss.back() < report.epoch_loss.front());
}

TEST_CASE("zero epochs leave the embeddings unchanged") {
  const std::vector<Quadruple> cycle{{0, 0, 1, 0}, {1, 0, 2, 0}, {2, 0, 0, 0}};
  TrainConfig c;
  c.pretrain_epochs = 0;
  auto p = cycle_model(3);
  const auto initial = p.entity.values;
  pretrain_background(p, cycle, {false, false, false}, c);
  CHECK(p.entity.values == initial);
}

TEST_CASE("pre-training is byte-deterministic and respects unseen entities") {
  const auto data = testing::synthetic_data();
  TrainConfig c = small_config();
  c.pretrain_epochs = 2;
  const auto dims = model_dims(data.splits, data.concepts, c);
  const auto unseen = unseen_entities(data.splits);

  auto a = init_params(dims, c.model_seed);
  auto b = init_params(dims, c.model_seed);
  const auto before = a.entity.values;
  pretrain_background(a, data.splits.background, unseen, c);
  pretrain_background(b, data.splits.background, unseen, c);
  const auto dir = std::filesystem::temp_directory_path() / "filt_test_pretrain";
  std::filesystem::create_directories(dir);
  save_checkpoint(a, {dims, {}}, dir / "a.ckpt");
  save_checkpoint(b, {dims, {}}, dir / "b.ckpt");
  CHECK(slurp(dir / "a.ckpt") == slurp(dir / "b.ckpt"));
  std::filesystem::remove_all(dir);

  const std::size_t d = dims.dim;
  std::size_t checked = 0;
  for (EntityId e = 0; e < dims.num_entities; ++e) {
    if (!unseen[e]) continue;
    for (std::size_t k = 0; k < d; ++k) CHECK(a.entity.values[e * d + k] == before[e * d + k]);
    ++checked;
  }
  CHECK(checked == data.splits.unseen_train.size() + data.splits.unseen_valid.size() +
                       data.splits.unseen_test.size());

  auto polluted = data.splits.background;
  polluted.push_back({data.splits.unseen_test[0], 0, 0, 0});
  CHECK_THROWS_AS(pretrain_background(a, polluted, unseen, c), ArgumentError);
}

TEST_CASE("concept initialization keeps rows of concepts without background members") {
  const auto data = testing::synthetic_data();
  TrainConfig c = small_config();
  const auto dims = model_dims(data.splits, data.concepts, c);
  auto p = init_params(dims, 1);
  const auto original = p.concept_emb.values;
  // Sector000 loses every contributor.
  auto contributes = background_entities(data.splits);
  const auto members = data.concepts.members();
  const ConceptId hidden = *data.concepts.concepts.find("Sector000");
  for (EntityId e : members[hidden]) contributes[e] = false;
  initialize_concepts(p, data.concepts, contributes);
  const std::size_t d = dims.dim;
  for (std::size_t k = 0; k < d; ++k) CHECK(p.concept_emb.values[hidden * d + k] == original[hidden * d + k]);
  for (double v : p.concept_emb.values) CHECK(std::isfinite(v));
  CHECK(p.concept_emb.values != original);
}

TEST_CASE("meta-training improves, keeps the best snapshot and is deterministic") {
  const auto data = testing::synthetic_data();
  TrainConfig c = small_config();
  const auto params = testing::prepared_params(data, c);
  const FilterIndex filter(data.splits.all_known());

  auto untrained = params;
  untrained.delta1.values[0] = c.delta_init;
  untrained.delta2.values[0] = c.delta_init;
  const double before =
      evaluate_meta_set(untrained, data.concepts, data.splits, MetaSet::valid, c.K, c.data_seed, c, filter)
          .metrics.mrr;

  std::size_t calls = 0;
  const auto r1 = meta_train(params, data.splits, data.concepts, c, [&](const TrainLogRow&) { ++calls; });
  CHECK(calls == c.batches);
  CHECK(r1.log.size() == c.batches);
  REQUIRE(r1.evaluations.size() == 2);
  double best = -1.0;
  for (const auto& [batch, mrr] : r1.evaluations) best = std::max(best, mrr);
  CHECK(r1.best_valid_mrr == best);
  CHECK(r1.best_valid_mrr > before);

  auto best_params = r1.best;
  const double again =
      evaluate_meta_set(best_params, data.concepts, data.splits, MetaSet::valid, c.K, c.data_seed, c, filter)
          .metrics.mrr;
  CHECK(again == r1.best_valid_mrr);

  const auto r2 = meta_train(params, data.splits, data.concepts, c);
  CHECK(r2.best.entity.values == r1.best.entity.values);
  CHECK(r2.best.w_g.values == r1.best.w_g.values);
  for (std::size_t i = 0; i < r1.log.size(); ++i) CHECK(r1.log[i].loss == r2.log[i].loss);
}

TEST_CASE("frozen deltas stay at their initial value") {
  const auto data = testing::synthetic_data();
  TrainConfig c = small_config();
  c.batches = 5;
  c.delta_init = 0.0;
  c.freeze_delta = true;
  const auto r = meta_train(testing::prepared_params(data, c), data.splits, data.concepts, c);
  CHECK(r.best.delta1.values[0] == 0.0);
  CHECK(r.best.delta2.values[0] == 0.0);
}

TEST_CASE("non-finite loss is reported with the episode") {
  const auto data = testing::synthetic_data();
  TrainConfig c = small_config();
  c.batches = 3;
  auto p = testing::prepared_params(data, c);
  for (auto& v : p.entity.values) v = std::nan("");
  try {
    meta_train(p, data.splits, data.concepts, c);
    FAIL("NaN parameters trained without error");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("episode") != std::string::npos);
  }
}

TEST_CASE("training log csv") {
  const auto path = std::filesystem::temp_directory_path() / "filt_test_log.csv";
  write_train_log(path, {{1, 2.5, std::nan(""), 0.1}, {2, 2.0, 0.25, 0.2}});
  const auto text = slurp(path);
  CHECK(text.rfind("batch,loss,valid_mrr,wall_clock\n", 0) == 0);
  CHECK(text.find("\n2,") != std::string::npos);
  std::filesystem::remove(path);
}
