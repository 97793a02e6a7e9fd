#include "filt/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "filt/concepts.hpp"
#include "filt/episodes.hpp"
#include "filt/scoring.hpp"

namespace filt {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long x = 0;
  try {
    if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
    x = std::stoull(v, &pos);
  } catch (const std::exception&) {
    throw ArgumentError("'" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  if (pos != v.size()) throw ArgumentError("'" + key + "' expects an integer, got '" + v + "'");
  return static_cast<std::size_t>(x);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ArgumentError("'" + key + "' expects a number, got '" + v + "'");
  }
  if (pos != v.size()) throw ArgumentError("'" + key + "' expects a number, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ArgumentError("'" + key + "' expects true/false, got '" + v + "'");
}

std::string_view optimizer_name(OptimizerKind k) { return k == OptimizerKind::adam ? "adam" : "sgd"; }

OptimizerKind parse_optimizer(const std::string& v) {
  if (v == "adam" || v == "Adam") return OptimizerKind::adam;
  if (v == "sgd" || v == "SGD") return OptimizerKind::sgd;
  throw ArgumentError("unknown optimizer '" + v + "'");
}

std::string format_double(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lambda > 0.0)) throw ArgumentError("lambda must be > 0");
  if (K < 1) throw ArgumentError("K must be >= 1");
  if (N < 1) throw ArgumentError("N must be >= 1");
  if (batches < 1) throw ArgumentError("batches must be >= 1");
  if (d == 0 || d % 2 != 0) throw ArgumentError("d must be a positive even number");
  if (d_t == 0) throw ArgumentError("d_t must be >= 1");
  if (negatives < 1) throw ArgumentError("negatives must be >= 1");
  if (!(margin > 0.0)) throw ArgumentError("margin must be > 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ArgumentError("dropout must be in [0, 1)");
  if (!(lr > 0.0)) throw ArgumentError("lr must be > 0");
  if (!(pretrain_lr > 0.0)) throw ArgumentError("pretrain_lr must be > 0");
  if (pretrain_batch < 1) throw ArgumentError("pretrain_batch must be >= 1");
  if (eval_every < 1) throw ArgumentError("eval_every must be >= 1");
}

ForwardConfig TrainConfig::forward(bool train) const {
  ForwardConfig f;
  f.concepts = concepts;
  f.lambda = lambda;
  f.dropout = dropout;
  f.activation = activation;
  f.train = train;
  return f;
}

void apply_setting(TrainConfig& c, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "d") c.d = to_size(key, v);
  else if (key == "d_t") c.d_t = to_size(key, v);
  else if (key == "K") c.K = to_size(key, v);
  else if (key == "N") c.N = to_size(key, v);
  else if (key == "negatives") c.negatives = to_size(key, v);
  else if (key == "margin") c.margin = to_double(key, v);
  else if (key == "lambda") c.lambda = to_double(key, v);
  else if (key == "dropout") c.dropout = to_double(key, v);
  else if (key == "activation") c.activation = parse_activation(v);
  else if (key == "encoder") c.encoder = parse_encoder(v);
  else if (key == "concepts") c.concepts = parse_concept_variant(v);
  else if (key == "optimizer") c.optimizer = parse_optimizer(v);
  else if (key == "lr") c.lr = to_double(key, v);
  else if (key == "batches") c.batches = to_size(key, v);
  else if (key == "eval_every") c.eval_every = to_size(key, v);
  else if (key == "data_seed") c.data_seed = to_size(key, v);
  else if (key == "model_seed") c.model_seed = to_size(key, v);
  else if (key == "episode_seed") c.episode_seed = to_size(key, v);
  else if (key == "pretrain_epochs") c.pretrain_epochs = to_size(key, v);
  else if (key == "pretrain_lr") c.pretrain_lr = to_double(key, v);
  else if (key == "pretrain_batch") c.pretrain_batch = to_size(key, v);
  else if (key == "normalize_loss") c.normalize_loss = to_bool(key, v);
  else if (key == "delta_init") c.delta_init = to_double(key, v);
  else if (key == "freeze_delta") c.freeze_delta = to_bool(key, v);
  else if (key == "workers") c.workers = to_size(key, v);
  else throw ArgumentError("unknown config key '" + key + "'");
}

TrainConfig parse_train_config(std::istream& in, TrainConfig base, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    try {
      apply_setting(base, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ArgumentError& e) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

TrainConfig load_train_config(const std::filesystem::path& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  return parse_train_config(in, base, path.string());
}

nlohmann::json config_to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["d"] = c.d;
  j["d_t"] = c.d_t;
  j["K"] = c.K;
  j["N"] = c.N;
  j["negatives"] = c.negatives;
  j["margin"] = c.margin;
  j["lambda"] = c.lambda;
  j["dropout"] = c.dropout;
  j["activation"] = std::string(to_string(c.activation));
  j["encoder"] = std::string(to_string(c.encoder));
  j["concepts"] = std::string(to_string(c.concepts));
  j["optimizer"] = std::string(optimizer_name(c.optimizer));
  j["lr"] = c.lr;
  j["batches"] = c.batches;
  j["eval_every"] = c.eval_every;
  j["data_seed"] = c.data_seed;
  j["model_seed"] = c.model_seed;
  j["episode_seed"] = c.episode_seed;
  j["pretrain_epochs"] = c.pretrain_epochs;
  j["pretrain_lr"] = c.pretrain_lr;
  j["pretrain_batch"] = c.pretrain_batch;
  j["normalize_loss"] = c.normalize_loss;
  j["delta_init"] = c.delta_init;
  j["freeze_delta"] = c.freeze_delta;
  j["workers"] = c.workers;
  return nlohmann::json::parse(j.dump());
}

std::string config_to_text(const TrainConfig& c) {
  std::ostringstream out;
  out << "d = " << c.d << "\n"
      << "d_t = " << c.d_t << "\n"
      << "K = " << c.K << "\n"
      << "N = " << c.N << "\n"
      << "negatives = " << c.negatives << "\n"
      << "margin = " << format_double(c.margin) << "\n"
      << "lambda = " << format_double(c.lambda) << "\n"
      << "dropout = " << format_double(c.dropout) << "\n"
      << "activation = " << to_string(c.activation) << "\n"
      << "encoder = " << to_string(c.encoder) << "\n"
      << "concepts = " << to_string(c.concepts) << "\n"
      << "optimizer = " << optimizer_name(c.optimizer) << "\n"
      << "lr = " << format_double(c.lr) << "\n"
      << "batches = " << c.batches << "\n"
      << "eval_every = " << c.eval_every << "\n"
      << "data_seed = " << c.data_seed << "\n"
      << "model_seed = " << c.model_seed << "\n"
      << "episode_seed = " << c.episode_seed << "\n"
      << "pretrain_epochs = " << c.pretrain_epochs << "\n"
      << "pretrain_lr = " << format_double(c.pretrain_lr) << "\n"
      << "pretrain_batch = " << c.pretrain_batch << "\n"
      << "normalize_loss = " << (c.normalize_loss ? "true" : "false") << "\n"
      << "delta_init = " << format_double(c.delta_init) << "\n"
      << "freeze_delta = " << (c.freeze_delta ? "true" : "false") << "\n"
      << "workers = " << c.workers << "\n";
  return out.str();
}

ModelDims model_dims(const DatasetSplits& splits, const ConceptMap& concepts,
                     const TrainConfig& config) {
  ModelDims dims;
  dims.num_entities = splits.entities.size();
  dims.num_relations = splits.relations.size();
  dims.num_concepts = concepts.concepts.size();
  dims.dim = config.d;
  dims.time_dim = config.d_t;
  dims.encoder = config.encoder;
  return dims;
}

ModelParams prepare_meta_params(const ModelParams& pretrained, const ModelDims& dims,
                                std::uint64_t seed) {
  ModelParams params = init_params(dims, seed);
  if (pretrained.entity.shape != params.entity.shape ||
      pretrained.relation.shape != params.relation.shape) {
    throw ShapeError("pretrained tables " + shape_string(pretrained.entity.shape) + " / " +
                     shape_string(pretrained.relation.shape) + " do not match the model " +
                     shape_string(params.entity.shape) + " / " + shape_string(params.relation.shape));
  }
  params.entity.values = pretrained.entity.values;
  params.relation.values = pretrained.relation.values;
  return params;
}

std::vector<bool> unseen_entities(const DatasetSplits& splits) {
  std::vector<bool> out(splits.entities.size(), false);
  for (MetaSet set : {MetaSet::train, MetaSet::valid, MetaSet::test}) {
    for (EntityId e : splits.unseen(set)) out.at(e) = true;
  }
  return out;
}

std::vector<bool> background_entities(const DatasetSplits& splits) {
  std::vector<bool> seen(splits.entities.size(), false);
  for (const auto& q : splits.background) {
    seen.at(q.subject) = true;
    seen.at(q.object) = true;
  }
  return seen;
}

PretrainReport pretrain_background(ModelParams& params, const std::vector<Quadruple>& background,
                                   const std::vector<bool>& unseen, const TrainConfig& config) {
  if (background.empty()) throw ArgumentError("background graph is empty");
  config.validate();
  const std::size_t num_entities = params.dims.num_entities;
  std::vector<bool> in_background(num_entities, false);
  for (const auto& q : background) {
    if (q.subject >= num_entities || q.object >= num_entities ||
        q.relation >= params.dims.num_relations) {
      throw ArgumentError("background quadruple outside the model vocabulary");
    }
    for (EntityId e : {q.subject, q.object}) {
      if (e < unseen.size() && unseen[e]) {
        throw ArgumentError("background mentions unseen entity " + std::to_string(e));
      }
      in_background[e] = true;
    }
  }
  std::vector<EntityId> pool;
  for (EntityId e = 0; e < num_entities; ++e) {
    if (in_background[e]) pool.push_back(e);
  }

  PretrainReport report;
  OptimizerConfig oc;
  oc.kind = config.optimizer;
  oc.lr = config.pretrain_lr;
  Optimizer opt(oc);
  std::vector<ParamTensor*> tensors{&params.entity, &params.relation};
  Rng rng(mix_seed(config.model_seed, 0x9e7));
  std::vector<std::size_t> order(background.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 0; epoch < config.pretrain_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.pretrain_batch) {
      const std::size_t end = std::min(order.size(), start + config.pretrain_batch);
      Tape t;
      std::vector<Var> terms;
      for (std::size_t i = start; i < end; ++i) {
        const Quadruple& q = background[order[i]];
        Var s = t.param_row(params.entity, q.subject);
        Var r = t.param_row(params.relation, q.relation);
        Var o = t.param_row(params.entity, q.object);
        Var pos = complex_score(t, s, r, o);
        const bool corrupt_object = rng.uniform01() < 0.5;
        for (const auto& neg : sample_negatives(q, corrupt_object, config.negatives, pool, nullptr, rng)) {
          Var c = t.param_row(params.entity, neg.corrupted_entity);
          Var score = corrupt_object ? complex_score(t, s, r, c) : complex_score(t, c, r, o);
          terms.push_back(hinge(t, config.margin, pos, score));
        }
      }
      Var loss = sum(t, terms);
      const double value = t.scalar_value(loss);
      if (!std::isfinite(value)) {
        throw NumericError("non-finite pre-training loss at epoch " + std::to_string(epoch));
      }
      total += value;
      t.backward(loss);
      opt.step(tensors);
    }
    report.epoch_loss.push_back(total);
  }
  return report;
}

void initialize_concepts(ModelParams& params, const ConceptMap& concepts,
                         const std::vector<bool>& contributes) {
  const std::size_t d = params.dims.dim;
  TableView entity{params.entity.values, d};
  auto init = init_concepts(entity, concepts, contributes, true);
  auto corrected = correct_concepts(TableView{init.embeddings, d}, entity, concepts, contributes);
  for (ConceptId c : init.empty) {
    const auto row = params.concept_emb.row(c);
    std::copy(row.begin(), row.end(), corrected.begin() + static_cast<std::ptrdiff_t>(c * d));
  }
  params.concept_emb.values = std::move(corrected);
}

EpisodeTask make_eval_episode(const DatasetSplits& splits, MetaSet set, std::size_t shots,
                              std::uint64_t seed) {
  if (shots == 0) {
    const std::vector<std::size_t> choices{1, 3, 5};
    return build_random_shot_episode(splits.meta(set), splits.unseen(set), choices, seed);
  }
  return build_eval_episode(splits.meta(set), splits.unseen(set), shots, seed);
}

EvalResult evaluate_meta_set(ModelParams& params, const ConceptMap& concepts,
                             const DatasetSplits& splits, MetaSet set, std::size_t shots,
                             std::uint64_t seed, const TrainConfig& config,
                             const FilterIndex& filter) {
  const EpisodeTask episode = make_eval_episode(splits, set, shots, seed);
  EvalConfig ec;
  ec.forward = config.forward(false);
  ec.workers = config.workers;
  const auto candidates = all_entities(params.dims.num_entities);
  return evaluate(params, concepts, episode, candidates, filter, ec);
}

MetaTrainResult meta_train(ModelParams params, const DatasetSplits& splits,
                           const ConceptMap& concepts, const TrainConfig& config,
                           const ProgressFn& progress) {
  config.validate();
  const auto clock_start = std::chrono::steady_clock::now();
  params.delta1.values[0] = config.delta_init;
  params.delta2.values[0] = config.delta_init;

  const MetaSetIndex index(splits.meta_train, splits.unseen_train);
  const std::vector<EntityId> pool = all_entities(splits.entities.size());

  const FilterIndex filter(splits.all_known());
  const EpisodeTask valid_episode =
      build_eval_episode(splits.meta_valid, splits.unseen_valid, config.K, config.data_seed);
  const bool can_validate = valid_episode.num_queries() > 0;
  const auto candidates = all_entities(params.dims.num_entities);
  EvalConfig ec;
  ec.forward = config.forward(false);
  ec.workers = config.workers;

  OptimizerConfig oc;
  oc.kind = config.optimizer;
  oc.lr = config.lr;
  Optimizer opt(oc);
  const auto tensors = params.tensors();
  std::vector<std::string> frozen;
  if (config.freeze_delta) frozen = {params.delta1.name, params.delta2.name};
  LossConfig lc{config.margin, config.normalize_loss};

  MetaTrainResult result;
  result.best = params;
  for (std::size_t batch = 1; batch <= config.batches; ++batch) {
    const EpisodeTask task = sample_task(index, config.N, config.K, mix_seed(config.episode_seed, batch));
    Rng neg_rng(mix_seed(mix_seed(config.episode_seed, batch), 1));
    const EpisodeNegatives negatives = draw_episode_negatives(task, pool, config.negatives, neg_rng);

    Tape tape;
    FiltGraph graph(tape, params, concepts, config.forward(true),
                    mix_seed(mix_seed(config.episode_seed, batch), 2));
    Var loss = episode_loss(graph, task, negatives, lc);
    const double value = tape.scalar_value(loss);
    if (!std::isfinite(value)) {
      throw NumericError("non-finite loss at batch " + std::to_string(batch) +
                         "; episode: " + episode_to_json(task));
    }
    tape.backward(loss);
    for (ParamTensor* t : tensors) {
      if (!all_finite(t->grad)) {
        throw NumericError("non-finite gradient in '" + t->name + "' at batch " + std::to_string(batch) +
                           "; episode: " + episode_to_json(task));
      }
    }
    opt.step(tensors, frozen);

    TrainLogRow row;
    row.batch = batch;
    row.loss = value;
    row.valid_mrr = std::numeric_limits<double>::quiet_NaN();
    if (can_validate && (batch % config.eval_every == 0 || batch == config.batches)) {
      const double mrr = evaluate(params, concepts, valid_episode, candidates, filter, ec).metrics.mrr;
      row.valid_mrr = mrr;
      result.evaluations.emplace_back(batch, mrr);
      if (mrr > result.best_valid_mrr) {
        result.best_valid_mrr = mrr;
        result.best_batch = batch;
        result.best = params;
      }
    }
    row.wall_clock =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
    result.log.push_back(row);
    if (progress) progress(row);
  }
  if (!can_validate) {
    result.best = params;
    result.best_batch = config.batches;
  }
  return result;
}

void write_train_log(const std::filesystem::path& path, const std::vector<TrainLogRow>& log) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "batch,loss,valid_mrr,wall_clock\n";
  out << std::setprecision(10);
  for (const auto& r : log) {
    out << r.batch << ',' << r.loss << ',';
    if (!std::isnan(r.valid_mrr)) out << r.valid_mrr;
    out << ',' << r.wall_clock << '\n';
  }
}

}  // namespace filt
