// filt: command line front end for dataset building, training and evaluation.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "filt/checkpoint.hpp"
#include "filt/synthetic.hpp"
#include "filt/toy.hpp"
#include "filt/trainer.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace filt;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fnv1a_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Manifest {
  std::string command;
  json config = json::object();
  json seeds = json::object();
  json inputs = json::object();
  json outputs = json::array();

  void input(const fs::path& p) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) inputs[f.string()] = fnv1a_file(f);
    } else {
      inputs[p.string()] = fnv1a_file(p);
    }
  }
  void output(const fs::path& p) { outputs.push_back(p.string()); }

  void write(const fs::path& path) const {
    json j;
    j["command"] = command;
    j["tool_version"] = kVersion;
    j["timestamp"] = utc_now();
    j["config"] = config;
    j["seeds"] = seeds;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
  }
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

struct Dataset {
  DatasetSplits splits;
  ConceptMap concepts;
};

Dataset load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("dataset directory not found: " + dir.string());
  Dataset ds;
  ds.splits = load_splits(dir);
  const fs::path cpath = dir / "concepts.txt";
  ds.concepts = fs::exists(cpath) ? load_concepts(cpath, ds.splits.entities)
                                  : region_only_concepts(ds.splits.entities.size());
  return ds;
}

// --- shared training options -------------------------------------------------------

struct ConfigOptions {
  std::string config_file;
  std::vector<std::string> settings;

  void add(CLI::App* app) {
    app->add_option("--config", config_file, "flat key = value config file");
    app->add_option("--set", settings, "override one config key (key=value), repeatable");
  }

  TrainConfig resolve(TrainConfig base = {}) const {
    TrainConfig c = config_file.empty() ? base : load_train_config(config_file, base);
    for (const auto& s : settings) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ArgumentError("--set expects key=value, got '" + s + "'");
      apply_setting(c, s.substr(0, eq), s.substr(eq + 1));
    }
    c.validate();
    return c;
  }
};

TrainConfig config_from_checkpoint(const Checkpoint& ck) {
  TrainConfig c;
  if (!ck.meta.extra.contains("config")) return c;
  for (const auto& [key, value] : ck.meta.extra.at("config").items()) {
    apply_setting(c, key, value.is_string() ? value.get<std::string>() : value.dump());
  }
  return c;
}

CheckpointMeta checkpoint_meta(const ModelDims& dims, const TrainConfig& config,
                               const std::string& stage) {
  CheckpointMeta meta;
  meta.dims = dims;
  meta.extra["stage"] = stage;
  meta.extra["config"] = config_to_json(config);
  return meta;
}

json seeds_of(const TrainConfig& c) {
  return {{"data_seed", c.data_seed}, {"model_seed", c.model_seed}, {"episode_seed", c.episode_seed}};
}

ModelParams run_pretrain(const Dataset& ds, const TrainConfig& config, bool verbose) {
  ModelParams params = init_params(model_dims(ds.splits, ds.concepts, config), config.model_seed);
  const auto report = pretrain_background(params, ds.splits.background, unseen_entities(ds.splits), config);
  if (verbose && !report.epoch_loss.empty()) {
    std::cout << "pretrain: " << report.epoch_loss.size() << " epochs, loss "
              << report.epoch_loss.front() << " -> " << report.epoch_loss.back() << "\n";
  }
  return params;
}

MetaTrainResult run_meta_train(const Dataset& ds, const ModelParams& pretrained,
                               const TrainConfig& config, bool verbose) {
  ModelParams params = prepare_meta_params(pretrained, model_dims(ds.splits, ds.concepts, config),
                                           config.model_seed);
  initialize_concepts(params, ds.concepts, background_entities(ds.splits));
  ProgressFn progress;
  if (verbose) {
    progress = [](const TrainLogRow& r) {
      if (!std::isnan(r.valid_mrr)) {
        std::cout << "batch " << r.batch << " loss " << r.loss << " valid MRR " << r.valid_mrr << "\n";
      }
    };
  }
  return meta_train(std::move(params), ds.splits, ds.concepts, config, progress);
}

MetaSet parse_split(const std::string& s) {
  if (s == "test") return MetaSet::test;
  if (s == "valid") return MetaSet::valid;
  if (s == "train") return MetaSet::train;
  throw ArgumentError("unknown split '" + s + "' (expected train, valid, test)");
}

std::size_t parse_shot(const std::string& s) {
  if (s == "random" || s == "R") return 0;
  try {
    const long v = std::stol(s);
    if (v > 0) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  throw ArgumentError("--shots expects a positive integer or 'random', got '" + s + "'");
}

std::string shot_label(std::size_t k) { return k == 0 ? "random" : std::to_string(k); }

// --- commands ------------------------------------------------------------------------

int cmd_synth(const fs::path& out, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.seed = seed;
  write_synthetic(generate_synthetic(spec), out);
  Manifest m;
  m.command = "synth";
  m.seeds["seed"] = seed;
  m.config = {{"groups", spec.groups},       {"hubs_per_group", spec.hubs_per_group},
              {"tails", spec.tails},         {"relations", spec.relations},
              {"timestamps", spec.timestamps}, {"min_facts", spec.min_facts},
              {"max_facts", spec.max_facts}, {"hub_degree", spec.hub_degree}};
  m.output(out / "quadruples.txt");
  m.output(out / "concepts.txt");
  m.write(out / "manifest.json");
  std::cout << "wrote " << (out / "quadruples.txt").string() << "\n";
  return 0;
}

struct BuildOptions {
  std::string input, concepts, out, ratio = "8:1:1", name = "dataset";
  std::size_t low = 10, high = 25;
  double frac = 0.5;
  std::uint64_t seed = 0;
};

std::array<double, 3> parse_ratio(const std::string& text) {
  std::array<double, 3> r{};
  std::string s = text;
  for (char& c : s) {
    if (c == ':' || c == ',') c = ' ';
  }
  std::istringstream in(s);
  if (!(in >> r[0] >> r[1] >> r[2])) throw ArgumentError("--ratio expects three numbers, got '" + text + "'");
  std::string rest;
  if (in >> rest) throw ArgumentError("--ratio expects three numbers, got '" + text + "'");
  const double total = r[0] + r[1] + r[2];
  if (!(total > 0) || r[0] < 0 || r[1] < 0 || r[2] < 0) throw ArgumentError("--ratio must be non-negative");
  for (double& x : r) x /= total;
  return r;
}

int cmd_build_dataset(const BuildOptions& o) {
  if (!fs::exists(o.input)) throw Error("input file not found: " + o.input);
  SplitParams p;
  p.low = o.low;
  p.high = o.high;
  p.sample_frac = o.frac;
  p.ratio = parse_ratio(o.ratio);
  p.seed = o.seed;
  const QuadrupleFile data = parse_quadruples(o.input);
  const DatasetSplits splits = build_ooc_splits(data, p);
  const auto report = validate_splits(splits);
  if (!report.ok()) {
    for (const auto& c : report.checks) {
      if (c.passed) continue;
      std::cerr << "validation failed: " << c.name;
      for (std::size_t i = 0; i < c.offending.size() && i < 5; ++i) std::cerr << (i ? ", " : " (") << c.offending[i];
      std::cerr << (c.offending.empty() ? "" : ")") << "\n";
    }
    throw Error("split validation failed");
  }
  const fs::path out = o.out;
  fs::create_directories(out);
  save_splits(splits, out);
  const ConceptMap concepts = o.concepts.empty() ? region_only_concepts(splits.entities.size())
                                                 : load_concepts(o.concepts, splits.entities);
  write_concepts(out / "concepts.txt", concepts, splits.entities);
  const DatasetStats stats = dataset_stats(splits);
  const std::string table = format_stats_table(stats, o.name);
  write_text(out / "stats.txt", table);
  for (const auto& w : splits.warnings) std::cerr << "warning: " << w << "\n";

  Manifest m;
  m.command = "build-dataset";
  m.config = {{"low", o.low}, {"high", o.high}, {"frac", o.frac},
              {"ratio", {p.ratio[0], p.ratio[1], p.ratio[2]}}, {"name", o.name}};
  m.seeds["seed"] = o.seed;
  m.input(o.input);
  if (!o.concepts.empty()) m.input(o.concepts);
  for (const char* f : {"entities.txt", "relations.txt", "times.txt", "background.txt", "meta_train.txt",
                        "meta_valid.txt", "meta_test.txt", "discarded.txt", "unseen_train.txt",
                        "unseen_valid.txt", "unseen_test.txt", "splits.json", "concepts.txt", "stats.txt"}) {
    m.output(out / f);
  }
  m.write(out / "manifest.json");
  std::cout << table;
  return 0;
}

int cmd_pretrain(const fs::path& data, const ConfigOptions& co, const fs::path& out) {
  const Dataset ds = load_dataset(data);
  const TrainConfig config = co.resolve();
  const ModelParams params = run_pretrain(ds, config, true);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_checkpoint(params, checkpoint_meta(params.dims, config, "pretrain"), out);
  Manifest m;
  m.command = "pretrain";
  m.config = config_to_json(config);
  m.seeds = seeds_of(config);
  m.input(data);
  m.output(out);
  m.output(metadata_path(out));
  m.write(out.string() + ".manifest.json");
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

int cmd_meta_train(const fs::path& data, const ConfigOptions& co, const fs::path& pretrained,
                   const fs::path& out, const std::string& log_path) {
  const Dataset ds = load_dataset(data);
  const TrainConfig config = co.resolve();
  const Checkpoint pre = load_checkpoint(pretrained);
  const MetaTrainResult result = run_meta_train(ds, pre.params, config, true);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  CheckpointMeta meta = checkpoint_meta(result.best.dims, config, "meta-train");
  meta.extra["best_batch"] = result.best_batch;
  meta.extra["best_valid_mrr"] = result.best_valid_mrr;
  save_checkpoint(result.best, meta, out);
  const fs::path log = log_path.empty() ? fs::path(out.string() + ".log.csv") : fs::path(log_path);
  write_train_log(log, result.log);
  Manifest m;
  m.command = "meta-train";
  m.config = config_to_json(config);
  m.seeds = seeds_of(config);
  m.input(data);
  m.input(pretrained);
  m.output(out);
  m.output(metadata_path(out));
  m.output(log);
  m.write(out.string() + ".manifest.json");
  std::cout << "best valid MRR " << result.best_valid_mrr << " at batch " << result.best_batch << "\n";
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

struct EvalOptions {
  std::string data, checkpoint, out, split = "test", dataset_name;
  std::vector<std::string> shots{"3"};
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  bool unfiltered = false;
};

int cmd_evaluate(const EvalOptions& o) {
  const Dataset ds = load_dataset(o.data);
  Checkpoint ck = load_checkpoint(o.checkpoint);
  TrainConfig config = config_from_checkpoint(ck);
  config.workers = o.workers;
  const MetaSet set = parse_split(o.split);
  const FilterIndex filter(ds.splits.all_known());
  const std::string name = o.dataset_name.empty() ? fs::path(o.data).filename().string() : o.dataset_name;

  std::vector<MetricsRow> rows;
  for (const auto& s : o.shots) {
    const std::size_t k = parse_shot(s);
    const EpisodeTask episode = make_eval_episode(ds.splits, set, k, o.seed);
    EvalConfig ec;
    ec.forward = config.forward(false);
    ec.filtered = !o.unfiltered;
    ec.workers = o.workers;
    const auto result = evaluate(ck.params, ds.concepts, episode, all_entities(ck.params.dims.num_entities),
                                 filter, ec);
    rows.push_back({name, shot_label(k), std::string(to_string(ck.params.dims.encoder)), result.metrics, o.seed});
  }
  const std::string csv = metrics_csv(rows);
  std::cout << csv;
  if (!o.out.empty()) {
    const fs::path out = o.out;
    write_text(out, csv);
    fs::path json_path = out;
    json_path.replace_extension(".json");
    write_text(json_path, metrics_json(rows));
    Manifest m;
    m.command = "evaluate";
    m.config = config_to_json(config);
    m.config["split"] = o.split;
    m.config["shots"] = o.shots;
    m.config["filtered"] = !o.unfiltered;
    m.seeds["eval_seed"] = o.seed;
    m.input(o.data);
    m.input(o.checkpoint);
    m.output(out);
    m.output(json_path);
    m.write(out.string() + ".manifest.json");
  }
  return 0;
}

int cmd_ablate(const std::string& data, const ConfigOptions& co, const std::string& pretrained,
               const std::string& out, std::uint64_t eval_seed) {
  const Dataset ds = load_dataset(data);
  const TrainConfig base = co.resolve();
  const ModelParams pre = pretrained.empty() ? run_pretrain(ds, base, true) : load_checkpoint(pretrained).params;
  const FilterIndex filter(ds.splits.all_known());

  struct Variant {
    const char* label;
    EncoderKind encoder;
    ConceptVariant concepts;
  };
  const Variant variants[] = {
      {"FILT", EncoderKind::filt, ConceptVariant::full},
      {"A1", EncoderKind::filt, ConceptVariant::none},
      {"A2", EncoderKind::filt, ConceptVariant::no_lower},
      {"A3", EncoderKind::filt, ConceptVariant::no_upper},
      {"B1", EncoderKind::rgcn, ConceptVariant::full},
      {"B2", EncoderKind::time2vec, ConceptVariant::full},
      {"B3", EncoderKind::functional, ConceptVariant::full},
      {"B4", EncoderKind::attention, ConceptVariant::full},
  };
  std::ostringstream csv;
  csv << "variant,encoder,concepts,shot,MRR,H@1,H@3,H@10,num_queries,seed\n" << std::fixed << std::setprecision(6);
  for (const auto& v : variants) {
    TrainConfig c = base;
    c.encoder = v.encoder;
    c.concepts = v.concepts;
    MetaTrainResult result = run_meta_train(ds, pre, c, false);
    const auto r = evaluate_meta_set(result.best, ds.concepts, ds.splits, MetaSet::test, c.K, eval_seed, c, filter);
    csv << v.label << ',' << to_string(v.encoder) << ',' << to_string(v.concepts) << ',' << c.K << ','
        << r.metrics.mrr << ',' << r.metrics.hits1 << ',' << r.metrics.hits3 << ',' << r.metrics.hits10 << ','
        << r.metrics.num_queries << ',' << eval_seed << '\n';
    std::cout << v.label << " MRR " << r.metrics.mrr << "\n";
  }
  write_text(out, csv.str());
  Manifest m;
  m.command = "ablate";
  m.config = config_to_json(base);
  m.seeds = seeds_of(base);
  m.seeds["eval_seed"] = eval_seed;
  m.input(data);
  if (!pretrained.empty()) m.input(pretrained);
  m.output(out);
  m.write(out + ".manifest.json");
  return 0;
}

int cmd_gradcheck(const std::string& encoder, const std::string& concepts, double tolerance,
                  double epsilon, std::size_t samples) {
  std::vector<EncoderKind> encoders;
  if (encoder == "all") {
    encoders = {EncoderKind::filt, EncoderKind::rgcn, EncoderKind::time2vec, EncoderKind::functional,
                EncoderKind::attention};
  } else {
    encoders = {parse_encoder(encoder)};
  }
  std::vector<ConceptVariant> variants;
  if (concepts == "all") {
    variants = {ConceptVariant::full, ConceptVariant::none, ConceptVariant::no_lower, ConceptVariant::no_upper};
  } else {
    variants = {parse_concept_variant(concepts)};
  }
  GradcheckOptions opts;
  opts.epsilon = epsilon;
  opts.samples_per_tensor = samples;
  bool ok = true;
  for (EncoderKind e : encoders) {
    for (ConceptVariant v : variants) {
      const auto report = gradcheck_toy(e, v, opts);
      const bool pass = report.passed(tolerance);
      ok = ok && pass;
      std::cout << (pass ? "PASS " : "FAIL ") << to_string(e) << '/' << to_string(v)
                << " max_rel_error=" << report.max_rel_error << " checked=" << report.checked
                << " kinks=" << report.kinks << "\n";
      if (!pass) {
        for (const auto& t : report.tensors) {
          std::cout << "  " << t.name << " max_rel_error=" << t.max_rel_error << " at " << t.worst_index << "\n";
        }
      }
    }
  }
  return ok ? 0 : 1;
}

int cmd_export(const std::string& checkpoint, const std::string& data, const std::string& out,
               const std::string& entities_out) {
  const Dataset ds = load_dataset(data);
  const Checkpoint ck = load_checkpoint(checkpoint);
  const ModelParams& p = ck.params;
  if (p.concept_emb.rows() != ds.concepts.concepts.size()) {
    throw ShapeError("checkpoint has " + std::to_string(p.concept_emb.rows()) + " concepts, dataset has " +
                     std::to_string(ds.concepts.concepts.size()));
  }
  auto table = [](const ParamTensor& t, const Vocabulary& names) {
    std::ostringstream s;
    s << std::setprecision(17);
    for (std::size_t r = 0; r < t.rows(); ++r) {
      s << names.token(static_cast<std::uint32_t>(r));
      for (double v : t.row(r)) s << ',' << v;
      s << '\n';
    }
    return s.str();
  };
  write_text(out, table(p.concept_emb, ds.concepts.concepts));
  Manifest m;
  m.command = "export-embeddings";
  m.input(checkpoint);
  m.input(data);
  m.output(out);
  if (!entities_out.empty()) {
    write_text(entities_out, table(p.entity, ds.splits.entities));
    m.output(entities_out);
  }
  m.write(out + ".manifest.json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FILT: few-shot out-of-graph link prediction on temporal knowledge graphs"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string synth_out;
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth", "write the synthetic TKG fixture");
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--seed", synth_seed, "generator seed");

  BuildOptions build;
  auto* bd = app.add_subcommand("build-dataset", "split a quadruple file into background and meta sets");
  bd->add_option("--input", build.input, "quadruple file (s r o t, tab separated)")->required();
  bd->add_option("--concepts", build.concepts, "entity -> concepts file");
  bd->add_option("--low", build.low, "lower frequency bound");
  bd->add_option("--high", build.high, "upper frequency bound");
  bd->add_option("--frac", build.frac, "fraction of in-band entities made unseen");
  bd->add_option("--ratio", build.ratio, "train:valid:test ratio, e.g. 8:1:1");
  bd->add_option("--seed", build.seed, "sampling seed");
  bd->add_option("--name", build.name, "dataset name for the stats table");
  bd->add_option("--out", build.out, "output directory")->required();

  std::string data, out, pretrained, log_path;
  ConfigOptions pre_cfg, meta_cfg, abl_cfg;
  auto* pt = app.add_subcommand("pretrain", "pretrain entity/relation embeddings on the background graph");
  pt->add_option("--data", data, "dataset directory")->required();
  pt->add_option("--out", out, "checkpoint path")->required();
  pre_cfg.add(pt);

  auto* mt = app.add_subcommand("meta-train", "episodic meta-training");
  mt->add_option("--data", data, "dataset directory")->required();
  mt->add_option("--pretrained", pretrained, "pretrained checkpoint")->required();
  mt->add_option("--out", out, "checkpoint path")->required();
  mt->add_option("--log", log_path, "training log CSV (default <out>.log.csv)");
  meta_cfg.add(mt);

  EvalOptions eval;
  auto* ev = app.add_subcommand("evaluate", "filtered ranking evaluation");
  ev->add_option("--data", eval.data, "dataset directory")->required();
  ev->add_option("--checkpoint", eval.checkpoint, "checkpoint path")->required();
  ev->add_option("--shots", eval.shots, "support size per entity (repeatable; 'random' for 1/3/5)");
  ev->add_option("--split", eval.split, "meta set to evaluate (test, valid, train)");
  ev->add_option("--seed", eval.seed, "support sampling seed");
  ev->add_option("--workers", eval.workers, "evaluation threads")->check(CLI::PositiveNumber);
  ev->add_option("--out", eval.out, "metrics CSV path (a .json twin is written too)");
  ev->add_option("--dataset-name", eval.dataset_name, "dataset column value");
  ev->add_flag("--unfiltered", eval.unfiltered, "raw instead of filtered ranking");

  std::uint64_t ablate_seed = 0;
  auto* ab = app.add_subcommand("ablate", "train and evaluate FILT, A1-A3 and B1-B4");
  ab->add_option("--data", data, "dataset directory")->required();
  ab->add_option("--pretrained", pretrained, "pretrained checkpoint (pretrains inline if absent)");
  ab->add_option("--out", out, "combined CSV path")->required();
  ab->add_option("--seed", ablate_seed, "evaluation seed");
  abl_cfg.add(ab);

  std::string gc_encoder = "all", gc_concepts = "all";
  double gc_tol = 1e-4, gc_eps = 1e-5;
  std::size_t gc_samples = 0;
  auto* gc = app.add_subcommand("gradcheck", "finite-difference check on the built-in toy model");
  gc->add_option("--encoder", gc_encoder, "encoder variant or 'all'");
  gc->add_option("--concepts", gc_concepts, "concept variant or 'all'");
  gc->add_option("--tolerance", gc_tol, "maximum relative error");
  gc->add_option("--epsilon", gc_eps, "finite-difference step");
  gc->add_option("--samples", gc_samples, "coordinates per tensor (0 = all)");

  std::string ex_ck, ex_entities;
  auto* ex = app.add_subcommand("export-embeddings", "write concept (and entity) embeddings as CSV");
  ex->add_option("--checkpoint", ex_ck, "checkpoint path")->required();
  ex->add_option("--data", data, "dataset directory")->required();
  ex->add_option("--out", out, "concept CSV path")->required();
  ex->add_option("--entities", ex_entities, "entity CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*synth) return cmd_synth(synth_out, synth_seed);
    if (*bd) return cmd_build_dataset(build);
    if (*pt) return cmd_pretrain(data, pre_cfg, out);
    if (*mt) return cmd_meta_train(data, meta_cfg, pretrained, out, log_path);
    if (*ev) return cmd_evaluate(eval);
    if (*ab) return cmd_ablate(data, abl_cfg, pretrained, out, ablate_seed);
    if (*gc) return cmd_gradcheck(gc_encoder, gc_concepts, gc_tol, gc_eps, gc_samples);
    if (*ex) return cmd_export(ex_ck, data, out, ex_entities);
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
