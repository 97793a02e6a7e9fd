#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "filt/evaluator.hpp"
#include "filt/synthetic.hpp"
#include "filt/tkg_data.hpp"
#include "filt/toy.hpp"
#include "filt/trainer.hpp"

namespace py = pybind11;
using namespace filt;

namespace {

struct PyDataset {
  DatasetSplits splits;
  ConceptMap concepts;
};

py::dict metrics_dict(const Metrics& m) {
  py::dict d;
  d["MRR"] = m.mrr;
  d["H@1"] = m.hits1;
  d["H@3"] = m.hits3;
  d["H@10"] = m.hits10;
  d["num_queries"] = m.num_queries;
  return d;
}

py::dict stats_dict(const DatasetStats& s) {
  py::dict d;
  d["entities"] = s.num_entities;
  d["relations"] = s.num_relations;
  d["times"] = s.num_times;
  d["unseen_train"] = s.unseen_train;
  d["unseen_valid"] = s.unseen_valid;
  d["unseen_test"] = s.unseen_test;
  d["background"] = s.n_back;
  d["meta_train"] = s.n_meta_train;
  d["meta_valid"] = s.n_meta_valid;
  d["meta_test"] = s.n_meta_test;
  d["discarded"] = s.n_discarded;
  return d;
}

TrainConfig make_config(const std::map<std::string, std::string>& settings) {
  TrainConfig c;
  for (const auto& [k, v] : settings) apply_setting(c, k, v);
  c.validate();
  return c;
}

MetaSet parse_set(const std::string& name) {
  if (name == "train") return MetaSet::train;
  if (name == "valid") return MetaSet::valid;
  if (name == "test") return MetaSet::test;
  throw ArgumentError("unknown meta set '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_filt, m) {
  m.doc() = "Few-shot temporal knowledge graph completion core";

  auto base = py::register_exception<Error>(m, "FiltError");
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<ArgumentError>(m, "ArgumentError", base.ptr());

  m.def("complex_score",
        [](const std::vector<double>& s, const std::vector<double>& r, const std::vector<double>& o) {
          return complex_score_value(s, r, o);
        },
        py::arg("s"), py::arg("r"), py::arg("o"));

  m.def("time_weights",
        [](const std::vector<TimeId>& times, TimeId query_time, double lam) {
          return filt_time_weights(times, query_time, lam);
        },
        py::arg("times"), py::arg("query_time"), py::arg("lam") = 1.0);

  m.def("pessimistic_rank",
        [](const std::vector<double>& scores, std::size_t truth, std::vector<bool> keep) {
          if (keep.empty()) keep.assign(scores.size(), true);
          return pessimistic_rank(scores, truth, keep);
        },
        py::arg("scores"), py::arg("truth"), py::arg("keep") = std::vector<bool>{});

  m.def("metrics_from_ranks",
        [](const std::vector<std::size_t>& ranks) { return metrics_dict(metrics_from_ranks(ranks)); },
        py::arg("ranks"));

  m.def("apportion", &apportion, py::arg("total"), py::arg("ratio"));

  m.def("gradcheck",
        [](const std::string& encoder, const std::string& concepts, std::size_t samples) {
          GradcheckOptions opts;
          opts.samples_per_tensor = samples;
          const auto r = gradcheck_toy(parse_encoder(encoder), parse_concept_variant(concepts), opts);
          py::dict d;
          d["max_rel_error"] = r.max_rel_error;
          d["checked"] = r.checked;
          d["kinks"] = r.kinks;
          return d;
        },
        py::arg("encoder") = "filt", py::arg("concepts") = "full", py::arg("samples") = 0);

  m.def("synthetic_corpus",
        [](std::uint64_t seed) {
          SyntheticSpec spec;
          spec.seed = seed;
          const auto c = generate_synthetic(spec);
          return py::make_tuple(c.quadruples, c.concepts);
        },
        py::arg("seed") = 0);

  py::class_<PyDataset>(m, "Dataset")
      .def_static(
          "from_text",
          [](const std::string& quadruples, const std::string& concepts, std::uint64_t seed,
             std::array<double, 3> ratio) {
            std::istringstream qin(quadruples);
            const auto file = parse_quadruples(qin, "<text>");
            SplitParams p;
            p.seed = seed;
            p.ratio = ratio;
            PyDataset ds{build_ooc_splits(file, p), {}};
            std::istringstream cin(concepts);
            ds.concepts = load_concepts(cin, ds.splits.entities, "<text>");
            return ds;
          },
          py::arg("quadruples"), py::arg("concepts") = "", py::arg("seed") = 0,
          py::arg("ratio") = std::array<double, 3>{0.8, 0.1, 0.1})
      .def_static(
          "load",
          [](const std::filesystem::path& dir) {
            PyDataset ds{load_splits(dir), {}};
            ds.concepts = load_concepts(dir / "concepts.txt", ds.splits.entities);
            return ds;
          },
          py::arg("directory"))
      .def("save",
           [](const PyDataset& ds, const std::filesystem::path& dir) {
             save_splits(ds.splits, dir);
             write_concepts(dir / "concepts.txt", ds.concepts, ds.splits.entities);
           },
           py::arg("directory"))
      .def("stats", [](const PyDataset& ds) { return stats_dict(dataset_stats(ds.splits)); })
      .def("validate",
           [](const PyDataset& ds) {
             py::dict d;
             for (const auto& c : validate_splits(ds.splits).checks) d[py::str(c.name)] = c.passed;
             return d;
           })
      .def("unseen",
           [](const PyDataset& ds, const std::string& set) {
             std::vector<std::string> names;
             for (EntityId e : ds.splits.unseen(parse_set(set))) names.push_back(ds.splits.entities.token(e));
             return names;
           },
           py::arg("set"))
      .def_property_readonly("entities", [](const PyDataset& ds) { return ds.splits.entities.tokens(); })
      .def_property_readonly("concepts", [](const PyDataset& ds) { return ds.concepts.concepts.tokens(); });

  m.def("train_and_evaluate",
        [](const PyDataset& ds, const std::map<std::string, std::string>& settings,
           const std::vector<std::size_t>& shots, const std::string& split, std::uint64_t eval_seed) {
          const TrainConfig config = make_config(settings);
          py::gil_scoped_release release;
          const ModelDims dims = model_dims(ds.splits, ds.concepts, config);
          ModelParams pre = init_params(dims, config.model_seed);
          pretrain_background(pre, ds.splits.background, unseen_entities(ds.splits), config);
          ModelParams params = prepare_meta_params(pre, dims, config.model_seed);
          initialize_concepts(params, ds.concepts, background_entities(ds.splits));
          auto result = meta_train(params, ds.splits, ds.concepts, config);
          const FilterIndex filter(ds.splits.all_known());
          std::vector<std::pair<std::size_t, Metrics>> out;
          for (std::size_t k : shots) {
            out.emplace_back(k, evaluate_meta_set(result.best, ds.concepts, ds.splits, parse_set(split), k,
                                                  eval_seed, config, filter)
                                    .metrics);
          }
          py::gil_scoped_acquire acquire;
          py::dict d;
          for (const auto& [k, metrics] : out) d[py::int_(k)] = metrics_dict(metrics);
          return d;
        },
        py::arg("dataset"), py::arg("settings") = std::map<std::string, std::string>{},
        py::arg("shots") = std::vector<std::size_t>{1, 3, 5}, py::arg("split") = "test",
        py::arg("eval_seed") = 0);
}
