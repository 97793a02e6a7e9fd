#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "filt/evaluator.hpp"
#include "filt/optim.hpp"
#include "filt/params.hpp"
#include "filt/tkg_data.hpp"

namespace filt {

struct TrainConfig {
  std::size_t d = 100;
  std::size_t d_t = 8;
  std::size_t K = 3;
  std::size_t N = 100;
  std::size_t negatives = 32;
  double margin = 1.0;
  double lambda = 0.2;
  double dropout = 0.3;
  Activation activation = Activation::leaky_relu;
  EncoderKind encoder = EncoderKind::filt;
  ConceptVariant concepts = ConceptVariant::full;
  OptimizerKind optimizer = OptimizerKind::adam;
  double lr = 1e-3;
  std::size_t batches = 15000;
  std::size_t eval_every = 500;
  std::uint64_t data_seed = 0;
  std::uint64_t model_seed = 1;
  std::uint64_t episode_seed = 2;
  std::size_t pretrain_epochs = 20;
  double pretrain_lr = 1e-2;
  std::size_t pretrain_batch = 256;
  bool normalize_loss = false;
  /// Starting value of both concept-branch scales.
  double delta_init = 1.0;
  /// Keep delta1/delta2 fixed at delta_init during meta-training.
  bool freeze_delta = false;
  std::size_t workers = 1;

  /// Throws ArgumentError on out-of-range values.
  void validate() const;
  ForwardConfig forward(bool train) const;
};

/// Sets one field from its `key = value` text form. Unknown keys throw ArgumentError.
void apply_setting(TrainConfig& config, const std::string& key, const std::string& value);

/// Flat `key = value` lines; '#' starts a comment, blank lines are skipped.
TrainConfig parse_train_config(std::istream& in, TrainConfig base = {},
                               const std::string& source = "<stream>");
TrainConfig load_train_config(const std::filesystem::path& path, TrainConfig base = {});

nlohmann::json config_to_json(const TrainConfig& config);
std::string config_to_text(const TrainConfig& config);

ModelDims model_dims(const DatasetSplits& splits, const ConceptMap& concepts,
                     const TrainConfig& config);

struct PretrainReport {
  /// Summed hinge loss per epoch.
  std::vector<double> epoch_loss;
};

/// ComplEx pre-training of entity and relation rows on the background graph (time
/// ignored). Negatives come from entities seen in the background only. Throws if the
/// background mentions an entity flagged in `unseen`.
PretrainReport pretrain_background(ModelParams& params, const std::vector<Quadruple>& background,
                                   const std::vector<bool>& unseen, const TrainConfig& config);

/// Fresh parameters for `dims` (seeded) with the entity and relation tables copied from
/// a pretrained model of the same vocabulary and width.
ModelParams prepare_meta_params(const ModelParams& pretrained, const ModelDims& dims,
                                std::uint64_t seed);

/// Flags every entity that is unseen in some meta set.
std::vector<bool> unseen_entities(const DatasetSplits& splits);

/// Entities appearing in the background graph.
std::vector<bool> background_entities(const DatasetSplits& splits);

/// Concept rows from the pretrained entity table: mean over background members, then
/// one correction pass. Concepts without background members keep their current rows.
void initialize_concepts(ModelParams& params, const ConceptMap& concepts,
                         const std::vector<bool>& contributes);

struct TrainLogRow {
  std::size_t batch = 0;
  double loss = 0.0;
  /// NaN when no evaluation ran at this batch.
  double valid_mrr = 0.0;
  double wall_clock = 0.0;
};

struct MetaTrainResult {
  ModelParams best;
  double best_valid_mrr = -1.0;
  std::size_t best_batch = 0;
  std::vector<TrainLogRow> log;
  /// (batch, valid MRR) for every evaluation, in order.
  std::vector<std::pair<std::size_t, double>> evaluations;
};

using ProgressFn = std::function<void(const TrainLogRow&)>;

/// Episodic meta-training starting from `params` (pretrained and concept-initialized).
/// Keeps the parameters with the best meta-valid MRR; without a usable meta-valid set the
/// final parameters are kept.
MetaTrainResult meta_train(ModelParams params, const DatasetSplits& splits,
                           const ConceptMap& concepts, const TrainConfig& config,
                           const ProgressFn& progress = {});

/// Evaluation episode over one meta set with `shots` support quadruples per entity
/// (0 = random shot size from {1, 3, 5}).
EpisodeTask make_eval_episode(const DatasetSplits& splits, MetaSet set, std::size_t shots,
                              std::uint64_t seed);

EvalResult evaluate_meta_set(ModelParams& params, const ConceptMap& concepts,
                             const DatasetSplits& splits, MetaSet set, std::size_t shots,
                             std::uint64_t seed, const TrainConfig& config,
                             const FilterIndex& filter);

void write_train_log(const std::filesystem::path& path, const std::vector<TrainLogRow>& log);

}  // namespace filt
