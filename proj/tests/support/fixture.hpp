#pragma once

#include <sstream>

#include "filt/synthetic.hpp"
#include "filt/tkg_data.hpp"
#include "filt/trainer.hpp"

namespace filt::testing {

struct SyntheticData {
  DatasetSplits splits;
  ConceptMap concepts;
};

inline SyntheticData synthetic_data(const SyntheticSpec& spec = {}) {
  const auto corpus = generate_synthetic(spec);
  std::istringstream qin(corpus.quadruples);
  const auto file = parse_quadruples(qin, "synthetic");
  SyntheticData out;
  out.splits = build_ooc_splits(file, synthetic_split_params(spec.seed));
  std::istringstream cin(corpus.concepts);
  out.concepts = load_concepts(cin, out.splits.entities, "synthetic-concepts");
  return out;
}

/// Pretrained and concept-initialized parameters ready for meta-training.
inline ModelParams prepared_params(const SyntheticData& data, const TrainConfig& config) {
  const ModelDims dims = model_dims(data.splits, data.concepts, config);
  ModelParams pre = init_params(dims, config.model_seed);
  pretrain_background(pre, data.splits.background, unseen_entities(data.splits), config);
  ModelParams params = prepare_meta_params(pre, dims, config.model_seed);
  initialize_concepts(params, data.concepts, background_entities(data.splits));
  return params;
}

}  // namespace filt::testing
