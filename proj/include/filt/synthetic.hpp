#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "filt/tkg_data.hpp"

namespace filt {

/// Generated TKG with planted group structure and temporal locality.
///
/// Hubs form `groups` groups and link densely inside their group. Each tail entity has
/// between `min_facts` and `max_facts` facts, all with hubs; before a per-entity
/// change point its partners come from one group, after it from another, so the
/// support facts closest in time tell which group a query's answer belongs to.
struct SyntheticSpec {
  std::size_t groups = 10;
  std::size_t hubs_per_group = 10;
  std::size_t tails = 100;
  std::size_t relations = 20;
  std::size_t timestamps = 50;
  std::size_t min_facts = 10;
  std::size_t max_facts = 25;
  /// Out-edges per hub inside its group.
  std::size_t hub_degree = 28;
  std::uint64_t seed = 0;
};

struct SyntheticCorpus {
  /// `s<TAB>r<TAB>o<TAB>t` lines.
  std::string quadruples;
  /// `entity<TAB>concept` lines (hubs only; tails fall back to Region).
  std::string concepts;
};

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);

/// Split parameters used with the synthetic corpus: default band and half-sampling, a
/// larger test share (6:1:3) so meta-test has enough queries.
SplitParams synthetic_split_params(std::uint64_t seed);

/// Writes quadruples.txt and concepts.txt into `dir`.
void write_synthetic(const SyntheticCorpus& corpus, const std::filesystem::path& dir);

}  // namespace filt
