#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "filt/types.hpp"

namespace filt {

/// Bidirectional token <-> dense id map.
class Vocabulary {
 public:
  std::uint32_t intern(std::string_view token);
  std::optional<std::uint32_t> find(std::string_view token) const;
  const std::string& token(std::uint32_t id) const { return tokens_.at(id); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  static Vocabulary from_tokens(std::vector<std::string> tokens);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct QuadrupleFile {
  std::vector<Quadruple> quads;
  Vocabulary entities;
  Vocabulary relations;
  Vocabulary times;
};

/// Reads `subject<TAB>relation<TAB>object<TAB>time` lines.
///
/// Entity and relation ids follow first appearance. Time ids follow
/// chronological order: numeric when every time token is an unsigned integer,
/// lexicographic otherwise (ISO dates sort correctly), so id differences stay
/// meaningful as time differences. Duplicate lines are kept.
QuadrupleFile parse_quadruples(const std::filesystem::path& path);
QuadrupleFile parse_quadruples(std::istream& in, std::string_view source = "<stream>");

struct SplitParams {
  std::size_t low = 10;
  std::size_t high = 25;
  double sample_frac = 0.5;
  std::array<double, 3> ratio{0.8, 0.1, 0.1};
  std::uint64_t seed = 0;
};

enum class MetaSet : std::uint8_t { none = 0, train = 1, valid = 2, test = 3 };

struct DatasetSplits {
  std::vector<Quadruple> background;
  std::vector<Quadruple> meta_train;
  std::vector<Quadruple> meta_valid;
  std::vector<Quadruple> meta_test;
  /// Quadruples joining unseen entities of two different meta sets.
  std::vector<Quadruple> discarded;
  /// Sorted ascending.
  std::vector<EntityId> unseen_train;
  std::vector<EntityId> unseen_valid;
  std::vector<EntityId> unseen_test;
  Vocabulary entities;
  Vocabulary relations;
  Vocabulary times;
  SplitParams params;
  std::vector<std::string> warnings;

  const std::vector<Quadruple>& meta(MetaSet set) const;
  const std::vector<EntityId>& unseen(MetaSet set) const;
  /// Which meta set each entity id is unseen in (none for background entities).
  std::vector<MetaSet> membership() const;
  /// Background + every meta set; the fact base used for filtered ranking.
  std::vector<Quadruple> all_known() const;
};

/// Frequency = number of quadruples an entity takes part in (a self-loop counts once).
std::vector<std::size_t> entity_frequencies(const std::vector<Quadruple>& quads,
                                            std::size_t num_entities);

/// Largest-remainder apportionment of `total` by `ratio`; ties go to the lower index.
std::array<std::size_t, 3> apportion(std::size_t total, const std::array<double, 3>& ratio);

/// Builds the out-of-graph meta-learning splits from a full quadruple set.
DatasetSplits build_ooc_splits(const QuadrupleFile& data, const SplitParams& params);

struct CheckResult {
  std::string name;
  bool passed = true;
  std::vector<std::string> offending;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool ok() const;
  std::size_t failures() const;
};

ValidationReport validate_splits(const DatasetSplits& splits);

struct DatasetStats {
  std::size_t num_entities = 0;
  std::size_t num_relations = 0;
  std::size_t num_times = 0;
  std::size_t unseen_train = 0;
  std::size_t unseen_valid = 0;
  std::size_t unseen_test = 0;
  std::size_t n_back = 0;
  std::size_t n_meta_train = 0;
  std::size_t n_meta_valid = 0;
  std::size_t n_meta_test = 0;
  std::size_t n_discarded = 0;
};

DatasetStats dataset_stats(const DatasetSplits& splits);

/// One-row table in the column order |E| |R| |T| |E'_tr| |E'_va| |E'_te| N_back N_tr N_va N_te.
std::string format_stats_table(const DatasetStats& stats, std::string_view name);

/// Entity -> concepts mapping with a fallback concept for unlabeled entities.
struct ConceptMap {
  std::vector<std::vector<ConceptId>> concepts_of;
  Vocabulary concepts;
  ConceptId region = 0;

  /// Entities carrying each concept (inverse of concepts_of).
  std::vector<std::vector<EntityId>> members() const;
};

inline constexpr std::string_view kRegionConcept = "Region";

/// Reads `entity<TAB>concept1,concept2,...`. Entities absent from the file or with an
/// empty list get the "Region" concept.
ConceptMap load_concepts(const std::filesystem::path& path, const Vocabulary& entities);
ConceptMap load_concepts(std::istream& in, const Vocabulary& entities,
                         std::string_view source = "<stream>");

/// Every entity mapped to the fallback concept only.
ConceptMap region_only_concepts(std::size_t num_entities);

void write_concepts(const std::filesystem::path& path, const ConceptMap& concepts,
                    const Vocabulary& entities);

/// Persists splits as quadruple files (token form), unseen-entity lists, vocabularies
/// and a manifest.json with counts, thresholds and seed.
void save_splits(const DatasetSplits& splits, const std::filesystem::path& dir);
DatasetSplits load_splits(const std::filesystem::path& dir);

void write_quadruples(const std::filesystem::path& path, const std::vector<Quadruple>& quads,
                      const Vocabulary& entities, const Vocabulary& relations,
                      const Vocabulary& times);

}  // namespace filt
