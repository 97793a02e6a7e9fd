#include "filt/tkg_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "filt/random.hpp"

namespace filt {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<std::uint64_t> as_unsigned(std::string_view token) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) return std::nullopt;
  return value;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  return out;
}

std::string describe(const Quadruple& q, const DatasetSplits& s) {
  auto ent = [&](EntityId e) {
    return e < s.entities.size() ? s.entities.token(e) : "#" + std::to_string(e);
  };
  auto rel = [&](RelationId r) {
    return r < s.relations.size() ? s.relations.token(r) : "#" + std::to_string(r);
  };
  std::ostringstream os;
  os << '(' << ent(q.subject) << ", " << rel(q.relation) << ", " << ent(q.object) << ", "
     << q.time << ')';
  return os.str();
}

}  // namespace

std::uint32_t Vocabulary::intern(std::string_view token) {
  const std::string key(token);
  if (const auto it = index_.find(key); it != index_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(tokens_.size());
  tokens_.push_back(key);
  index_.emplace(key, id);
  return id;
}

std::optional<std::uint32_t> Vocabulary::find(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  Vocabulary v;
  for (const auto& t : tokens) {
    if (v.find(t)) throw ParseError("duplicate vocabulary token '" + t + "'");
    v.intern(t);
  }
  return v;
}

QuadrupleFile parse_quadruples(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_quadruples(in, path.string());
}

QuadrupleFile parse_quadruples(std::istream& in, std::string_view source) {
  QuadrupleFile out;
  Vocabulary raw_times;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (view.empty()) continue;
    const auto fields = split(view, '\t');
    if (fields.size() != 4 || std::any_of(fields.begin(), fields.end(),
                                          [](std::string_view f) { return f.empty(); })) {
      throw ParseError(std::string(source) + ":" + std::to_string(line_no) +
                       ": expected 4 tab-separated fields, got " +
                       std::to_string(fields.size()));
    }
    Quadruple q;
    q.subject = out.entities.intern(fields[0]);
    q.relation = out.relations.intern(fields[1]);
    q.object = out.entities.intern(fields[2]);
    q.time = raw_times.intern(fields[3]);
    out.quads.push_back(q);
  }
  if (out.quads.empty()) throw ParseError(std::string(source) + ": no quadruples");

  // Re-rank time tokens chronologically.
  std::vector<std::string> sorted = raw_times.tokens();
  const bool numeric = std::all_of(sorted.begin(), sorted.end(),
                                   [](const std::string& t) { return as_unsigned(t).has_value(); });
  if (numeric) {
    std::sort(sorted.begin(), sorted.end(), [](const std::string& a, const std::string& b) {
      return *as_unsigned(a) < *as_unsigned(b);
    });
  } else {
    std::sort(sorted.begin(), sorted.end());
  }
  out.times = Vocabulary::from_tokens(sorted);
  std::vector<TimeId> remap(raw_times.size());
  for (std::size_t i = 0; i < raw_times.size(); ++i) remap[i] = *out.times.find(raw_times.token(static_cast<std::uint32_t>(i)));
  for (auto& q : out.quads) q.time = remap[q.time];
  return out;
}

const std::vector<Quadruple>& DatasetSplits::meta(MetaSet set) const {
  switch (set) {
    case MetaSet::train: return meta_train;
    case MetaSet::valid: return meta_valid;
    case MetaSet::test: return meta_test;
    case MetaSet::none: break;
  }
  return background;
}

const std::vector<EntityId>& DatasetSplits::unseen(MetaSet set) const {
  switch (set) {
    case MetaSet::train: return unseen_train;
    case MetaSet::valid: return unseen_valid;
    case MetaSet::test: return unseen_test;
    case MetaSet::none: break;
  }
  throw ArgumentError("background has no unseen-entity set");
}

std::vector<MetaSet> DatasetSplits::membership() const {
  std::vector<MetaSet> m(entities.size(), MetaSet::none);
  for (MetaSet set : {MetaSet::train, MetaSet::valid, MetaSet::test}) {
    for (EntityId e : unseen(set)) {
      if (e < m.size()) m[e] = set;
    }
  }
  return m;
}

std::vector<Quadruple> DatasetSplits::all_known() const {
  std::vector<Quadruple> all;
  all.reserve(background.size() + meta_train.size() + meta_valid.size() + meta_test.size());
  for (const auto* part : {&background, &meta_train, &meta_valid, &meta_test}) {
    all.insert(all.end(), part->begin(), part->end());
  }
  return all;
}

std::vector<std::size_t> entity_frequencies(const std::vector<Quadruple>& quads,
                                            std::size_t num_entities) {
  std::vector<std::size_t> freq(num_entities, 0);
  for (const auto& q : quads) {
    ++freq.at(q.subject);
    if (q.object != q.subject) ++freq.at(q.object);
  }
  return freq;
}

std::array<std::size_t, 3> apportion(std::size_t total, const std::array<double, 3>& ratio) {
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double quota = ratio[i] * static_cast<double>(total);
    counts[i] = static_cast<std::size_t>(std::floor(quota + 1e-9));
    remainder[i] = quota - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b] + 1e-12; });
  for (std::size_t k = 0; assigned < total; k = (k + 1) % 3) {
    ++counts[order[k]];
    ++assigned;
  }
  while (assigned > total) {
    // Only reachable through the epsilon above; take back from the smallest remainder.
    for (auto it = order.rbegin(); it != order.rend() && assigned > total; ++it) {
      if (counts[*it] > 0) {
        --counts[*it];
        --assigned;
      }
    }
  }
  return counts;
}

DatasetSplits build_ooc_splits(const QuadrupleFile& data, const SplitParams& params) {
  if (params.low > params.high) throw ArgumentError("low threshold exceeds high threshold");
  if (!(params.sample_frac > 0.0 && params.sample_frac <= 1.0)) {
    throw ArgumentError("sample_frac must lie in (0, 1]");
  }
  const double ratio_sum = params.ratio[0] + params.ratio[1] + params.ratio[2];
  if (std::abs(ratio_sum - 1.0) > 1e-9 ||
      std::any_of(params.ratio.begin(), params.ratio.end(), [](double r) { return r < 0.0; })) {
    throw ArgumentError("split ratio must be non-negative and sum to 1");
  }

  DatasetSplits out;
  out.entities = data.entities;
  out.relations = data.relations;
  out.times = data.times;
  out.params = params;

  const auto freq = entity_frequencies(data.quads, data.entities.size());
  std::vector<EntityId> band;
  for (EntityId e = 0; e < freq.size(); ++e) {
    if (freq[e] >= params.low && freq[e] <= params.high) band.push_back(e);
  }
  if (band.empty()) {
    out.warnings.push_back("no entity has frequency in [" + std::to_string(params.low) + ", " +
                           std::to_string(params.high) + "]; meta sets are empty");
    out.background = data.quads;
    return out;
  }

  const auto n_unseen = static_cast<std::size_t>(
      std::llround(params.sample_frac * static_cast<double>(band.size())));
  Rng rng(params.seed);
  // Partial Fisher-Yates: the first n_unseen slots become the drawn sample, in draw order.
  for (std::size_t i = 0; i < n_unseen; ++i) {
    std::swap(band[i], band[i + rng.uniform_index(band.size() - i)]);
  }
  const auto counts = apportion(n_unseen, params.ratio);
  std::vector<MetaSet> member(data.entities.size(), MetaSet::none);
  std::size_t cursor = 0;
  const std::array<MetaSet, 3> sets{MetaSet::train, MetaSet::valid, MetaSet::test};
  const std::array<std::vector<EntityId>*, 3> targets{&out.unseen_train, &out.unseen_valid,
                                                      &out.unseen_test};
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < counts[k]; ++i, ++cursor) {
      member[band[cursor]] = sets[k];
      targets[k]->push_back(band[cursor]);
    }
    std::sort(targets[k]->begin(), targets[k]->end());
  }

  for (const auto& q : data.quads) {
    const MetaSet a = member[q.subject];
    const MetaSet b = member[q.object];
    if (a == MetaSet::none && b == MetaSet::none) {
      out.background.push_back(q);
    } else if (a != MetaSet::none && b != MetaSet::none && a != b) {
      out.discarded.push_back(q);
    } else {
      const MetaSet set = a != MetaSet::none ? a : b;
      (set == MetaSet::train ? out.meta_train
                             : set == MetaSet::valid ? out.meta_valid : out.meta_test)
          .push_back(q);
    }
  }
  if (!out.discarded.empty()) {
    out.warnings.push_back("discarded " + std::to_string(out.discarded.size()) +
                           " quadruples linking unseen entities of different meta sets");
  }
  return out;
}

bool ValidationReport::ok() const { return failures() == 0; }

std::size_t ValidationReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.passed; }));
}

ValidationReport validate_splits(const DatasetSplits& s) {
  ValidationReport report;
  const std::size_t n_ent = s.entities.size();

  CheckResult ranges{"ids within vocabulary", true, {}};
  for (const auto* part : {&s.background, &s.meta_train, &s.meta_valid, &s.meta_test}) {
    for (const auto& q : *part) {
      if (q.subject >= n_ent || q.object >= n_ent || q.relation >= s.relations.size() ||
          q.time >= s.times.size()) {
        ranges.passed = false;
        ranges.offending.push_back(describe(q, s));
      }
    }
  }
  for (MetaSet set : {MetaSet::train, MetaSet::valid, MetaSet::test}) {
    for (EntityId e : s.unseen(set)) {
      if (e >= n_ent) {
        ranges.passed = false;
        ranges.offending.push_back("unseen id " + std::to_string(e));
      }
    }
  }
  report.checks.push_back(ranges);

  // Membership table that remembers every set an entity was listed in.
  std::vector<std::uint8_t> listed(n_ent, 0);
  CheckResult disjoint{"unseen sets pairwise disjoint", true, {}};
  for (MetaSet set : {MetaSet::train, MetaSet::valid, MetaSet::test}) {
    for (EntityId e : s.unseen(set)) {
      if (e >= n_ent) continue;
      if (listed[e] != 0) {
        disjoint.passed = false;
        disjoint.offending.push_back(s.entities.token(e));
      }
      listed[e] |= static_cast<std::uint8_t>(1u << static_cast<unsigned>(set));
    }
  }
  report.checks.push_back(disjoint);

  auto set_of = [&](EntityId e) -> std::uint8_t { return e < n_ent ? listed[e] : 0; };

  CheckResult purity{"background free of unseen entities", true, {}};
  for (const auto& q : s.background) {
    if (set_of(q.subject) != 0 || set_of(q.object) != 0) {
      purity.passed = false;
      purity.offending.push_back(describe(q, s));
    }
  }
  report.checks.push_back(purity);

  const std::array<std::pair<MetaSet, const char*>, 3> named{
      {{MetaSet::train, "meta_train"}, {MetaSet::valid, "meta_valid"}, {MetaSet::test, "meta_test"}}};
  for (const auto& [set, label] : named) {
    CheckResult owns{std::string(label) + " quadruples touch its unseen entities", true, {}};
    const auto bit = static_cast<std::uint8_t>(1u << static_cast<unsigned>(set));
    for (const auto& q : s.meta(set)) {
      if ((set_of(q.subject) & bit) == 0 && (set_of(q.object) & bit) == 0) {
        owns.passed = false;
        owns.offending.push_back(describe(q, s));
      }
    }
    report.checks.push_back(owns);
  }

  CheckResult cross{"no link between different meta sets", true, {}};
  for (const auto* part : {&s.background, &s.meta_train, &s.meta_valid, &s.meta_test}) {
    for (const auto& q : *part) {
      const std::uint8_t a = set_of(q.subject);
      const std::uint8_t b = set_of(q.object);
      if (a != 0 && b != 0 && a != b) {
        cross.passed = false;
        cross.offending.push_back(describe(q, s));
      }
    }
  }
  report.checks.push_back(cross);
  return report;
}

DatasetStats dataset_stats(const DatasetSplits& s) {
  DatasetStats st;
  st.num_entities = s.entities.size();
  st.num_relations = s.relations.size();
  st.num_times = s.times.size();
  st.unseen_train = s.unseen_train.size();
  st.unseen_valid = s.unseen_valid.size();
  st.unseen_test = s.unseen_test.size();
  st.n_back = s.background.size();
  st.n_meta_train = s.meta_train.size();
  st.n_meta_valid = s.meta_valid.size();
  st.n_meta_test = s.meta_test.size();
  st.n_discarded = s.discarded.size();
  return st;
}

std::string format_stats_table(const DatasetStats& st, std::string_view name) {
  std::ostringstream os;
  os << std::left << std::setw(16) << "Dataset" << std::right;
  for (const char* h : {"|E|", "|R|", "|T|", "|E'tr|", "|E'va|", "|E'te|", "N_back", "N_tr",
                        "N_va", "N_te"}) {
    os << std::setw(9) << h;
  }
  os << '\n' << std::left << std::setw(16) << name << std::right;
  for (std::size_t v : {st.num_entities, st.num_relations, st.num_times, st.unseen_train,
                        st.unseen_valid, st.unseen_test, st.n_back, st.n_meta_train,
                        st.n_meta_valid, st.n_meta_test}) {
    os << std::setw(9) << v;
  }
  os << '\n';
  return os.str();
}

std::vector<std::vector<EntityId>> ConceptMap::members() const {
  std::vector<std::vector<EntityId>> out(concepts.size());
  for (EntityId e = 0; e < concepts_of.size(); ++e) {
    for (ConceptId c : concepts_of[e]) out.at(c).push_back(e);
  }
  return out;
}

ConceptMap load_concepts(const std::filesystem::path& path, const Vocabulary& entities) {
  auto in = open_input(path);
  return load_concepts(in, entities, path.string());
}

ConceptMap load_concepts(std::istream& in, const Vocabulary& entities, std::string_view source) {
  ConceptMap map;
  map.concepts_of.assign(entities.size(), {});
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (view.empty()) continue;
    const std::size_t tab = view.find('\t');
    const std::string_view name = view.substr(0, tab);
    const auto entity = entities.find(name);
    if (!entity) {
      throw ParseError(std::string(source) + ":" + std::to_string(line_no) + ": unknown entity '" +
                       std::string(name) + "'");
    }
    if (tab == std::string_view::npos) continue;
    auto& list = map.concepts_of[*entity];
    for (std::string_view token : split(view.substr(tab + 1), ',')) {
      token = trim(token);
      if (token.empty()) continue;
      const ConceptId c = map.concepts.intern(token);
      if (std::find(list.begin(), list.end(), c) == list.end()) list.push_back(c);
    }
  }
  map.region = map.concepts.intern(kRegionConcept);
  for (auto& list : map.concepts_of) {
    if (list.empty()) list.push_back(map.region);
  }
  return map;
}

ConceptMap region_only_concepts(std::size_t num_entities) {
  ConceptMap map;
  map.region = map.concepts.intern(kRegionConcept);
  map.concepts_of.assign(num_entities, std::vector<ConceptId>{map.region});
  return map;
}

void write_concepts(const std::filesystem::path& path, const ConceptMap& concepts,
                    const Vocabulary& entities) {
  auto out = open_output(path);
  for (EntityId e = 0; e < concepts.concepts_of.size(); ++e) {
    out << entities.token(e) << '\t';
    bool first = true;
    for (ConceptId c : concepts.concepts_of[e]) {
      if (!first) out << ',';
      out << concepts.concepts.token(c);
      first = false;
    }
    out << '\n';
  }
}

void write_quadruples(const std::filesystem::path& path, const std::vector<Quadruple>& quads,
                      const Vocabulary& entities, const Vocabulary& relations,
                      const Vocabulary& times) {
  auto out = open_output(path);
  for (const auto& q : quads) {
    out << entities.token(q.subject) << '\t' << relations.token(q.relation) << '\t'
        << entities.token(q.object) << '\t' << times.token(q.time) << '\n';
  }
}

namespace {

void write_tokens(const std::filesystem::path& path, const Vocabulary& v) {
  auto out = open_output(path);
  for (const auto& t : v.tokens()) out << t << '\n';
}

Vocabulary read_tokens(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  while (!tokens.empty() && tokens.back().empty()) tokens.pop_back();
  return Vocabulary::from_tokens(std::move(tokens));
}

void write_ids(const std::filesystem::path& path, const std::vector<EntityId>& ids,
               const Vocabulary& entities) {
  auto out = open_output(path);
  for (EntityId e : ids) out << e << '\t' << entities.token(e) << '\n';
}

std::vector<EntityId> read_ids(const std::filesystem::path& path, const Vocabulary& entities) {
  auto in = open_input(path);
  std::vector<EntityId> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    const auto id = as_unsigned(fields[0]);
    if (!id || *id >= entities.size()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad entity id");
    }
    ids.push_back(static_cast<EntityId>(*id));
  }
  return ids;
}

std::vector<Quadruple> read_quads(const std::filesystem::path& path, const Vocabulary& entities,
                                  const Vocabulary& relations, const Vocabulary& times) {
  auto in = open_input(path);
  std::vector<Quadruple> quads;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (view.empty()) continue;
    const auto f = split(view, '\t');
    const auto where = path.string() + ":" + std::to_string(line_no);
    if (f.size() != 4) throw ParseError(where + ": expected 4 tab-separated fields");
    const auto s = entities.find(f[0]);
    const auto r = relations.find(f[1]);
    const auto o = entities.find(f[2]);
    const auto t = times.find(f[3]);
    if (!s || !r || !o || !t) throw ParseError(where + ": token missing from vocabulary");
    quads.push_back({*s, *r, *o, *t});
  }
  return quads;
}

}  // namespace

void save_splits(const DatasetSplits& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_tokens(dir / "entities.txt", s.entities);
  write_tokens(dir / "relations.txt", s.relations);
  write_tokens(dir / "times.txt", s.times);
  write_quadruples(dir / "background.txt", s.background, s.entities, s.relations, s.times);
  write_quadruples(dir / "meta_train.txt", s.meta_train, s.entities, s.relations, s.times);
  write_quadruples(dir / "meta_valid.txt", s.meta_valid, s.entities, s.relations, s.times);
  write_quadruples(dir / "meta_test.txt", s.meta_test, s.entities, s.relations, s.times);
  write_quadruples(dir / "discarded.txt", s.discarded, s.entities, s.relations, s.times);
  write_ids(dir / "unseen_train.txt", s.unseen_train, s.entities);
  write_ids(dir / "unseen_valid.txt", s.unseen_valid, s.entities);
  write_ids(dir / "unseen_test.txt", s.unseen_test, s.entities);

  const auto st = dataset_stats(s);
  nlohmann::ordered_json m;
  m["low"] = s.params.low;
  m["high"] = s.params.high;
  m["sample_frac"] = s.params.sample_frac;
  m["ratio"] = s.params.ratio;
  m["seed"] = s.params.seed;
  m["counts"] = {{"entities", st.num_entities},       {"relations", st.num_relations},
                 {"times", st.num_times},             {"unseen_train", st.unseen_train},
                 {"unseen_valid", st.unseen_valid},   {"unseen_test", st.unseen_test},
                 {"background", st.n_back},           {"meta_train", st.n_meta_train},
                 {"meta_valid", st.n_meta_valid},     {"meta_test", st.n_meta_test},
                 {"discarded", st.n_discarded}};
  auto out = open_output(dir / "splits.json");
  out << m.dump(2) << '\n';
}

DatasetSplits load_splits(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ParseError("no split directory " + dir.string());
  DatasetSplits s;
  s.entities = read_tokens(dir / "entities.txt");
  s.relations = read_tokens(dir / "relations.txt");
  s.times = read_tokens(dir / "times.txt");
  s.background = read_quads(dir / "background.txt", s.entities, s.relations, s.times);
  s.meta_train = read_quads(dir / "meta_train.txt", s.entities, s.relations, s.times);
  s.meta_valid = read_quads(dir / "meta_valid.txt", s.entities, s.relations, s.times);
  s.meta_test = read_quads(dir / "meta_test.txt", s.entities, s.relations, s.times);
  if (std::filesystem::exists(dir / "discarded.txt")) {
    s.discarded = read_quads(dir / "discarded.txt", s.entities, s.relations, s.times);
  }
  s.unseen_train = read_ids(dir / "unseen_train.txt", s.entities);
  s.unseen_valid = read_ids(dir / "unseen_valid.txt", s.entities);
  s.unseen_test = read_ids(dir / "unseen_test.txt", s.entities);

  std::ifstream in(dir / "splits.json");
  if (in) {
    try {
      const auto m = nlohmann::json::parse(in);
      s.params.low = m.at("low").get<std::size_t>();
      s.params.high = m.at("high").get<std::size_t>();
      s.params.sample_frac = m.at("sample_frac").get<double>();
      s.params.ratio = m.at("ratio").get<std::array<double, 3>>();
      s.params.seed = m.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError((dir / "splits.json").string() + ": " + e.what());
    }
  }
  return s;
}

}  // namespace filt
