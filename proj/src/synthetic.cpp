#include "filt/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "filt/random.hpp"

namespace filt {

namespace {

std::string name(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%03zu", prefix, i);
  return buf;
}

}  // namespace

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
  if (spec.groups < 2 || spec.hubs_per_group < 2) throw ArgumentError("need at least 2 groups of 2 hubs");
  if (spec.min_facts < 2 || spec.max_facts < spec.min_facts) throw ArgumentError("bad fact range");
  if (spec.timestamps < spec.max_facts) throw ArgumentError("need at least max_facts timestamps");
  if (spec.relations < 1) throw ArgumentError("need at least one relation");

  Rng rng(spec.seed);
  const std::size_t num_hubs = spec.groups * spec.hubs_per_group;
  using Fact = std::tuple<std::string, std::size_t, std::string, std::size_t>;
  std::vector<Fact> facts;
  std::set<Fact> seen;
  auto emit = [&](const std::string& s, std::size_t r, const std::string& o, std::size_t t) {
    Fact f{s, r, o, t};
    if (!seen.insert(f).second) return false;
    facts.push_back(std::move(f));
    return true;
  };
  auto hub = [&](std::size_t group, std::size_t k) { return name("hub_", group * spec.hubs_per_group + k); };

  // Within-group hub edges; the first relation half is reserved for them.
  const std::size_t hub_rel = std::max<std::size_t>(1, spec.relations / 2);
  for (std::size_t h = 0; h < num_hubs; ++h) {
    const std::size_t g = h / spec.hubs_per_group;
    for (std::size_t k = 0; k < spec.hub_degree;) {
      std::size_t other = rng.uniform_index(spec.hubs_per_group - 1);
      if (other >= h % spec.hubs_per_group) ++other;
      if (emit(name("hub_", h), rng.uniform_index(hub_rel), hub(g, other), rng.uniform_index(spec.timestamps))) ++k;
    }
  }

  // Tail entities: sorted distinct timestamps, one group before the change point and
  // another after it. Within a group, lower-index hubs are preferred.
  const std::size_t tail_rel_lo = spec.relations > 1 ? hub_rel : 0;
  const std::size_t tail_rel_n = spec.relations - tail_rel_lo;
  for (std::size_t i = 0; i < spec.tails; ++i) {
    const std::size_t n = spec.min_facts + rng.uniform_index(spec.max_facts - spec.min_facts + 1);
    std::vector<std::size_t> times(spec.timestamps);
    for (std::size_t t = 0; t < times.size(); ++t) times[t] = t;
    rng.shuffle(std::span<std::size_t>(times));
    times.resize(n);
    std::sort(times.begin(), times.end());
    const std::size_t first = rng.uniform_index(spec.groups);
    std::size_t second = rng.uniform_index(spec.groups - 1);
    if (second >= first) ++second;
    const std::size_t change = n / 3 + rng.uniform_index(n / 3 + 1);
    const std::string tail = name("tail_", i);
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t g = j < change ? first : second;
      for (;;) {
        const double u = rng.uniform01();
        const auto k = static_cast<std::size_t>(u * u * static_cast<double>(spec.hubs_per_group));
        const std::size_t r = tail_rel_lo + rng.uniform_index(tail_rel_n);
        const bool tail_subject = rng.uniform01() < 0.5;
        const bool ok = tail_subject ? emit(tail, r, hub(g, k), times[j]) : emit(hub(g, k), r, tail, times[j]);
        if (ok) break;
      }
    }
  }

  SyntheticCorpus out;
  std::ostringstream q;
  for (const auto& [s, r, o, t] : facts) q << s << '\t' << name("rel_", r) << '\t' << o << '\t' << t << '\n';
  out.quadruples = q.str();
  std::ostringstream c;
  for (std::size_t h = 0; h < num_hubs; ++h) {
    c << name("hub_", h) << '\t' << name("Sector", h / spec.hubs_per_group) << '\n';
  }
  out.concepts = c.str();
  return out;
}

SplitParams synthetic_split_params(std::uint64_t seed) {
  SplitParams p;
  p.ratio = {0.6, 0.1, 0.3};
  p.seed = seed;
  return p;
}

void write_synthetic(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [file, text] : {std::pair{"quadruples.txt", &corpus.quadruples},
                                   std::pair{"concepts.txt", &corpus.concepts}}) {
    std::ofstream out(dir / file, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / file).string());
    out << *text;
  }
}

}  // namespace filt
