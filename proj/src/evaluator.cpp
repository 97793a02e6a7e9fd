#include "filt/evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <string>
#include <iomanip>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "filt/scoring.hpp"

namespace filt {

namespace {

std::span<const double> table_row(std::span<const double> table, std::size_t dim, EntityId e) {
  if ((static_cast<std::size_t>(e) + 1) * dim > table.size()) {
    throw ArgumentError("entity " + std::to_string(e) + " is outside the entity table");
  }
  return table.subspan(static_cast<std::size_t>(e) * dim, dim);
}

double candidate_score(std::span<const double> encoded, std::span<const double> relation_vec,
                       bool owner_subject, std::span<const double> candidate) {
  return owner_subject ? complex_score_value(encoded, relation_vec, candidate)
                       : complex_score_value(candidate, relation_vec, encoded);
}

}  // namespace

FilterIndex::FilterIndex(const std::vector<Quadruple>& facts) {
  for (const auto& q : facts) {
    index_[Key{q.subject, q.relation, q.time, true}].push_back(q.object);
    index_[Key{q.object, q.relation, q.time, false}].push_back(q.subject);
  }
  for (auto& [k, v] : index_) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
}

std::size_t FilterIndex::KeyHash::operator()(const Key& k) const {
  std::uint64_t h = mix_seed(k.entity, k.relation);
  h = mix_seed(h, (static_cast<std::uint64_t>(k.time) << 1) | (k.predict_object ? 1u : 0u));
  return static_cast<std::size_t>(h);
}

const std::vector<EntityId>& FilterIndex::known(EntityId fixed, RelationId relation, TimeId time,
                                                bool predict_object) const {
  auto it = index_.find(Key{fixed, relation, time, predict_object});
  return it == index_.end() ? empty_ : it->second;
}

std::size_t pessimistic_rank(std::span<const double> scores, std::size_t truth_index,
                             const std::vector<bool>& keep) {
  if (truth_index >= scores.size()) throw ArgumentError("ground truth index out of range");
  if (keep.size() != scores.size()) throw ArgumentError("keep mask does not match scores");
  if (!keep[truth_index]) throw Error("internal: ground truth was filtered out");
  const double truth = scores[truth_index];
  std::size_t rank = 1;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i == truth_index || !keep[i]) continue;
    if (scores[i] >= truth) ++rank;
  }
  return rank;
}

RankResult rank_query(std::span<const double> encoded, std::span<const double> relation_vec,
                      const Quadruple& query, EntityId owner, std::span<const EntityId> candidates,
                      const std::vector<EntityId>& known_true, std::span<const double> entity_table,
                      bool filtered) {
  const std::size_t dim = encoded.size();
  const bool subj = owner_is_subject(query, owner);
  const EntityId truth = other_entity(query, owner);

  std::vector<double> scores(candidates.size());
  std::vector<bool> keep(candidates.size(), true);
  std::size_t truth_index = candidates.size();
  std::size_t kept = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const EntityId c = candidates[i];
    if (c == truth && truth_index == candidates.size()) {
      truth_index = i;
    } else if (c == truth) {
      keep[i] = false;  // duplicate listing of the ground truth
    } else if (filtered && std::binary_search(known_true.begin(), known_true.end(), c)) {
      keep[i] = false;
    }
    if (keep[i]) {
      scores[i] = candidate_score(encoded, relation_vec, subj, table_row(entity_table, dim, c));
      ++kept;
    }
  }
  if (truth_index == candidates.size()) {
    throw ArgumentError("ground truth entity " + std::to_string(truth) + " is not a candidate");
  }
  RankResult result;
  result.query = query;
  result.direction = subj ? Direction::predict_object : Direction::predict_subject;
  result.rank = pessimistic_rank(scores, truth_index, keep);
  result.filtered = filtered;
  result.num_candidates = kept;
  return result;
}

std::size_t oracle_rank(std::span<const double> encoded, std::span<const double> relation_vec,
                        const Quadruple& query, EntityId owner, std::span<const EntityId> candidates,
                        const std::vector<EntityId>& known_true,
                        std::span<const double> entity_table, bool filtered) {
  const std::size_t dim = encoded.size();
  const bool subj = owner_is_subject(query, owner);
  const EntityId truth = other_entity(query, owner);

  std::vector<EntityId> pool(candidates.begin(), candidates.end());
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  if (filtered) {
    std::erase_if(pool, [&](EntityId c) {
      return c != truth && std::find(known_true.begin(), known_true.end(), c) != known_true.end();
    });
  }
  struct Entry {
    double score;
    bool is_truth;
  };
  std::vector<Entry> entries;
  for (EntityId c : pool) {
    entries.push_back({candidate_score(encoded, relation_vec, subj, table_row(entity_table, dim, c)),
                       c == truth});
  }
  // Descending by score; within a tie the ground truth sorts last.
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.score != b.score) return a.score > b.score;
    return !a.is_truth && b.is_truth;
  });
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].is_truth) return i + 1;
  }
  throw ArgumentError("ground truth entity " + std::to_string(truth) + " is not a candidate");
}

Metrics metrics_from_ranks(std::span<const std::size_t> ranks) {
  if (ranks.empty()) throw ArgumentError("no ranks to aggregate");
  Metrics m;
  for (std::size_t r : ranks) {
    if (r == 0) throw ArgumentError("rank must be positive");
    m.mrr += 1.0 / static_cast<double>(r);
    m.hits1 += r <= 1 ? 1.0 : 0.0;
    m.hits3 += r <= 3 ? 1.0 : 0.0;
    m.hits10 += r <= 10 ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(ranks.size());
  m.mrr /= n;
  m.hits1 /= n;
  m.hits3 /= n;
  m.hits10 /= n;
  m.num_queries = ranks.size();
  return m;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::ostringstream out;
  out << "dataset,shot,encoder,MRR,H@1,H@3,H@10,num_queries,seed\n";
  out << std::fixed << std::setprecision(6);
  for (const auto& r : rows) {
    out << r.dataset << ',' << r.shot << ',' << r.encoder << ',' << r.metrics.mrr << ','
        << r.metrics.hits1 << ',' << r.metrics.hits3 << ',' << r.metrics.hits10 << ','
        << r.metrics.num_queries << ',' << r.seed << '\n';
  }
  return out.str();
}

std::string metrics_json(const std::vector<MetricsRow>& rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["dataset"] = r.dataset;
    j["shot"] = r.shot;
    j["encoder"] = r.encoder;
    j["MRR"] = r.metrics.mrr;
    j["H@1"] = r.metrics.hits1;
    j["H@3"] = r.metrics.hits3;
    j["H@10"] = r.metrics.hits10;
    j["num_queries"] = r.metrics.num_queries;
    j["seed"] = r.seed;
    arr.push_back(j);
  }
  return arr.dump(2) + "\n";
}

std::vector<EntityId> all_entities(std::size_t n) {
  std::vector<EntityId> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<EntityId>(i);
  return out;
}

EvalResult evaluate(ModelParams& params, const ConceptMap& concepts, const EpisodeTask& episode,
                    std::span<const EntityId> candidates, const FilterIndex& filter,
                    const EvalConfig& config) {
  if (episode.num_queries() == 0) throw ArgumentError("evaluation episode has no queries");
  ForwardConfig fwd = config.forward;
  fwd.train = false;
  const std::vector<double> table = injected_entity_table(params, concepts, fwd);
  const std::size_t num_relations = params.dims.num_relations;
  const std::size_t n = episode.entities.size();

  struct Slot {
    std::vector<RankResult> ranks;
    std::vector<double> true_scores;
  };
  std::vector<Slot> slots(n);
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(std::max<std::size_t>(1, config.workers));

  auto work = [&](std::size_t worker) {
    try {
      for (std::size_t i = next++; i < n; i = next++) {
        const auto& ep = episode.entities[i];
        if (ep.query.empty() || ep.support.empty()) continue;
        Tape tape;
        FiltGraph graph(tape, params, concepts, fwd, 0, &table);
        const OwnerContext& ctx = graph.owner(ep.entity, ep.support);
        for (const auto& q : ep.query) {
          Var enc = graph.encode(ctx, q.time, oriented_query_relation(q, ep.entity, num_relations));
          const auto encoded = tape.value(enc);
          const auto rel = params.relation.row(q.relation);
          const bool subj = owner_is_subject(q, ep.entity);
          const EntityId fixed = subj ? q.subject : q.object;
          const auto& known = filter.known(fixed, q.relation, q.time, subj);
          slots[i].ranks.push_back(
              rank_query(encoded, rel, q, ep.entity, candidates, known, table, config.filtered));
          const auto truth_row = table_row(table, params.dims.dim, other_entity(q, ep.entity));
          slots[i].true_scores.push_back(candidate_score(encoded, rel, subj, truth_row));
        }
      }
    } catch (...) {
      errors[worker] = std::current_exception();
      next = n;
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, config.workers);
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work, w);
    for (auto& th : threads) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  EvalResult result;
  for (auto& s : slots) {
    result.ranks.insert(result.ranks.end(), s.ranks.begin(), s.ranks.end());
    result.true_scores.insert(result.true_scores.end(), s.true_scores.begin(), s.true_scores.end());
  }
  if (result.ranks.empty()) throw ArgumentError("evaluation episode has no usable queries");
  std::vector<std::size_t> ranks;
  for (const auto& r : result.ranks) ranks.push_back(r.rank);
  result.metrics = metrics_from_ranks(ranks);
  return result;
}

}  // namespace filt
