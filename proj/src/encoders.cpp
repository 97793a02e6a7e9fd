#include "filt/encoders.hpp"

#include <cmath>
#include <cstdlib>

#include "filt/episodes.hpp"

namespace filt {

namespace {

void require_neighbors(std::size_t k, const char* who) {
  if (k == 0) throw ArgumentError(std::string(who) + ": empty neighborhood");
}

void require_same(std::size_t a, std::size_t b, const char* who) {
  if (a != b) throw ShapeError(std::string(who) + ": mismatched neighbor input lengths");
}

}  // namespace

TemporalNeighborhood make_neighborhood(EntityId owner, std::span<const Quadruple> support,
                                       std::size_t num_relations, TimeId query_time,
                                       RelationId query_relation) {
  TemporalNeighborhood n;
  n.owner = owner;
  n.query_time = query_time;
  n.query_relation = query_relation;
  for (const auto& q : support) {
    if (q.object == owner) {
      n.neighbors.push_back({q.subject, q.relation, q.time});
    } else if (q.subject == owner) {
      const Quadruple inv = add_inverse(q, num_relations);
      n.neighbors.push_back({inv.subject, inv.relation, inv.time});
    } else {
      throw ArgumentError("support quadruple does not contain its owner entity");
    }
  }
  return n;
}

std::vector<double> filt_time_weights(std::span<const TimeId> times, TimeId query_time,
                                      double lambda) {
  require_neighbors(times.size(), "filt_time_weights");
  if (!(lambda > 0.0)) throw ArgumentError("lambda must be positive");
  std::vector<double> w(times.size());
  double total = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto diff = std::llabs(static_cast<long long>(query_time) - static_cast<long long>(times[i]));
    w[i] = diff == 0 ? lambda : std::exp(1.0 / static_cast<double>(diff));
    total += w[i];
  }
  for (double& v : w) v /= total;
  return w;
}

Var neighbor_message(Tape& t, Var w_g, Var entity, Var relation) {
  return linear(t, w_g, concat(t, entity, relation));
}

Var aggregate_filt(Tape& t, std::span<const Var> messages, std::span<const TimeId> times,
                   TimeId query_time, double lambda) {
  require_same(messages.size(), times.size(), "aggregate_filt");
  Var gamma = t.constant(filt_time_weights(times, query_time, lambda));
  return weighted_sum(t, gamma, messages);
}

Var encode_filt(Tape& t, std::span<const Var> entities, std::span<const Var> relations,
                std::span<const TimeId> times, Var w_g, TimeId query_time, double lambda) {
  require_neighbors(entities.size(), "encode_filt");
  require_same(entities.size(), relations.size(), "encode_filt");
  std::vector<Var> messages;
  messages.reserve(entities.size());
  for (std::size_t i = 0; i < entities.size(); ++i) {
    messages.push_back(neighbor_message(t, w_g, entities[i], relations[i]));
  }
  return aggregate_filt(t, messages, times, query_time, lambda);
}

Var encode_rgcn_mean(Tape& t, std::span<const Var> entities, std::span<const Var> relation_mats) {
  require_neighbors(entities.size(), "encode_rgcn_mean");
  require_same(entities.size(), relation_mats.size(), "encode_rgcn_mean");
  std::vector<Var> transformed;
  transformed.reserve(entities.size());
  for (std::size_t i = 0; i < entities.size(); ++i) {
    transformed.push_back(linear(t, relation_mats[i], entities[i]));
  }
  return mean(t, transformed);
}

Var time_aware_entity(Tape& t, Var entity, Var time_features, Var w_f, Var b_f) {
  return leaky_relu(t, add(t, linear(t, w_f, concat(t, entity, time_features)), b_f));
}

namespace {

template <typename TimeFeatures>
Var encode_time_features(Tape& t, std::span<const Var> entities, std::span<const Var> relations,
                         std::span<const TimeId> times, Var w_g, Var w_f, Var b_f,
                         TimeFeatures features, const char* who) {
  require_neighbors(entities.size(), who);
  require_same(entities.size(), relations.size(), who);
  require_same(entities.size(), times.size(), who);
  std::vector<Var> messages;
  messages.reserve(entities.size());
  for (std::size_t i = 0; i < entities.size(); ++i) {
    Var h = time_aware_entity(t, entities[i], features(static_cast<double>(times[i])), w_f, b_f);
    messages.push_back(neighbor_message(t, w_g, h, relations[i]));
  }
  return mean(t, messages);
}

}  // namespace

Var encode_time2vec(Tape& t, std::span<const Var> entities, std::span<const Var> relations,
                    std::span<const TimeId> times, Var w_g, Var w_f, Var b_f, Var freq, Var phase) {
  return encode_time_features(
      t, entities, relations, times, w_g, w_f, b_f,
      [&](double time) { return time2vec(t, freq, phase, time); }, "encode_time2vec");
}

Var encode_functional_time(Tape& t, std::span<const Var> entities, std::span<const Var> relations,
                           std::span<const TimeId> times, Var w_g, Var w_f, Var b_f, Var freq,
                           Var phase) {
  return encode_time_features(
      t, entities, relations, times, w_g, w_f, b_f,
      [&](double time) { return functional_time(t, freq, phase, time); },
      "encode_functional_time");
}

Var attention_weights(Tape& t, std::span<const Var> relations, std::span<const TimeId> times,
                      Var query_relation, TimeId query_time, Var w_q, Var w_k, Var freq,
                      Var phase) {
  require_neighbors(relations.size(), "attention_weights");
  require_same(relations.size(), times.size(), "attention_weights");
  Var query = linear(t, w_q,
                     concat(t, query_relation,
                            functional_time(t, freq, phase, static_cast<double>(query_time))));
  std::vector<Var> logits;
  logits.reserve(relations.size());
  for (std::size_t i = 0; i < relations.size(); ++i) {
    Var key = linear(t, w_k, concat(t, relations[i],
                                    functional_time(t, freq, phase, static_cast<double>(times[i]))));
    logits.push_back(leaky_relu(t, dot(t, query, key)));
  }
  return softmax(t, stack(t, logits));
}

Var encode_time_attention(Tape& t, std::span<const Var> entities, std::span<const Var> relations,
                          std::span<const TimeId> times, Var w_g, Var w_q, Var w_k, Var freq,
                          Var phase, Var query_relation, TimeId query_time) {
  require_neighbors(entities.size(), "encode_time_attention");
  require_same(entities.size(), relations.size(), "encode_time_attention");
  Var gamma = attention_weights(t, relations, times, query_relation, query_time, w_q, w_k, freq, phase);
  std::vector<Var> messages;
  messages.reserve(entities.size());
  for (std::size_t i = 0; i < entities.size(); ++i) {
    messages.push_back(neighbor_message(t, w_g, entities[i], relations[i]));
  }
  return weighted_sum(t, gamma, messages);
}

}  // namespace filt
