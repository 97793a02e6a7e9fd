#pragma once

#include <span>
#include <vector>

#include "filt/tape.hpp"
#include "filt/types.hpp"

namespace filt {

struct TemporalNeighbor {
  EntityId entity = 0;
  /// Possibly an inverse id (>= |R|): the owner is always on the object side.
  RelationId relation = 0;
  TimeId time = 0;
};

/// The support edges of an unseen entity, oriented towards it, plus the query context.
struct TemporalNeighborhood {
  EntityId owner = 0;
  std::vector<TemporalNeighbor> neighbors;
  TimeId query_time = 0;
  RelationId query_relation = 0;
};

/// Orients each support quadruple so the owner is the object: (s, r, owner, t) stays,
/// (owner, r, o, t) becomes (o, r^-1, owner, t).
TemporalNeighborhood make_neighborhood(EntityId owner, std::span<const Quadruple> support,
                                       std::size_t num_relations, TimeId query_time = 0,
                                       RelationId query_relation = 0);

/// Normalized time-difference weights: w_i = exp(1/|t_q - t_i|), or lambda when t_i == t_q.
std::vector<double> filt_time_weights(std::span<const TimeId> times, TimeId query_time,
                                      double lambda);

/// W_g (h_entity || h_relation).
Var neighbor_message(Tape& t, Var w_g, Var entity, Var relation);

/// sum_i gamma_i * message_i with gamma from filt_time_weights.
Var aggregate_filt(Tape& t, std::span<const Var> messages, std::span<const TimeId> times,
                   TimeId query_time, double lambda);

/// Time-difference encoder over (entity, relation, time) inputs.
Var encode_filt(Tape& t, std::span<const Var> entities, std::span<const Var> relations,
                std::span<const TimeId> times, Var w_g, TimeId query_time, double lambda);

/// (1/K) sum_i W_{r_i} h_i; time-blind.
Var encode_rgcn_mean(Tape& t, std::span<const Var> entities, std::span<const Var> relation_mats);

/// f(h || Phi(t)) = LeakyReLU(W_f [h; Phi(t)] + b_f).
Var time_aware_entity(Tape& t, Var entity, Var time_features, Var w_f, Var b_f);

/// Mean of W_g (f(h_i || Phi(t_i)) || h_{r_i}) with Time2Vec features.
Var encode_time2vec(Tape& t, std::span<const Var> entities, std::span<const Var> relations,
                    std::span<const TimeId> times, Var w_g, Var w_f, Var b_f, Var freq, Var phase);

/// Same aggregation as encode_time2vec with cosine features sqrt(1/d_t) cos(w t + phi).
Var encode_functional_time(Tape& t, std::span<const Var> entities, std::span<const Var> relations,
                           std::span<const TimeId> times, Var w_g, Var w_f, Var b_f, Var freq,
                           Var phase);

/// gamma = softmax_i LeakyReLU((W_Q [h_rq; Phi(t_q)]) . (W_K [h_ri; Phi(t_i)])), Phi cosine.
Var attention_weights(Tape& t, std::span<const Var> relations, std::span<const TimeId> times,
                      Var query_relation, TimeId query_time, Var w_q, Var w_k, Var freq,
                      Var phase);

/// sum_i gamma_i W_g (h_i || h_{r_i}) with gamma from attention_weights.
Var encode_time_attention(Tape& t, std::span<const Var> entities, std::span<const Var> relations,
                          std::span<const TimeId> times, Var w_g, Var w_q, Var w_k, Var freq,
                          Var phase, Var query_relation, TimeId query_time);

}  // namespace filt
