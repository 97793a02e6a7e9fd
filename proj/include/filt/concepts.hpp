#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "filt/params.hpp"
#include "filt/tape.hpp"
#include "filt/tkg_data.hpp"

namespace filt {

enum class Activation { leaky_relu, relu, tanh };

std::string_view to_string(Activation act);
Activation parse_activation(std::string_view name);
Var activate(Tape& t, Var x, Activation act);

/// Row-major table view: `rows` vectors of length `dim`.
struct TableView {
  std::span<const double> values;
  std::size_t dim = 0;
  std::size_t rows() const { return dim == 0 ? 0 : values.size() / dim; }
  std::span<const double> row(std::size_t r) const { return values.subspan(r * dim, dim); }
};

struct ConceptInitResult {
  std::vector<double> embeddings;  // |C| x d
  /// Concepts with no contributing entity; their rows are left zero.
  std::vector<ConceptId> empty;
};

/// Mean of the contributing entities' embeddings per concept. Only entities with
/// `contributes[e]` set take part (background entities when called from training).
/// Throws if a concept ends up with no contributor, unless `allow_empty`.
ConceptInitResult init_concepts(TableView entity_emb, const ConceptMap& concepts,
                                const std::vector<bool>& contributes, bool allow_empty = false);

/// One simultaneous correction pass: each concept becomes the softmax(h_e . h_c)-weighted
/// sum of its contributing entities, with logits read from the uncorrected table.
/// Concepts without contributors are copied through unchanged.
std::vector<double> correct_concepts(TableView concept_emb, TableView entity_emb,
                                     const ConceptMap& concepts,
                                     const std::vector<bool>& contributes);

/// Attention weights a concept assigns to its neighborhood (softmax of h_e . h_c).
std::vector<double> concept_attention(std::span<const double> concept_vec,
                                      const std::vector<std::span<const double>>& entity_vecs);

/// softmax(h_c . h_e)-weighted sum of the entity's concept vectors.
/// `concept_vecs` must be non-empty; differentiable in all inputs.
Var entity_concept_vector(Tape& t, Var entity_vec, std::span<const Var> concept_vecs);

/// h_e + delta1 * dropout(sigma(W_c1 h_concept)).
Var inject_upper(Tape& t, Var entity_vec, Var concept_vec, Var w_c1, Var delta1,
                 double dropout_p, bool train, Rng& rng,
                 Activation act = Activation::leaky_relu);

/// h + delta2 * dropout(sigma(W_c2 h_concept)); same shape as inject_upper.
Var inject_lower(Tape& t, Var aggregated, Var concept_vec, Var w_c2, Var delta2,
                 double dropout_p, bool train, Rng& rng,
                 Activation act = Activation::leaky_relu);

}  // namespace filt
