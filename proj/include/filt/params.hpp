#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "filt/tensor.hpp"

namespace filt {

/// Graph encoder used for unseen entities.
enum class EncoderKind {
  filt,        // time-difference weights
  rgcn,        // B1: relation-specific matrices, mean, time-blind
  time2vec,    // B2
  functional,  // B3: cosine time features
  attention,   // B4: time-aware query/key attention
};

/// Which concept branches feed the model.
enum class ConceptVariant {
  full,
  none,      // A1
  no_lower,  // A2
  no_upper,  // A3
};

std::string_view to_string(EncoderKind kind);
std::string_view to_string(ConceptVariant variant);
EncoderKind parse_encoder(std::string_view name);
ConceptVariant parse_concept_variant(std::string_view name);

struct ModelDims {
  std::size_t num_entities = 0;
  /// Forward relations; the relation table holds 2x this (inverse relations appended).
  std::size_t num_relations = 0;
  std::size_t num_concepts = 0;
  std::size_t dim = 100;
  std::size_t time_dim = 8;
  EncoderKind encoder = EncoderKind::filt;

  /// Length of the time feature vector fed to f / attention for this encoder.
  std::size_t time_features() const;
};

/// All trainable tensors. Variant-specific tensors are left unallocated (empty
/// shape) when the encoder does not use them.
struct ModelParams {
  ModelDims dims;

  ParamTensor entity;    // |E| x d
  ParamTensor relation;  // 2|R| x d
  ParamTensor concept_emb;  // |C| x d
  ParamTensor w_c1;      // d x d, upper branch
  ParamTensor w_c2;      // d x d, lower branch
  ParamTensor delta1;    // [1]
  ParamTensor delta2;    // [1]

  ParamTensor w_g;         // d x 2d (all encoders but rgcn)
  ParamTensor w_rel;       // 2|R| x d x d (rgcn)
  ParamTensor time_freq;   // time_features (time2vec, functional, attention)
  ParamTensor time_phase;  // time_features
  ParamTensor w_f;         // d x (d + time_features) (time2vec, functional)
  ParamTensor b_f;         // d
  ParamTensor w_q;         // d x (d + time_features) (attention)
  ParamTensor w_k;         // d x (d + time_features)

  /// Allocated tensors in a fixed order.
  std::vector<ParamTensor*> tensors();
  std::vector<const ParamTensor*> tensors() const;
  ParamTensor* find(std::string_view name);
};

/// Allocates tensors for `dims` with every value zero.
ModelParams allocate_params(const ModelDims& dims);

/// Xavier-uniform matrices, uniform(-0.5/d, 0.5/d) embeddings, delta1 = delta2 = 1.
/// Concept tensors are always allocated and drawn so that every concept variant
/// consumes the same random stream.
ModelParams init_params(const ModelDims& dims, std::uint64_t seed);

}  // namespace filt
