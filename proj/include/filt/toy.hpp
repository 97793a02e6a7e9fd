#pragma once

#include <cstdint>

#include "filt/optim.hpp"
#include "filt/scoring.hpp"

namespace filt {

/// Small hand-sized model used by gradcheck: |E| = 20 (15 seen, 5 unseen), |R| = 4,
/// |C| = 5, d = 8, d_t = 4, K = 3, two queries and three negatives per unseen entity.
struct ToyFixture {
  ConceptMap concepts;
  ModelParams params;
  EpisodeTask task;
  EpisodeNegatives negatives;
  ForwardConfig forward;
  std::uint64_t dropout_seed = 11;
};

ToyFixture make_toy_fixture(EncoderKind encoder, ConceptVariant variant, std::uint64_t seed = 3);

/// Episode loss of the fixture as a gradcheck probe (dropout masks fixed by the seed).
LossFn toy_loss(ToyFixture& fixture);

GradcheckReport gradcheck_toy(EncoderKind encoder, ConceptVariant variant,
                              const GradcheckOptions& options = {}, std::uint64_t fixture_seed = 3);

}  // namespace filt
