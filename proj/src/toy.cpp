#include "filt/toy.hpp"

namespace filt {

ToyFixture make_toy_fixture(EncoderKind encoder, ConceptVariant variant, std::uint64_t seed) {
  constexpr std::size_t kEntities = 20, kSeen = 15, kRelations = 4, kConcepts = 5, kQueries = 2;
  ToyFixture fx;
  Rng rng(seed);

  for (std::size_t c = 0; c < kConcepts; ++c) fx.concepts.concepts.intern("C" + std::to_string(c));
  fx.concepts.region = 0;
  fx.concepts.concepts_of.resize(kEntities);
  for (std::size_t e = 0; e < kEntities; ++e) {
    const auto a = static_cast<ConceptId>(e % kConcepts);
    fx.concepts.concepts_of[e].push_back(a);
    if (e % 3 == 0) fx.concepts.concepts_of[e].push_back(static_cast<ConceptId>((a + 2) % kConcepts));
  }

  ModelDims dims;
  dims.num_entities = kEntities;
  dims.num_relations = kRelations;
  dims.num_concepts = kConcepts;
  dims.dim = 8;
  dims.time_dim = 4;
  dims.encoder = encoder;
  fx.params = init_params(dims, seed);
  for (ParamTensor* t : {&fx.params.entity, &fx.params.relation, &fx.params.concept_emb}) {
    for (double& v : t->values) v = rng.uniform(-0.6, 0.6);
  }
  fx.params.delta1.values[0] = 0.8;
  fx.params.delta2.values[0] = 1.2;
  for (ParamTensor* t : {&fx.params.w_q, &fx.params.w_k}) {
    for (double& v : t->values) v *= 3.0;
  }
  if (fx.params.b_f.allocated()) {
    for (double& v : fx.params.b_f.values) v = rng.uniform(-0.2, 0.2);
  }
  if (fx.params.time_phase.allocated()) {
    for (double& v : fx.params.time_phase.values) v = rng.uniform(-0.5, 0.5);
  }

  fx.task.shots = 3;
  fx.task.seed = seed;
  for (EntityId e = kSeen; e < kEntities; ++e) {
    EntityEpisode ep;
    ep.entity = e;
    for (std::size_t i = 0; i < 3 + kQueries; ++i) {
      const auto partner = static_cast<EntityId>(rng.uniform_index(kSeen));
      const auto r = static_cast<RelationId>(rng.uniform_index(kRelations));
      // One support shares the first query's timestamp to exercise the equal-time rule.
      const auto t = static_cast<TimeId>(i == 1 ? 7 : (i == 3 ? 7 : rng.uniform_index(12)));
      const Quadruple q = (i + e) % 2 == 0 ? Quadruple{e, r, partner, t} : Quadruple{partner, r, e, t};
      (i < 3 ? ep.support : ep.query).push_back(q);
    }
    fx.task.entities.push_back(std::move(ep));
  }

  std::vector<EntityId> pool;
  for (EntityId e = 0; e < kSeen; ++e) pool.push_back(e);
  fx.negatives = draw_episode_negatives(fx.task, pool, 3, rng);

  fx.forward.concepts = variant;
  fx.forward.lambda = 0.2;
  fx.forward.dropout = 0.3;
  fx.forward.train = true;
  return fx;
}

LossFn toy_loss(ToyFixture& fx) {
  return [&fx](bool with_grad) {
    Tape tape;
    FiltGraph graph(tape, fx.params, fx.concepts, fx.forward, fx.dropout_seed);
    std::vector<Var> terms;
    Var loss = episode_loss(graph, fx.task, fx.negatives, LossConfig{2.0, false}, &terms);
    LossProbe probe;
    probe.value = tape.scalar_value(loss);
    for (Var v : terms) probe.terms.push_back(tape.scalar_value(v));
    if (with_grad) tape.backward(loss);
    probe.branches = tape.branch_pattern();
    return probe;
  };
}

GradcheckReport gradcheck_toy(EncoderKind encoder, ConceptVariant variant,
                              const GradcheckOptions& options, std::uint64_t fixture_seed) {
  ToyFixture fx = make_toy_fixture(encoder, variant, fixture_seed);
  const auto tensors = fx.params.tensors();
  return gradcheck(toy_loss(fx), tensors, options);
}

}  // namespace filt
