#include <benchmark/benchmark.h>

#include "entrack/crf.hpp"
#include "entrack/lstm.hpp"
#include "entrack/network.hpp"
#include "entrack/random.hpp"
#include "entrack/synth.hpp"
#include "entrack/trainer.hpp"

namespace {

using namespace entrack;

struct CrfProblem {
  crf::TagScheme scheme{crf::SchemeKind::Full6};
  Tensor phi, psi;

  explicit CrfProblem(std::size_t steps) {
    Rng rng(3);
    const std::size_t k = scheme.size();
    phi = Tensor::zeros({steps, k});
    for (double& x : phi.values) x = rng.normal();
    Tensor raw = Tensor::zeros({k + 2, k + 2});
    for (double& x : raw.values) x = rng.normal();
    psi = crf::effective_transitions(raw, scheme);
  }
};

void BM_CrfForward(benchmark::State& state) {
  CrfProblem p(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(crf::log_partition(p.phi, p.psi, p.scheme));
}
BENCHMARK(BM_CrfForward)->Arg(8)->Arg(32)->Arg(128);

void BM_CrfViterbi(benchmark::State& state) {
  CrfProblem p(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(crf::viterbi(p.phi, p.psi, p.scheme));
}
BENCHMARK(BM_CrfViterbi)->Arg(8)->Arg(32)->Arg(128);

void BM_LstmCell(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  const std::size_t input = 2 * hidden;
  ParameterStore store;
  Rng rng(5);
  auto w = LstmWeights::create(store, "cell", input, hidden, rng, 0.1);
  Tensor x = Tensor::zeros({input});
  for (double& v : x.values) v = rng.normal();
  for (auto _ : state) {
    Tape tape;
    auto out = run_lstm(tape, store, w, {tape.constant(x)});
    benchmark::DoNotOptimize(out.back().value().values.data());
  }
}
BENCHMARK(BM_LstmCell)->Arg(32)->Arg(100);

void BM_ParagraphLossAndGradient(benchmark::State& state) {
  SynthConfig sc;
  sc.min_steps = sc.max_steps = 6;
  sc.min_entities = sc.max_entities = 3;
  auto corpus = synth_corpus(11, 1, sc);
  const auto embeddings = synth_embeddings(sc);
  assign_embedding_ids(corpus, embeddings);
  ModelConfig mc;
  mc.token_hidden = mc.entity_hidden = mc.location_hidden = static_cast<std::size_t>(state.range(0));
  const auto model = Model::create(mc, embeddings, 1);
  const auto prepared = prepare(corpus[0], model.scheme());
  for (auto _ : state) benchmark::DoNotOptimize(paragraph_gradient(model, prepared, 1.0).loss.state_nll);
}
BENCHMARK(BM_ParagraphLossAndGradient)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
