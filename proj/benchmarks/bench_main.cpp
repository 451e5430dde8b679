#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "dlvgen/corpus.hpp"
#include "dlvgen/generate.hpp"
#include "dlvgen/lexsel.hpp"
#include "dlvgen/ops.hpp"
#include "dlvgen/train.hpp"

using namespace dlvgen;

namespace {

Tensor random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Tensor t({r, c});
  for (auto& v : t.values()) v = rng.normal();
  return t;
}

struct Fixture {
  std::vector<DialogueExample> examples;
  DialogueModel model;
  std::vector<EncodedExample> encoded;

  static Fixture& get() {
    static Fixture f = [] {
      const auto c = corpus::generate_corpus(20, 200, 1);
      auto ex = corpus::to_examples(c.train);
      ModelConfig mc;
      DialogueModel m(mc, corpus::build_vocab(ex, mc.vocab_size), 1);
      auto enc = train::encode_all(m, ex);
      return Fixture{std::move(ex), std::move(m), std::move(enc)};
    }();
    return f;
  }
};

}  // namespace

static void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  const Tensor a = random_matrix(n, n, rng), b = random_matrix(n, n, rng);
  for (auto _ : state) {
    Graph g(false);
    benchmark::DoNotOptimize(matmul(g.constant(a), g.constant(b)).value().data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * n * n * n);
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(128)->Arg(256);

// One optimizer-free training step: full loss forward plus backward.
static void BM_LossForwardBackward(benchmark::State& state) {
  auto& f = Fixture::get();
  const auto batch_size = static_cast<std::size_t>(state.range(0));
  std::vector<const EncodedExample*> batch;
  for (std::size_t i = 0; i < batch_size; ++i) batch.push_back(&f.encoded[i]);
  const auto settings = train::LossSettings::from(TrainConfig{});
  Rng noise(5);
  for (auto _ : state) {
    f.model.params().zero_grad();
    Graph g;
    auto loss = train::compute_loss(g, f.model, batch, settings, noise);
    g.backward(loss.total);
  }
  state.SetItemsProcessed(state.iterations() * batch_size);
}
BENCHMARK(BM_LossForwardBackward)->Arg(1)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_GenerateCandidates(benchmark::State& state) {
  auto& f = Fixture::get();
  GenerationSettings gen;
  gen.n = 3;
  gen.beam = static_cast<std::size_t>(state.range(0));
  gen.max_len = 16;
  Rng rng(9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_candidates(f.model, f.examples[3].context, gen, rng));
  }
}
BENCHMARK(BM_GenerateCandidates)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

static void BM_LexScore(benchmark::State& state) {
  Rng rng(4);
  std::vector<std::string> tokens(static_cast<std::size_t>(state.range(0)));
  for (auto& t : tokens) t = "w" + std::to_string(rng.below(50));
  for (auto _ : state) benchmark::DoNotOptimize(lex::score(tokens));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LexScore)->Arg(32)->Arg(512);
BENCHMARK_MAIN();
