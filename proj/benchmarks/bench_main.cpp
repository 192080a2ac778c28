#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "bdlab/attack.hpp"
#include "bdlab/dpoe.hpp"
#include "bdlab/model.hpp"
#include "bdlab/rng.hpp"
#include "bdlab/synth.hpp"
#include "bdlab/text.hpp"

namespace {

using namespace bdlab;

const std::string kParagraph =
    "The restored print looks terrific , and the new score fits the mood ; "
    "still , the second act drags and the ending lands with a thud . A few "
    "scenes shine : the chase , the rooftop reveal , and the quiet coda .";

void BM_Tokenize(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(tokenize(kParagraph));
}
BENCHMARK(BM_Tokenize);

void BM_Featurize(benchmark::State& state) {
  const auto tokens = tokenize(kParagraph);
  for (auto _ : state) benchmark::DoNotOptimize(featurize(tokens, 2, 1u << 18));
}
BENCHMARK(BM_Featurize);

void BM_ForwardMlp(benchmark::State& state) {
  const FeatureConfig fc{1u << 18, 2};
  const auto params = init_params(ModelKind::mlp, {fc.dim, 2, kDefaultHidden}, 1);
  const auto x = featurize(tokenize(kParagraph), fc);
  for (auto _ : state) benchmark::DoNotOptimize(forward(params, x));
}
BENCHMARK(BM_ForwardMlp);

void BM_BackwardMlp(benchmark::State& state) {
  const FeatureConfig fc{1u << 18, 2};
  const auto params = init_params(ModelKind::mlp, {fc.dim, 2, kDefaultHidden}, 1);
  const auto x = featurize(tokenize(kParagraph), fc);
  const std::vector<double> dlogits{0.4, -0.4};
  for (auto _ : state) benchmark::DoNotOptimize(backward(params, x, dlogits));
}
BENCHMARK(BM_BackwardMlp);

void BM_PoeCombine(benchmark::State& state) {
  const ProbDist p{{0.7, 0.3}};
  const ProbDist b{{0.95, 0.05}};
  for (auto _ : state) benchmark::DoNotOptimize(poe_combine(p, b, 2.0));
}
BENCHMARK(BM_PoeCombine);

void BM_TrainEpoch(benchmark::State& state) {
  const auto [train_set, test_set] = generate_synthetic(100, 200, 1);
  PoisonConfig pc;
  pc.rate = 0.05;
  pc.target_label = 1;
  pc.trigger = default_word_trigger();
  pc.seed = 1;
  const auto poisoned = poison_train(train_set, pc);
  EnsembleConfig cfg;
  cfg.beta = 2.0;
  cfg.epochs = 1;
  const FeatureConfig fc{1u << 14, 2};
  for (auto _ : state) benchmark::DoNotOptimize(train(poisoned, cfg, fc));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  return 0;
}
