#include <benchmark/benchmark.h>

#include <vector>

#include "somno/mlp.hpp"
#include "somno/random.hpp"
#include "somno/spectral.hpp"
#include "somno/synth.hpp"

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  somno::Random rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = 20.0 * rng.normal();
  return x;
}

void BM_PowerSpectrum(benchmark::State& state) {
  const auto x = noise(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(somno::power_spectrum(x, 256.0));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PowerSpectrum)->Arg(7680)->Arg(3840);

void BM_EpochFeatures(benchmark::State& state) {
  const auto epoch = somno::synth_epoch(somno::default_profiles()[2], 256.0, 30.0, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(somno::epoch_features(epoch));
  }
}
BENCHMARK(BM_EpochFeatures);

void BM_ExtractFeatures(benchmark::State& state) {
  std::vector<somno::ProfileCount> plan;
  for (const auto& p : somno::default_profiles()) {
    plan.push_back({p, static_cast<std::size_t>(state.range(0))});
  }
  const auto rec = somno::synth_recording(plan, 256.0, 5);
  const std::vector<somno::SampleSeries> channels{rec.series};
  for (auto _ : state) {
    benchmark::DoNotOptimize(somno::extract_features(channels));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(plan.size()) *
                          state.range(0));
}
BENCHMARK(BM_ExtractFeatures)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  auto mlp = somno::Mlp::init({5, static_cast<std::size_t>(state.range(0)), 6}, 7);
  const std::vector<double> x{0.2, 0.3, 0.1, 0.15, 0.25};
  const auto target = somno::one_hot(2, 6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(somno::train_step(mlp, x, target, 0.2));
  }
}
BENCHMARK(BM_TrainStep)->Arg(6)->Arg(12);

void BM_Predict(benchmark::State& state) {
  const auto mlp = somno::Mlp::init({5, 6, 6}, 7);
  const std::vector<double> x{0.2, 0.3, 0.1, 0.15, 0.25};
  for (auto _ : state) {
    benchmark::DoNotOptimize(somno::predict(mlp, x));
  }
}
BENCHMARK(BM_Predict);

}  // namespace

BENCHMARK_MAIN();
