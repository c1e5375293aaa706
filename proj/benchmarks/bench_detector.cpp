#include <benchmark/benchmark.h>

#include "stopwindow/stopwindow.hpp"

using namespace stopwindow;

namespace {

TrainingTrace noisy_trace(Epoch epochs) {
  CurveParams p;
  p.max_epochs = epochs;
  p.overfit_onset = epochs / 2;
  p.noise_amplitude = 0.5;
  p.seed = 7;
  return generate_synthetic(p);
}

// Monotone metric never stops, so every epoch goes through the full feed path.
void BM_Feed(benchmark::State& state) {
  const auto epochs = static_cast<Epoch>(state.range(0));
  DetectorConfig config;
  config.max_epochs = epochs;
  for (auto _ : state) {
    StopWindowDetector detector(config);
    for (Epoch e = 1; e <= epochs; ++e) {
      benchmark::DoNotOptimize(detector.feed({e, 100.0 * static_cast<double>(e) / static_cast<double>(epochs), {}, {}}));
    }
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Feed)->Arg(200)->Arg(2000)->Arg(20000);

void BM_Replay(benchmark::State& state) {
  const auto trace = noisy_trace(static_cast<Epoch>(state.range(0)));
  DetectorConfig config;
  config.max_epochs = static_cast<Epoch>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(replay(trace, config));
}
BENCHMARK(BM_Replay)->Arg(200)->Arg(2000);

// Reference implementation: recomputes extrema for every prefix.
void BM_DetectOffline(benchmark::State& state) {
  const auto trace = noisy_trace(static_cast<Epoch>(state.range(0)));
  DetectorConfig config;
  config.max_epochs = static_cast<Epoch>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(detect_offline(trace, config));
}
BENCHMARK(BM_DetectOffline)->Arg(200)->Arg(1000);

void BM_RunStrategy(benchmark::State& state) {
  const auto trace = noisy_trace(static_cast<Epoch>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_strategy(trace, presets::kEarlyS4));
}
BENCHMARK(BM_RunStrategy)->Arg(200)->Arg(2000);

}  // namespace

BENCHMARK_MAIN();
