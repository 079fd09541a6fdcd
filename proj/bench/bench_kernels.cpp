// Serial reference vs OpenMP kernels on synthetic batches.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "arena/kernels.hpp"

using namespace arena::kernels;

namespace {

MaseBatch make_mase(int rows, int h) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> d(100.0, 15.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MaseBatch b;
  b.rows = rows;
  b.h = h;
  for (long i = 0; i < static_cast<long>(rows) * h; ++i) {
    b.forecasts.push_back(d(rng));
    b.actuals.push_back(u(rng) < 0.05 ? NAN : d(rng));
  }
  for (int r = 0; r < rows; ++r) b.scales.push_back(1.0 + u(rng) * 10.0);
  return b;
}

ScaleBatch make_scale(int rows, int length, int m) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> d(100.0, 15.0);
  ScaleBatch b;
  b.rows = rows;
  b.length = length;
  b.m = m;
  for (long i = 0; i < static_cast<long>(rows) * length; ++i) b.contexts.push_back(d(rng));
  return b;
}

void BM_score_serial(benchmark::State& state) {
  const auto b = make_mase(static_cast<int>(state.range(0)), 96);
  for (auto _ : state) benchmark::DoNotOptimize(score_serial(b));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_score_parallel(benchmark::State& state) {
  const auto b = make_mase(static_cast<int>(state.range(0)), 96);
  for (auto _ : state) benchmark::DoNotOptimize(score_parallel(b));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_scale_serial(benchmark::State& state) {
  const auto b = make_scale(static_cast<int>(state.range(0)), 672, 96);
  for (auto _ : state) benchmark::DoNotOptimize(seasonal_scale_serial(b));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_scale_parallel(benchmark::State& state) {
  const auto b = make_scale(static_cast<int>(state.range(0)), 672, 96);
  for (auto _ : state) benchmark::DoNotOptimize(seasonal_scale_parallel(b));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_score_serial)->RangeMultiplier(8)->Range(64, 32768)->UseRealTime();
BENCHMARK(BM_score_parallel)->RangeMultiplier(8)->Range(64, 32768)->UseRealTime();
BENCHMARK(BM_scale_serial)->RangeMultiplier(8)->Range(64, 32768)->UseRealTime();
BENCHMARK(BM_scale_parallel)->RangeMultiplier(8)->Range(64, 32768)->UseRealTime();

BENCHMARK_MAIN();
