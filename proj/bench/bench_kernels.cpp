#include <benchmark/benchmark.h>

#include "modmorph/kernels.hpp"
#include "modmorph/random.hpp"

using namespace modmorph;

namespace {

void args(benchmark::internal::Benchmark* b) {
  for (int c : {4, 16, 32}) b->Args({c, 3})->Args({c, 5});
}

void BM_ConvSerial(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  const int k = static_cast<int>(state.range(1));
  Rng rng(1);
  const Filter f = random_filter(c, c, {k, k}, 0.1, rng);
  const Blob b = random_blob(c, 32, 32, rng);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::conv_blob(f, b));
}

void BM_ConvParallel(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  const int k = static_cast<int>(state.range(1));
  Rng rng(1);
  const Filter f = random_filter(c, c, {k, k}, 0.1, rng);
  const Blob b = random_blob(c, 32, 32, rng);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::parallel::conv_blob(f, b));
}

void BM_ComposeSerial(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  const int k = static_cast<int>(state.range(1));
  Rng rng(2);
  const Filter f2 = random_filter(c, c, {k, k}, 0.1, rng);
  const Filter f1 = random_filter(c, c, {k, k}, 0.1, rng);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::compose(f2, f1));
}

void BM_ComposeParallel(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  const int k = static_cast<int>(state.range(1));
  Rng rng(2);
  const Filter f2 = random_filter(c, c, {k, k}, 0.1, rng);
  const Filter f1 = random_filter(c, c, {k, k}, 0.1, rng);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::parallel::compose(f2, f1));
}

}  // namespace

BENCHMARK(BM_ConvSerial)->Apply(args);
BENCHMARK(BM_ConvParallel)->Apply(args);
BENCHMARK(BM_ComposeSerial)->Apply(args);
BENCHMARK(BM_ComposeParallel)->Apply(args);

BENCHMARK_MAIN();
