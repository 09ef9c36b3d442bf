#include <benchmark/benchmark.h>

#include "driveby/evaluation.hpp"
#include "driveby/random.hpp"
#include "driveby/spectral.hpp"

using namespace driveby;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.normal();
  return x;
}

void BM_Welch(benchmark::State& state) {
  const auto x = noise(static_cast<std::size_t>(state.range(0)), 1);
  WelchSettings w;
  for (auto _ : state) benchmark::DoNotOptimize(welch_psd(x, 1000.0, w));
}
BENCHMARK(BM_Welch)->Arg(12000)->Arg(30000)->Unit(benchmark::kMillisecond);

void BM_Wasserstein(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = noise(n, 2), b = noise(n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(w1_empirical(a, b));
}
BENCHMARK(BM_Wasserstein)->Arg(100)->Arg(10000);

}  // namespace
