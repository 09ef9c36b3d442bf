#include <benchmark/benchmark.h>

#include "driveby/cp_estimator.hpp"
#include "driveby/fixtures.hpp"
#include "driveby/road_profile.hpp"
#include "driveby/vbi_solver.hpp"

using namespace driveby;

namespace {

void BM_Assemble(benchmark::State& state) {
  const auto b = fixtures::reference_bridge();
  for (auto _ : state) benchmark::DoNotOptimize(AssembledSystem::assemble(b));
}
BENCHMARK(BM_Assemble);

void BM_RoadProfile(benchmark::State& state) {
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(RoadProfile::generate(25.0, seed++));
}
BENCHMARK(BM_RoadProfile);

void BM_Crossing(benchmark::State& state) {
  const auto system = AssembledSystem::assemble(fixtures::reference_bridge());
  const auto road = RoadProfile::generate(25.0, 3);
  CrossingConfig cfg;
  cfg.coupling = state.range(0) == 0 ? CouplingMode::monolithic : CouplingMode::iterative;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_crossing(system, fixtures::sv(1), road, cfg));
}
BENCHMARK(BM_Crossing)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_CpEstimate(benchmark::State& state) {
  const auto system = AssembledSystem::assemble(fixtures::reference_bridge());
  const auto v = fixtures::sv(2);
  const auto r = simulate_crossing(system, v, RoadProfile::generate(25.0, 4), {});
  for (auto _ : state)
    benchmark::DoNotOptimize(estimate_cp_displacement(r, v, Axle::front, AxleMassModel::rigid_body));
}
BENCHMARK(BM_CpEstimate)->Unit(benchmark::kMicrosecond);

}  // namespace
