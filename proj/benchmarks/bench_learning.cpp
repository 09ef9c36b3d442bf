#include <benchmark/benchmark.h>

#include "driveby/aae.hpp"
#include "driveby/kriging.hpp"
#include "driveby/pso.hpp"
#include "driveby/random.hpp"
#include "driveby/vehicle.hpp"

using namespace driveby;

namespace {

Eigen::MatrixXd uniform(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform();
  return m;
}

void BM_AaeEpoch(benchmark::State& state) {
  const auto data = uniform(80, 256, 1);
  TrainingConfig cfg;
  cfg.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train_aae(data, cfg));
}
BENCHMARK(BM_AaeEpoch)->Unit(benchmark::kMillisecond);

void BM_KrigingFit(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  DesignSpace unit;
  unit.mass = {1e-9, 1.0};
  unit.stiffness = {1e-9, 1.0};
  const auto pts = lhs_sample(unit, n, 5);
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = pts[static_cast<std::size_t>(i)].mass;
    x(i, 1) = pts[static_cast<std::size_t>(i)].stiffness;
    y(i) = std::sin(3 * x(i, 0)) * std::cos(2 * x(i, 1));
  }
  const Eigen::Vector2d lo(0, 0), hi(1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(KrigingModel::fit(x, y, lo, hi));
}
BENCHMARK(BM_KrigingFit)->Arg(30)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Pso(benchmark::State& state) {
  const Eigen::Vector2d lo(0, 0), hi(1, 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(pso_maximize(
        [](const Eigen::VectorXd& p) { return -(p - Eigen::Vector2d(0.3, 0.7)).squaredNorm(); },
        lo, hi));
}
BENCHMARK(BM_Pso)->Unit(benchmark::kMillisecond);

}  // namespace
