#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "driveby/error.hpp"
#include "driveby/pso.hpp"

using namespace driveby;

namespace {
const Eigen::Vector2d kLower(0.0, 0.0), kUpper(1.0, 1.0);
double bowl(const Eigen::VectorXd& p) {
  return -((p[0] - 0.3) * (p[0] - 0.3) + (p[1] - 0.7) * (p[1] - 0.7));
}
}  // namespace

TEST(Pso, RecoversQuadraticOptimum) {
  PSOConfig cfg;
  cfg.seed = 1;
  const auto r = pso_maximize(bowl, kLower, kUpper, cfg);
  EXPECT_NEAR(r.best[0], 0.3, 1e-4);
  EXPECT_NEAR(r.best[1], 0.7, 1e-4);
  EXPECT_LE(r.iterations, cfg.max_iterations);
}

TEST(Pso, RecoversOptimumAcrossSeeds) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    PSOConfig cfg;
    cfg.seed = seed;
    const auto r = pso_maximize(bowl, kLower, kUpper, cfg);
    EXPECT_NEAR(r.best[0], 0.3, 1e-4) << "seed " << seed;
    EXPECT_NEAR(r.best[1], 0.7, 1e-4) << "seed " << seed;
  }
}

TEST(Pso, GlobalBestMonotone) {
  PSOConfig cfg;
  cfg.seed = 2;
  const auto r = pso_maximize(
      [](const Eigen::VectorXd& p) { return std::sin(9 * p[0]) * std::cos(7 * p[1]) - p[0]; },
      kLower, kUpper, cfg);
  ASSERT_FALSE(r.history.empty());
  for (std::size_t i = 1; i < r.history.size(); ++i) EXPECT_GE(r.history[i], r.history[i - 1]);
  EXPECT_EQ(r.history.back(), r.value);
}

TEST(Pso, ConstantObjective) {
  const auto r = pso_maximize([](const Eigen::VectorXd&) { return 4.0; }, kLower, kUpper);
  EXPECT_EQ(r.value, 4.0);
  EXPECT_TRUE(r.best[0] >= 0.0 && r.best[0] <= 1.0);
  EXPECT_LE(r.iterations, 1000);
}

TEST(Pso, NonFiniteValuesPenalized) {
  const auto r = pso_maximize(
      [](const Eigen::VectorXd& p) {
        return p[0] < 0.5 ? std::numeric_limits<double>::quiet_NaN() : -std::abs(p[0] - 0.8);
      },
      kLower, kUpper);
  EXPECT_NEAR(r.best[0], 0.8, 1e-4);
}

TEST(Pso, StaysInBoundsAndDeterministic) {
  PSOConfig cfg;
  cfg.seed = 5;
  auto edge = [](const Eigen::VectorXd& p) { return p[0] + p[1]; };
  const auto a = pso_maximize(edge, kLower, kUpper, cfg);
  const auto b = pso_maximize(edge, kLower, kUpper, cfg);
  EXPECT_EQ(a.best, b.best);
  EXPECT_LE(a.best[0], 1.0);
  EXPECT_LE(a.best[1], 1.0);
  EXPECT_NEAR(a.value, 2.0, 1e-4);
}

TEST(Pso, ValidatesConfig) {
  PSOConfig cfg;
  cfg.swarm_size = 0;
  EXPECT_THROW(pso_maximize(bowl, kLower, kUpper, cfg), InvalidInput);
  EXPECT_THROW(pso_maximize(bowl, kUpper, kLower), InvalidInput);
}
