#include <cmath>

#include <gtest/gtest.h>

#include "driveby/error.hpp"
#include "driveby/kriging.hpp"
#include "driveby/vehicle.hpp"

using namespace driveby;

namespace {

double smooth(double a, double b) { return std::sin(3 * a) * std::cos(2 * b) + 0.5 * a * b; }

struct Sample {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

Sample lhs_unit(int n, std::uint64_t seed) {
  DesignSpace unit;
  unit.mass = {1e-9, 1.0};
  unit.stiffness = {1e-9, 1.0};
  const auto pts = lhs_sample(unit, n, seed);
  Sample s{Eigen::MatrixXd(n, 2), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    s.x(i, 0) = pts[static_cast<std::size_t>(i)].mass;
    s.x(i, 1) = pts[static_cast<std::size_t>(i)].stiffness;
    s.y(i) = smooth(s.x(i, 0), s.x(i, 1));
  }
  return s;
}

const Eigen::Vector2d kLower(0.0, 0.0), kUpper(1.0, 1.0);

}  // namespace

TEST(Kriging, InterpolatesTrainingPoints) {
  const auto s = lhs_unit(40, 1);
  const auto m = KrigingModel::fit(s.x, s.y, kLower, kUpper);
  for (int i = 0; i < 40; ++i) {
    const double p = m(s.x.row(i).transpose());
    EXPECT_NEAR(p, s.y(i), 1e-6 * std::max(1.0, std::abs(s.y(i))));
  }
  for (int k = 0; k < 2; ++k) {
    EXPECT_GE(m.theta()(k), 1e-3 * (1 - 1e-12));
    EXPECT_LE(m.theta()(k), 1e3 * (1 + 1e-12));
  }
}

TEST(Kriging, HeldOutRSquaredOnSmoothFunction) {
  const auto s = lhs_unit(200, 2);
  const auto m = KrigingModel::fit(s.x, s.y, kLower, kUpper);
  const auto test = lhs_unit(100, 99);
  std::vector<double> truth, pred;
  for (int i = 0; i < 100; ++i) {
    truth.push_back(test.y(i));
    pred.push_back(m(test.x.row(i).transpose()));
  }
  EXPECT_GE(r_squared(truth, pred), 0.95);
}

TEST(Kriging, ConstantOutputs) {
  auto s = lhs_unit(15, 3);
  s.y.setConstant(0.7);
  const auto m = KrigingModel::fit(s.x, s.y, kLower, kUpper);
  EXPECT_NEAR(m.beta0(), 0.7, 1e-9);
  EXPECT_NEAR(m(Eigen::Vector2d(0.33, 0.81)), 0.7, 1e-9);
}

TEST(Kriging, FarPredictionTendsToMean) {
  const auto s = lhs_unit(30, 4);
  const auto m = KrigingModel::fit(s.x, s.y, kLower, kUpper);
  const auto p = m.predict(Eigen::Vector2d(80.0, -70.0));
  EXPECT_TRUE(p.extrapolated);
  EXPECT_NEAR(p.value, m.beta0(), 1e-9);
  EXPECT_FALSE(m.predict(Eigen::Vector2d(0.5, 0.5)).extrapolated);
}

TEST(Kriging, AffineOutputInvariance) {
  const auto s = lhs_unit(30, 5);
  const auto m = KrigingModel::fit(s.x, s.y, kLower, kUpper);
  const auto m2 = KrigingModel::fit(s.x, (3.0 * s.y.array() + 2.0).matrix(), kLower, kUpper);
  for (const auto& q : {Eigen::Vector2d(0.2, 0.3), Eigen::Vector2d(0.77, 0.12)})
    EXPECT_NEAR(m2(q), 3.0 * m(q) + 2.0, 1e-6);
}

TEST(Kriging, RejectsBadData) {
  auto s = lhs_unit(12, 6);
  s.x.row(7) = s.x.row(3);
  try {
    KrigingModel::fit(s.x, s.y, kLower, kUpper);
    FAIL() << "duplicates accepted";
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find('3'), std::string::npos);
    EXPECT_NE(std::string(e.what()).find('7'), std::string::npos);
  }
  s = lhs_unit(9, 6);
  EXPECT_THROW(KrigingModel::fit(s.x, s.y, kLower, kUpper), InvalidInput);
  s = lhs_unit(12, 6);
  s.y(2) = std::nan("");
  EXPECT_THROW(KrigingModel::fit(s.x, s.y, kLower, kUpper), InvalidInput);
}

TEST(Kriging, JsonRoundTrip) {
  const auto s = lhs_unit(20, 7);
  const auto m = KrigingModel::fit(s.x, s.y, kLower, kUpper);
  const auto back = KrigingModel::from_json(m.to_json());
  const Eigen::Vector2d q(0.4, 0.6);
  EXPECT_NEAR(back(q), m(q), 1e-12);
  EXPECT_EQ(back.theta(), m.theta());
}

TEST(Kriging, RSquared) {
  EXPECT_NEAR(r_squared({1, 2, 3}, {1, 2, 3}), 1.0, 1e-15);
  EXPECT_NEAR(r_squared({1, 2, 3}, {2, 2, 2}), 0.0, 1e-15);
}
