#include <cmath>

#include <gtest/gtest.h>

#include "driveby/road_profile.hpp"
#include "driveby/spectral.hpp"

using namespace driveby;

TEST(RoadProfile, ZeroAtSupportsAndOffSpan) {
  const auto p = RoadProfile::generate(25.0, 3);
  EXPECT_NEAR(p.evaluate(0.0).r, 0.0, 1e-15);
  EXPECT_NEAR(p.evaluate(25.0).r, 0.0, 1e-15);
  EXPECT_EQ(p.evaluate(-1.0).r, 0.0);
  EXPECT_EQ(p.evaluate(26.0).slope, 0.0);
  EXPECT_NEAR(p.taper_length(), 1.0, 1e-12);
}

TEST(RoadProfile, SlopeMatchesFiniteDifference) {
  const auto p = RoadProfile::generate(25.0, 4);
  for (double x : {0.3, 0.9, 5.0, 12.3, 24.5}) {
    const double h = 1e-6;
    const double fd = (p.evaluate(x + h).r - p.evaluate(x - h).r) / (2 * h);
    EXPECT_NEAR(p.evaluate(x).slope, fd, 1e-6 * std::max(1.0, std::abs(fd))) << x;
  }
}

TEST(RoadProfile, DeterministicPerSeed) {
  const auto a = RoadProfile::generate(25.0, 10);
  const auto b = RoadProfile::generate(25.0, 10);
  const auto c = RoadProfile::generate(25.0, 11);
  EXPECT_EQ(a.evaluate(7.7).r, b.evaluate(7.7).r);
  EXPECT_NE(a.evaluate(7.7).r, c.evaluate(7.7).r);
}

TEST(RoadProfile, FlatAndScaled) {
  const auto p = RoadProfile::generate(25.0, 1);
  EXPECT_EQ(RoadProfile::flat(25.0).evaluate(10.0).r, 0.0);
  EXPECT_NEAR(p.scaled(2.0).evaluate(10.0).r, 2.0 * p.evaluate(10.0).r, 1e-15);
  EXPECT_EQ(p.scaled(0.0).evaluate(10.0).r, 0.0);
}

TEST(RoadProfile, TableMatchesAnalytic) {
  const auto p = RoadProfile::generate(25.0, 2);
  const auto t = p.tabulate(0.005);
  double worst = 0.0, scale = 0.0;
  for (double x = 0.0; x <= 25.0; x += 0.0123) {
    worst = std::max(worst, std::abs(t.evaluate(x).r - p.evaluate(x).r));
    scale = std::max(scale, std::abs(p.evaluate(x).r));
  }
  EXPECT_LT(worst, 1e-5 * scale);
  EXPECT_EQ(t.evaluate(30.0).r, 0.0);
}

TEST(RoadProfile, VarianceMatchesTargetPsd) {
  // Ensemble variance of the untapered profile equals the integral of the
  // one-sided displacement PSD over the generated band.
  RoughnessSettings s;
  const double n0 = s.reference_frequency;
  const double expect = s.reference_psd * n0 * n0 * (1.0 / s.min_frequency - 1.0 / s.max_frequency);
  double acc = 0.0;
  int count = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto p = RoadProfile::generate(25.0, seed, s);
    for (double x = 2.0; x < 23.0; x += 3.0) {
      const double r = p.evaluate_untapered(x).r;
      acc += r * r;
      ++count;
    }
  }
  EXPECT_NEAR(acc / count / expect, 1.0, 0.15);
}

TEST(RoadProfile, HarmonicAmplitudesFollowMinusTwoSlope) {
  const auto p = RoadProfile::generate(25.0, 1);
  const auto& n = p.frequencies();
  const auto& a = p.amplitudes();
  ASSERT_EQ(n.size(), 2000u);
  // a_k^2 = 2 G_d(n_k) dn_k with dn_k proportional to n_k on a log grid,
  // so a_k^2 n_k is constant.
  const std::size_t i = 200, j = 1800;
  EXPECT_NEAR(a[i] * a[i] * n[i] / (a[j] * a[j] * n[j]), 1.0, 1e-9);
}
