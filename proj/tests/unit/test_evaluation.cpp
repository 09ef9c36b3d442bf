#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "driveby/evaluation.hpp"
#include "driveby/random.hpp"

using namespace driveby;

namespace {

// Minimum mean |x_i - y_sigma(i)| over all permutations.
double brute_force(const std::vector<double>& x, std::vector<double> y) {
  std::sort(y.begin(), y.end());
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) c += std::abs(x[i] - y[i]);
    best = std::min(best, c / static_cast<double>(x.size()));
  } while (std::next_permutation(y.begin(), y.end()));
  return best;
}

std::vector<double> replicate(const std::vector<double>& v, std::size_t times) {
  std::vector<double> out;
  for (double x : v)
    for (std::size_t t = 0; t < times; ++t) out.push_back(x);
  return out;
}

std::vector<double> draw(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

}  // namespace

TEST(Evaluation, W1EqualsBruteForceAssignment) {
  Rng rng(1);
  for (std::size_t n = 1; n <= 6; ++n)
    for (int trial = 0; trial < 20; ++trial) {
      const auto x = draw(rng, n), y = draw(rng, n);
      EXPECT_NEAR(w1_empirical(x, y), brute_force(x, y), 1e-9);
    }
}

TEST(Evaluation, W1UnequalSizesEqualsReplicatedAssignment) {
  Rng rng(2);
  for (auto [n, m] : {std::pair<std::size_t, std::size_t>{2, 3}, {3, 2}, {1, 6}, {6, 3}, {4, 6}}) {
    const auto x = draw(rng, n), y = draw(rng, m);
    const std::size_t l = std::lcm(n, m);
    if (l > 8) continue;
    EXPECT_NEAR(w1_empirical(x, y), brute_force(replicate(x, l / n), replicate(y, l / m)), 1e-9)
        << n << "x" << m;
  }
}

TEST(Evaluation, W1MetricAxioms) {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const auto a = draw(rng, 1 + rng.below(8));
    const auto b = draw(rng, 1 + rng.below(8));
    const auto c = draw(rng, 1 + rng.below(8));
    EXPECT_NEAR(w1_empirical(a, a), 0.0, 1e-12);
    EXPECT_NEAR(w1_empirical(a, b), w1_empirical(b, a), 1e-12);
    EXPECT_GE(w1_empirical(a, b), 0.0);
    EXPECT_LE(w1_empirical(a, c), w1_empirical(a, b) + w1_empirical(b, c) + 1e-12);
  }
}

TEST(Evaluation, W1ShiftEqualsOffset) {
  const std::vector<double> a{0.1, 0.4, 0.2, 0.9};
  std::vector<double> b = a;
  for (auto& x : b) x += 0.3;
  EXPECT_NEAR(w1_empirical(a, b), 0.3, 1e-12);
}

TEST(Evaluation, SummaryRowAndReport) {
  const auto assessment = classify({0.01, 0.02, 0.03}, {0.05, 0.06, 0.02}, 0.025);
  auto row = summarize("SVX", assessment);
  EXPECT_EQ(row.vehicle, "SVX");
  EXPECT_NEAR(row.healthy_mean, 0.02, 1e-15);
  EXPECT_NEAR(row.damaged_mean, 13.0 / 300.0, 1e-15);
  EXPECT_NEAR(row.wasserstein, w1_empirical({0.01, 0.02, 0.03}, {0.05, 0.06, 0.02}), 1e-15);
  EXPECT_EQ(row.threshold, 0.025);

  const auto report = assessment_report({row});
  const auto csv = report.csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "vehicle,mass,stiffness,mu,beta,hn_mean_di,dm_mean_di,threshold,accuracy,f1,wd,error");
  const auto back = row_from_json(to_json(row));
  EXPECT_EQ(back.vehicle, row.vehicle);
  EXPECT_EQ(back.healthy_di, row.healthy_di);
  EXPECT_EQ(back.wasserstein, row.wasserstein);
  EXPECT_EQ(report.json().size(), 1u);
}
