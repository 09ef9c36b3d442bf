#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace driveby {

struct PSOConfig {
  int swarm_size = 50;
  int max_iterations = 1000;
  double inertia_start = 0.9;
  double inertia_end = 0.5;
  double cognitive = 1.49;
  double social = 1.49;
  double velocity_fraction = 0.2;  // max |v| per dimension, as a share of the range
  int stall_iterations = 50;
  double stall_tolerance = 1e-8;  // relative to |gbest|
  double contraction = 1e-3;      // max particle distance from gbest for a stall stop, share of range
  std::uint64_t seed = 0;

  void validate() const;
};

struct PSOResult {
  Eigen::VectorXd best;
  double value = 0.0;
  int iterations = 0;
  std::vector<double> history;  // global best after each iteration
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Global-best particle swarm maximization over a box. Non-finite objective
/// values are treated as -infinity.
PSOResult pso_maximize(const Objective& objective, const Eigen::VectorXd& lower,
                       const Eigen::VectorXd& upper, const PSOConfig& config = {});

}  // namespace driveby
