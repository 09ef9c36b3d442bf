#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "driveby/bridge.hpp"
#include "driveby/road_profile.hpp"
#include "driveby/vehicle.hpp"

namespace driveby {

enum class CouplingMode {
  monolithic,  // one direct solve of the combined system per step
  iterative,   // fixed-point exchange of interface displacements
};

struct CrossingConfig {
  double speed = 2.0;           // m/s
  double time_step = 1e-3;      // s
  /// Front-axle position at t = 0, so x_front(t) = entry_position + v t.
  double entry_position = 0.0;
  /// Simulated time; defaults to the instant the rear axle leaves the span.
  std::optional<double> duration;
  double gravity = kGravity;
  CouplingMode coupling = CouplingMode::monolithic;
  double coupling_tolerance = 1e-10;
  int max_coupling_iterations = 50;
  /// Keep nodal bridge displacement/velocity/acceleration for every step.
  bool retain_bridge_state = false;
  /// Grid spacing of the cached road-profile interpolant, m.
  double profile_table_spacing = 0.005;

  void validate() const;
};

/// Per-axle channels of a crossing. Vertical quantities are measured from the
/// static equilibrium on a rigid level road, positive upwards.
struct AxleChannels {
  std::vector<double> position;      // x_vi(t)
  std::vector<std::uint8_t> on_span;
  std::vector<double> z;             // chassis displacement above the axle
  std::vector<double> z_dot;
  std::vector<double> z_ddot;
  std::vector<double> contact_force; // R_i, compressive positive
  std::vector<double> road;          // r(x_vi), zero off-span
  std::vector<double> cp_displacement;  // ground truth, deflection + roughness
};

struct CrossingRecord {
  double time_step = 0.0;
  double speed = 0.0;
  double span_length = 0.0;
  std::vector<double> time;
  std::vector<double> body_z, body_z_dot, body_z_ddot;
  std::vector<double> pitch, pitch_dot, pitch_ddot;
  std::array<AxleChannels, 2> axles;
  std::vector<double> midspan_displacement;
  /// Columns are steps; empty unless retain_bridge_state was set.
  Eigen::MatrixXd bridge_displacement;
  Eigen::MatrixXd bridge_velocity;
  Eigen::MatrixXd bridge_acceleration;
  nlohmann::json metadata = nlohmann::json::object();

  std::size_t size() const { return time.size(); }
  const AxleChannels& axle(Axle a) const { return axles[static_cast<int>(a)]; }

  /// Half-open index range [first, last) during which an axle is on the span.
  std::pair<std::size_t, std::size_t> on_span_range(Axle a) const;
};

/// Newmark average-acceleration integration of the coupled half-car / beam
/// system from front-axle entry until the rear axle exits.
CrossingRecord simulate_crossing(const AssembledSystem& bridge, const HalfCarVehicle& vehicle,
                                 const RoadProfile& profile, const CrossingConfig& config);

/// Ground-truth contact-point displacement per axle (deflection + roughness).
std::array<std::vector<double>, 2> ground_truth_cp(const CrossingRecord& record);

struct FreeVibrationResult {
  std::vector<double> time;
  std::vector<double> midspan;
  std::vector<double> energy;  // kinetic + strain
};

/// Unloaded bridge released from (z0, v0), same integrator as the crossing.
FreeVibrationResult simulate_free_vibration(const AssembledSystem& bridge,
                                            const Eigen::VectorXd& z0,
                                            const Eigen::VectorXd& v0, double time_step,
                                            double duration);

/// Static nodal displacements under point loads (N, downward positive) at x.
Eigen::VectorXd static_deflection(const AssembledSystem& bridge,
                                  const std::vector<std::pair<double, double>>& loads);

}  // namespace driveby
