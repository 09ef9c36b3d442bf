#pragma once

#include <vector>

#include "driveby/vbi_solver.hpp"
#include "driveby/vehicle.hpp"

namespace driveby {

/// How the body inertia is distributed over the two axles in the kernel input.
enum class AxleMassModel {
  /// m_i = statically carried share of m_v; exact only when I_v = m_v d_1 d_2.
  static_split,
  /// Full 2x2 rigid-body inertia seen at the axles, which also couples in the
  /// other axle's acceleration. Equal to static_split for a decoupled body.
  rigid_body,
};

/// Contact-point displacement reconstructed from one axle's chassis kinematics.
struct CPEstimate {
  Axle axle = Axle::front;
  double time_step = 0.0;
  double stiffness = 0.0;
  double damping = 0.0;
  AxleMassModel mass_model = AxleMassModel::static_split;
  double mass = 0.0;        // inertia multiplying this axle's acceleration
  double cross_mass = 0.0;  // inertia multiplying the other axle's acceleration
  std::vector<double> displacement;
};

/// First-order kernel z(t) = int_0^t exp(-k (t - tau) / c) g(tau) / c dtau,
/// evaluated recursively with trapezoidal quadrature. z(0) = 0.
std::vector<double> kernel_response(const std::vector<double>& input, double stiffness,
                                    double damping, double time_step);

/// Estimate for one axle of a crossing using the exact solver kinematics.
CPEstimate estimate_cp_displacement(const CrossingRecord& record, const HalfCarVehicle& vehicle,
                                    Axle axle,
                                    AxleMassModel model = AxleMassModel::static_split);

/// Second derivative on a uniform grid: central differences inside,
/// one-sided second-order stencils at both ends. Needs >= 5 samples.
std::vector<double> second_derivative(const std::vector<double>& series, double time_step);

inline std::vector<double> cp_acceleration(const CPEstimate& estimate) {
  return second_derivative(estimate.displacement, estimate.time_step);
}

}  // namespace driveby
