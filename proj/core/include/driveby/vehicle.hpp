#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "driveby/bridge.hpp"

namespace driveby {

inline constexpr double kGravity = 9.81;

enum class Axle { front = 0, rear = 1 };

/// Planar two-DOF (bounce z_v, pitch theta_v) inspection vehicle.
/// Defaults are the fixed properties of the optimisation design space.
struct HalfCarVehicle {
  std::string name;
  double mass = 0.0;
  double pitch_inertia = 93234.0;
  double k_front = 0.0;
  double k_rear = 0.0;
  double c_front = 1.0e4;
  double c_rear = 1.0e4;
  double d_front = 2.375;  // centre of mass to front axle
  double d_rear = 2.375;   // centre of mass to rear axle
  double speed_mean = 2.0;
  double speed_std = 0.2;

  double wheelbase() const { return d_front + d_rear; }
  double stiffness(Axle a) const { return a == Axle::front ? k_front : k_rear; }
  double damping(Axle a) const { return a == Axle::front ? c_front : c_rear; }
  /// Signed lever arm: +d_front for the front axle, -d_rear for the rear.
  double lever(Axle a) const { return a == Axle::front ? d_front : -d_rear; }
  /// Share of the total mass statically carried by an axle.
  double axle_mass(Axle a) const {
    return mass * (a == Axle::front ? d_rear : d_front) / wheelbase();
  }
  bool symmetric() const { return k_front == k_rear && d_front == d_rear; }

  void validate() const;

  /// Design-space vehicle with equal axle stiffness k_v.
  static HalfCarVehicle with_design(double mass, double k_v, std::string name = {});
};

struct VehicleFrequencies {
  double bounce = 0.0;  // Hz
  double pitch = 0.0;   // Hz
  double lowest = 0.0;  // f_z used by the frequency ratio
};

/// Closed forms for the decoupled symmetric case; otherwise the 2x2
/// generalized eigenproblem of (z_v, theta_v).
VehicleFrequencies vehicle_frequencies(const HalfCarVehicle& vehicle);

/// Always solves the 2x2 generalized eigenproblem. Modes are labelled by
/// their dominant kinetic-energy component.
VehicleFrequencies modal_frequencies(const HalfCarVehicle& vehicle);

/// mu = m_v / (mu_b L).
double mass_ratio(const HalfCarVehicle& vehicle, const BeamBridge& bridge);

/// beta = f_z / f_b1.
double frequency_ratio(const HalfCarVehicle& vehicle, double bridge_frequency);

struct AxleLoads {
  double front = 0.0;  // N
  double rear = 0.0;   // N
};

AxleLoads static_axle_loads(const HalfCarVehicle& vehicle, double gravity = kGravity);

struct Range {
  double lower = 0.0;
  double upper = 0.0;
  double width() const { return upper - lower; }
  bool contains(double v) const { return v >= lower && v <= upper; }
};

struct DesignSpace {
  Range mass{50.0, 20000.0};
  Range stiffness{0.03e6, 8.0e6};
  void validate() const;
};

struct DesignPoint {
  double mass = 0.0;
  double stiffness = 0.0;
  double mass_ratio = std::numeric_limits<double>::quiet_NaN();
  double frequency_ratio = std::numeric_limits<double>::quiet_NaN();
};

/// Latin hypercube: one point per equal-width stratum in each dimension,
/// strata paired by independent random permutations.
std::vector<DesignPoint> lhs_sample(const DesignSpace& space, int count, std::uint64_t seed);

/// Normal(speed_mean, speed_std^2) truncated below at kMinimumSpeed.
double sample_speed(const HalfCarVehicle& vehicle, std::uint64_t seed);

inline constexpr double kMinimumSpeed = 0.5;

}  // namespace driveby
