#include "driveby/vehicle.hpp"

#include <cmath>
#include <numbers>

#include "driveby/error.hpp"
#include "driveby/random.hpp"

namespace driveby {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

void HalfCarVehicle::validate() const {
  auto fail = [this](const std::string& msg) {
    throw InvalidInput("vehicle" + (name.empty() ? std::string() : " '" + name + "'") + ": " + msg);
  };
  if (!(mass > 0.0)) fail("mass must be > 0");
  if (!(pitch_inertia > 0.0)) fail("pitch_inertia must be > 0");
  if (!(k_front > 0.0 && k_rear > 0.0)) fail("axle stiffness must be > 0");
  if (!(c_front >= 0.0 && c_rear >= 0.0)) fail("axle damping must be >= 0");
  if (!(d_front >= 0.0 && d_rear >= 0.0)) fail("axle offsets must be >= 0");
  if (!(wheelbase() > 0.0)) fail("wheelbase must be > 0");
  if (!(speed_mean > 0.0)) fail("speed_mean must be > 0");
  if (!(speed_std >= 0.0)) fail("speed_std must be >= 0");
}

HalfCarVehicle HalfCarVehicle::with_design(double mass, double k_v, std::string name) {
  HalfCarVehicle v;
  v.name = std::move(name);
  v.mass = mass;
  v.k_front = k_v;
  v.k_rear = k_v;
  return v;
}

VehicleFrequencies modal_frequencies(const HalfCarVehicle& v) {
  const double m = v.mass;
  const double inertia = v.pitch_inertia;
  const double k11 = v.k_front + v.k_rear;
  const double k12 = v.k_front * v.d_front - v.k_rear * v.d_rear;
  const double k22 = v.k_front * v.d_front * v.d_front + v.k_rear * v.d_rear * v.d_rear;

  // Mass-normalized symmetric form: A = M^-1/2 K M^-1/2.
  const double a11 = k11 / m;
  const double a12 = k12 / std::sqrt(m * inertia);
  const double a22 = k22 / inertia;
  const double mean = 0.5 * (a11 + a22);
  const double half_gap = std::hypot(0.5 * (a11 - a22), a12);
  const double lam_lo = mean - half_gap;
  const double lam_hi = mean + half_gap;
  if (!(lam_lo > 0.0)) throw NumericalError("vehicle: non-positive modal stiffness");

  // Eigenvector of lam_lo in mass-normalized coordinates; its first component
  // is the bounce share of kinetic energy.
  double ez = a12;
  double et = lam_lo - a11;
  if (std::abs(ez) + std::abs(et) == 0.0) {
    // Already diagonal.
    ez = a11 <= a22 ? 1.0 : 0.0;
    et = a11 <= a22 ? 0.0 : 1.0;
  }
  const bool low_is_bounce = std::abs(ez) >= std::abs(et);

  VehicleFrequencies f;
  const double f_lo = std::sqrt(lam_lo) / kTwoPi;
  const double f_hi = std::sqrt(lam_hi) / kTwoPi;
  f.bounce = low_is_bounce ? f_lo : f_hi;
  f.pitch = low_is_bounce ? f_hi : f_lo;
  f.lowest = f_lo;
  return f;
}

VehicleFrequencies vehicle_frequencies(const HalfCarVehicle& v) {
  v.validate();
  if (!v.symmetric()) return modal_frequencies(v);
  VehicleFrequencies f;
  f.bounce = std::sqrt((v.k_front + v.k_rear) / v.mass) / kTwoPi;
  f.pitch = std::sqrt((v.k_front * v.d_front * v.d_front + v.k_rear * v.d_rear * v.d_rear) /
                      v.pitch_inertia) / kTwoPi;
  f.lowest = std::min(f.bounce, f.pitch);
  return f;
}

double mass_ratio(const HalfCarVehicle& vehicle, const BeamBridge& bridge) {
  return vehicle.mass / (bridge.mass_per_length * bridge.span_length);
}

double frequency_ratio(const HalfCarVehicle& vehicle, double bridge_frequency) {
  if (!(bridge_frequency > 0.0)) throw InvalidInput("frequency_ratio: bridge frequency must be > 0");
  return vehicle_frequencies(vehicle).lowest / bridge_frequency;
}

AxleLoads static_axle_loads(const HalfCarVehicle& v, double gravity) {
  const double d = v.wheelbase();
  if (!(d > 0.0)) throw InvalidInput("static_axle_loads: wheelbase must be > 0");
  return {v.d_rear / d * v.mass * gravity, v.d_front / d * v.mass * gravity};
}

void DesignSpace::validate() const {
  if (!(mass.lower > 0.0 && mass.lower < mass.upper))
    throw InvalidInput("design space: need 0 < mass.lower < mass.upper");
  if (!(stiffness.lower > 0.0 && stiffness.lower < stiffness.upper))
    throw InvalidInput("design space: need 0 < stiffness.lower < stiffness.upper");
}

std::vector<DesignPoint> lhs_sample(const DesignSpace& space, int count, std::uint64_t seed) {
  space.validate();
  if (count < 1) throw InvalidInput("lhs_sample: count must be >= 1");
  Rng rng(seed);
  const auto n = static_cast<std::size_t>(count);
  const auto mass_perm = rng.permutation(n);
  const auto stiff_perm = rng.permutation(n);
  std::vector<DesignPoint> points(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double um = (static_cast<double>(mass_perm[i]) + rng.uniform()) / count;
    const double uk = (static_cast<double>(stiff_perm[i]) + rng.uniform()) / count;
    points[i].mass = space.mass.lower + um * space.mass.width();
    points[i].stiffness = space.stiffness.lower + uk * space.stiffness.width();
  }
  return points;
}

double sample_speed(const HalfCarVehicle& vehicle, std::uint64_t seed) {
  if (!(vehicle.speed_std >= 0.0)) throw InvalidInput("sample_speed: speed_std must be >= 0");
  if (vehicle.speed_std == 0.0) return vehicle.speed_mean;
  Rng rng(seed);
  for (;;) {
    const double v = rng.normal(vehicle.speed_mean, vehicle.speed_std);
    if (v >= kMinimumSpeed) return v;
  }
}

}  // namespace driveby
