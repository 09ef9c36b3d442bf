#include "driveby/nondimensional.hpp"

#include <cmath>
#include <numbers>

#include "driveby/error.hpp"

namespace driveby {

namespace {

HalfCarVehicle design_vehicle(const HalfCarVehicle& t, double mass, double k) {
  HalfCarVehicle v = t;
  if (v.mass == 0.0 && v.k_front == 0.0) v = HalfCarVehicle::with_design(mass, k, t.name);
  v.mass = mass;
  v.k_front = v.k_rear = k;
  return v;
}

}  // namespace

NondimensionalPoint nondimensional_map(const DesignPoint& point, const BeamBridge& bridge,
                                       double bridge_frequency,
                                       const HalfCarVehicle& vehicle_template) {
  const HalfCarVehicle v = design_vehicle(vehicle_template, point.mass, point.stiffness);
  return {mass_ratio(v, bridge), frequency_ratio(v, bridge_frequency)};
}

std::vector<DesignPoint> nondimensional_map(std::vector<DesignPoint> points,
                                            const BeamBridge& bridge, double bridge_frequency,
                                            const HalfCarVehicle& vehicle_template) {
  for (auto& p : points) {
    const auto nd = nondimensional_map(p, bridge, bridge_frequency, vehicle_template);
    p.mass_ratio = nd.mass_ratio;
    p.frequency_ratio = nd.frequency_ratio;
  }
  return points;
}

HalfCarVehicle inverse_nondimensional(const NondimensionalPoint& target, const BeamBridge& bridge,
                                      double bridge_frequency,
                                      const HalfCarVehicle& vehicle_template) {
  if (!(target.mass_ratio > 0.0) || !(target.frequency_ratio > 0.0))
    throw InvalidInput("inverse map: mu and beta must be > 0");
  if (!(bridge_frequency > 0.0)) throw InvalidInput("inverse map: bridge frequency must be > 0");
  const double mass = target.mass_ratio * bridge.mass_per_length * bridge.span_length;
  const double omega = 2.0 * std::numbers::pi * target.frequency_ratio * bridge_frequency;
  HalfCarVehicle v = design_vehicle(vehicle_template, mass, 1.0);

  if (v.d_front == v.d_rear) {
    // f_z = min(bounce, pitch); both grow with k, so k is the larger of the
    // two stiffnesses that put each mode exactly at f_z.
    const double k_bounce = mass * omega * omega / 2.0;
    const double k_pitch = v.pitch_inertia * omega * omega / (2.0 * v.d_front * v.d_front);
    v.k_front = v.k_rear = std::max(k_bounce, k_pitch);
    return v;
  }
  // General offsets: the lowest frequency is monotone in k, so bisect in log k.
  const double f_target = omega / (2.0 * std::numbers::pi);
  double lo = std::log(1e-6), hi = std::log(1e14);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    v.k_front = v.k_rear = std::exp(mid);
    (modal_frequencies(v).lowest < f_target ? lo : hi) = mid;
  }
  v.k_front = v.k_rear = std::exp(0.5 * (lo + hi));
  return v;
}

std::vector<DesignPoint> surrogate_grid(const KrigingModel& model, const DesignSpace& space,
                                        int mass_steps, int stiffness_steps,
                                        const BeamBridge& bridge, double bridge_frequency,
                                        std::vector<double>& values,
                                        const HalfCarVehicle& vehicle_template) {
  if (mass_steps < 2 || stiffness_steps < 2) throw InvalidInput("grid: need >= 2 steps per axis");
  std::vector<DesignPoint> grid;
  values.clear();
  for (int i = 0; i < mass_steps; ++i)
    for (int j = 0; j < stiffness_steps; ++j) {
      DesignPoint p;
      p.mass = space.mass.lower + space.mass.width() * i / (mass_steps - 1);
      p.stiffness = space.stiffness.lower + space.stiffness.width() * j / (stiffness_steps - 1);
      const auto nd = nondimensional_map(p, bridge, bridge_frequency, vehicle_template);
      p.mass_ratio = nd.mass_ratio;
      p.frequency_ratio = nd.frequency_ratio;
      values.push_back(model(Eigen::Vector2d(p.mass, p.stiffness)));
      grid.push_back(p);
    }
  return grid;
}

}  // namespace driveby
