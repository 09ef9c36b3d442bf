#include "driveby/cp_estimator.hpp"

#include <cmath>

#include "driveby/error.hpp"

namespace driveby {

std::vector<double> kernel_response(const std::vector<double>& input, double stiffness,
                                    double damping, double time_step) {
  if (!(damping > 0.0)) throw InvalidInput("cp estimate: axle damping must be > 0");
  if (!(stiffness >= 0.0)) throw InvalidInput("cp estimate: axle stiffness must be >= 0");
  if (!(time_step > 0.0)) throw InvalidInput("cp estimate: time_step must be > 0");
  std::vector<double> out(input.size(), 0.0);
  if (input.empty()) return out;
  const double decay = std::exp(-stiffness / damping * time_step);
  const double weight = 0.5 * time_step / damping;
  for (std::size_t n = 1; n < input.size(); ++n)
    out[n] = decay * out[n - 1] + weight * (decay * input[n - 1] + input[n]);
  return out;
}

CPEstimate estimate_cp_displacement(const CrossingRecord& record, const HalfCarVehicle& vehicle,
                                    Axle axle, AxleMassModel model) {
  if (record.size() < 2) throw InvalidInput("cp estimate: record has fewer than 2 samples");
  const Axle other = axle == Axle::front ? Axle::rear : Axle::front;
  const AxleChannels& ch = record.axle(axle);
  const AxleChannels& ch_other = record.axle(other);
  CPEstimate est;
  est.axle = axle;
  est.time_step = record.time_step;
  est.stiffness = vehicle.stiffness(axle);
  est.damping = vehicle.damping(axle);
  est.mass_model = model;
  if (model == AxleMassModel::static_split) {
    est.mass = vehicle.axle_mass(axle);
  } else {
    // Axle forces from body accelerations: A^-1 diag(m, I) A^-T.
    const double d = vehicle.wheelbase();
    const double far = axle == Axle::front ? vehicle.d_rear : vehicle.d_front;
    est.mass = (vehicle.mass * far * far + vehicle.pitch_inertia) / (d * d);
    est.cross_mass =
        (vehicle.mass * vehicle.d_front * vehicle.d_rear - vehicle.pitch_inertia) / (d * d);
  }

  std::vector<double> g(record.size());
  for (std::size_t n = 0; n < g.size(); ++n)
    g[n] = est.mass * ch.z_ddot[n] + est.cross_mass * ch_other.z_ddot[n] +
           est.damping * ch.z_dot[n] + est.stiffness * ch.z[n];
  est.displacement = kernel_response(g, est.stiffness, est.damping, est.time_step);
  return est;
}

std::vector<double> second_derivative(const std::vector<double>& series, double time_step) {
  const std::size_t n = series.size();
  if (n < 5) throw InvalidInput("second derivative: need at least 5 samples");
  if (!(time_step > 0.0)) throw InvalidInput("second derivative: time_step must be > 0");
  const double inv = 1.0 / (time_step * time_step);
  std::vector<double> out(n);
  for (std::size_t i = 1; i + 1 < n; ++i)
    out[i] = (series[i + 1] - 2.0 * series[i] + series[i - 1]) * inv;
  out[0] = (2.0 * series[0] - 5.0 * series[1] + 4.0 * series[2] - series[3]) * inv;
  out[n - 1] =
      (2.0 * series[n - 1] - 5.0 * series[n - 2] + 4.0 * series[n - 3] - series[n - 4]) * inv;
  return out;
}

}  // namespace driveby
