#pragma once

#include <vector>

#include "driveby/bridge.hpp"
#include "driveby/kriging.hpp"
#include "driveby/vehicle.hpp"

namespace driveby {

struct NondimensionalPoint {
  double mass_ratio = 0.0;       // mu
  double frequency_ratio = 0.0;  // beta
};

/// (mu, beta) of a design vehicle (the template's I_v, c_v, d_i with the
/// point's m_v and k_v) on a bridge with first frequency f_b1.
NondimensionalPoint nondimensional_map(const DesignPoint& point, const BeamBridge& bridge,
                                       double bridge_frequency,
                                       const HalfCarVehicle& vehicle_template = {});

/// Fills mass_ratio and frequency_ratio of every point.
std::vector<DesignPoint> nondimensional_map(std::vector<DesignPoint> points,
                                            const BeamBridge& bridge, double bridge_frequency,
                                            const HalfCarVehicle& vehicle_template = {});

/// Vehicle with the given (mu, beta) on this bridge, keeping the template's
/// pitch inertia, damping and axle offsets; both axles share one stiffness.
HalfCarVehicle inverse_nondimensional(const NondimensionalPoint& target, const BeamBridge& bridge,
                                      double bridge_frequency,
                                      const HalfCarVehicle& vehicle_template = {});

/// Surrogate re-gridded over the design space, for isocurve plots in both
/// the dimensional and the (mu, beta) view.
std::vector<DesignPoint> surrogate_grid(const KrigingModel& model, const DesignSpace& space,
                                        int mass_steps, int stiffness_steps,
                                        const BeamBridge& bridge, double bridge_frequency,
                                        std::vector<double>& values,
                                        const HalfCarVehicle& vehicle_template = {});

}  // namespace driveby
