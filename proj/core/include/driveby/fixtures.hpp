#pragma once

#include <string>
#include <vector>

#include "driveby/bridge.hpp"
#include "driveby/vehicle.hpp"

namespace driveby::fixtures {

/// 25 m concrete reference bridge, f_b1 ~ 4.09 Hz.
BeamBridge reference_bridge();

/// 15 m transfer bridge, f_b1 ~ 5.65 Hz.
BeamBridge transfer_bridge();

/// 5.4 m steel laboratory beam.
BeamBridge lab_bridge();

/// Laboratory beam after the intervention, whose first frequency rose from
/// 3.61 Hz to 3.66 Hz. Modelled as a uniform stiffness increase.
BeamBridge lab_bridge_damaged();

/// Copy of `bridge` with an open crack of depth ratio `depth` at `location`.
BeamBridge with_crack(BeamBridge bridge, double location, double depth = 0.1);

/// Comparison vehicles SV1..SV5 (index 1..5) on the design-space template.
HalfCarVehicle sv(int index);
std::vector<HalfCarVehicle> comparison_vehicles();

/// Published transfer vehicles. The derived ones come from the inverse map.
HalfCarVehicle sv_n1_published();
HalfCarVehicle sv_n2_published();

/// Laboratory vehicles.
HalfCarVehicle vm1();
HalfCarVehicle vm2();

/// Named lookups used by the CLI: reference, reference-l2, reference-l4,
/// transfer, transfer-l2, lab, lab-damaged.
BeamBridge bridge_by_name(const std::string& name);
/// SV1..SV5, SV-N1, SV-N2, VM1, VM2 (case-insensitive).
HalfCarVehicle vehicle_by_name(const std::string& name);

std::vector<std::string> bridge_names();
std::vector<std::string> vehicle_names();

}  // namespace driveby::fixtures
