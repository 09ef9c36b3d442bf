#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "driveby/aae.hpp"
#include "driveby/bridge.hpp"
#include "driveby/pso.hpp"
#include "driveby/road_profile.hpp"
#include "driveby/spectral.hpp"
#include "driveby/vehicle.hpp"

namespace driveby {

// Structured-config conversions. Parsers fill unspecified keys from the
// struct defaults, reject unknown keys and throw InvalidInput on bad values.

nlohmann::json to_json(const BeamBridge& b);
BeamBridge bridge_from_json(const nlohmann::json& j);

nlohmann::json to_json(const HalfCarVehicle& v);
HalfCarVehicle vehicle_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DesignSpace& s);
DesignSpace design_space_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TrainingConfig& c);
TrainingConfig training_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PSOConfig& c);
PSOConfig pso_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RoughnessSettings& s);
RoughnessSettings roughness_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Band& b);
Band band_from_json(const nlohmann::json& j);

/// "3:5" -> Band{3, 5}.
Band parse_band(const std::string& text);

/// 64-bit FNV-1a of the canonical (key-sorted, compact) serialization, hex.
std::string config_hash(const nlohmann::json& j);

}  // namespace driveby
