#include "driveby/config.hpp"

#include <cstdio>
#include <set>

#include "driveby/error.hpp"
#include "driveby/random.hpp"

namespace driveby {

namespace {

// Reads keys into fields, tracks which keys were consumed, rejects the rest.
class Reader {
 public:
  Reader(const nlohmann::json& j, std::string context) : j_(j), context_(std::move(context)) {
    if (!j_.is_object()) throw InvalidInput(context_ + ": expected an object");
  }

  template <class T>
  void operator()(const char* key, T& field) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    try {
      field = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw InvalidInput(context_ + ": key '" + key + "' has the wrong type");
    }
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }
  const nlohmann::json& at(const char* key) const { return j_.at(key); }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key()))
        throw InvalidInput(context_ + ": unknown key '" + item.key() + "'");
  }

 private:
  const nlohmann::json& j_;
  std::string context_;
  std::set<std::string> seen_;
};

}  // namespace

nlohmann::json to_json(const BeamBridge& b) {
  nlohmann::json j = {{"span_length", b.span_length},
                      {"youngs_modulus", b.youngs_modulus},
                      {"area", b.area},
                      {"inertia", b.inertia},
                      {"mass_per_length", b.mass_per_length},
                      {"damping_ratio", b.damping_ratio},
                      {"elements", b.elements},
                      {"stiffness_scale", b.stiffness_scale}};
  if (b.damage)
    j["damage"] = {{"location", b.damage->location}, {"depth_ratio", b.damage->depth_ratio}};
  return j;
}

BeamBridge bridge_from_json(const nlohmann::json& j) {
  BeamBridge b;
  Reader r(j, "bridge");
  r("span_length", b.span_length);
  r("youngs_modulus", b.youngs_modulus);
  r("area", b.area);
  r("inertia", b.inertia);
  r("mass_per_length", b.mass_per_length);
  r("damping_ratio", b.damping_ratio);
  r("elements", b.elements);
  r("stiffness_scale", b.stiffness_scale);
  if (r.has("damage")) {
    CrackDamage d;
    Reader dr(r.at("damage"), "bridge.damage");
    dr("location", d.location);
    dr("depth_ratio", d.depth_ratio);
    dr.finish();
    b.damage = d;
  }
  r.finish();
  b.validate();
  return b;
}

nlohmann::json to_json(const HalfCarVehicle& v) {
  return {{"name", v.name},       {"mass", v.mass},         {"pitch_inertia", v.pitch_inertia},
          {"k_front", v.k_front}, {"k_rear", v.k_rear},     {"c_front", v.c_front},
          {"c_rear", v.c_rear},   {"d_front", v.d_front},   {"d_rear", v.d_rear},
          {"speed_mean", v.speed_mean}, {"speed_std", v.speed_std}};
}

HalfCarVehicle vehicle_from_json(const nlohmann::json& j) {
  HalfCarVehicle v;
  Reader r(j, "vehicle");
  r("name", v.name);
  r("mass", v.mass);
  r("pitch_inertia", v.pitch_inertia);
  if (r.has("stiffness")) {
    double k = 0.0;
    r("stiffness", k);
    v.k_front = v.k_rear = k;
  }
  if (r.has("damping")) {
    double c = 0.0;
    r("damping", c);
    v.c_front = v.c_rear = c;
  }
  r("k_front", v.k_front);
  r("k_rear", v.k_rear);
  r("c_front", v.c_front);
  r("c_rear", v.c_rear);
  r("d_front", v.d_front);
  r("d_rear", v.d_rear);
  r("speed_mean", v.speed_mean);
  r("speed_std", v.speed_std);
  r.finish();
  v.validate();
  return v;
}

nlohmann::json to_json(const DesignSpace& s) {
  return {{"mass", {s.mass.lower, s.mass.upper}},
          {"stiffness", {s.stiffness.lower, s.stiffness.upper}}};
}

DesignSpace design_space_from_json(const nlohmann::json& j) {
  DesignSpace s;
  Reader r(j, "design_space");
  std::array<double, 2> m{s.mass.lower, s.mass.upper}, k{s.stiffness.lower, s.stiffness.upper};
  r("mass", m);
  r("stiffness", k);
  r.finish();
  s.mass = {m[0], m[1]};
  s.stiffness = {k[0], k[1]};
  s.validate();
  return s;
}

nlohmann::json to_json(const TrainingConfig& c) {
  return {{"batch_size", c.batch_size}, {"epochs", c.epochs}, {"learning_rate", c.learning_rate},
          {"beta1", c.beta1},           {"beta2", c.beta2},   {"epsilon", c.epsilon},
          {"seed", c.seed}};
}

TrainingConfig training_from_json(const nlohmann::json& j) {
  TrainingConfig c;
  Reader r(j, "training");
  r("batch_size", c.batch_size);
  r("epochs", c.epochs);
  r("learning_rate", c.learning_rate);
  r("beta1", c.beta1);
  r("beta2", c.beta2);
  r("epsilon", c.epsilon);
  r("seed", c.seed);
  r.finish();
  c.validate();
  return c;
}

nlohmann::json to_json(const PSOConfig& c) {
  return {{"swarm_size", c.swarm_size},
          {"max_iterations", c.max_iterations},
          {"inertia", {c.inertia_end, c.inertia_start}},
          {"cognitive", c.cognitive},
          {"social", c.social},
          {"velocity_fraction", c.velocity_fraction},
          {"stall_iterations", c.stall_iterations},
          {"stall_tolerance", c.stall_tolerance},
          {"contraction", c.contraction},
          {"seed", c.seed}};
}

PSOConfig pso_from_json(const nlohmann::json& j) {
  PSOConfig c;
  Reader r(j, "pso");
  std::array<double, 2> inertia{c.inertia_end, c.inertia_start};
  r("swarm_size", c.swarm_size);
  r("max_iterations", c.max_iterations);
  r("inertia", inertia);
  r("cognitive", c.cognitive);
  r("social", c.social);
  r("velocity_fraction", c.velocity_fraction);
  r("stall_iterations", c.stall_iterations);
  r("stall_tolerance", c.stall_tolerance);
  r("contraction", c.contraction);
  r("seed", c.seed);
  r.finish();
  c.inertia_end = std::min(inertia[0], inertia[1]);
  c.inertia_start = std::max(inertia[0], inertia[1]);
  c.validate();
  return c;
}

nlohmann::json to_json(const RoughnessSettings& s) {
  return {{"reference_psd", s.reference_psd}, {"reference_frequency", s.reference_frequency},
          {"min_frequency", s.min_frequency}, {"max_frequency", s.max_frequency},
          {"harmonics", s.harmonics},         {"max_taper", s.max_taper}};
}

RoughnessSettings roughness_from_json(const nlohmann::json& j) {
  RoughnessSettings s;
  Reader r(j, "roughness");
  r("reference_psd", s.reference_psd);
  r("reference_frequency", s.reference_frequency);
  r("min_frequency", s.min_frequency);
  r("max_frequency", s.max_frequency);
  r("harmonics", s.harmonics);
  r("max_taper", s.max_taper);
  r.finish();
  if (!(s.reference_psd >= 0.0) || !(s.reference_frequency > 0.0) || s.harmonics < 1 ||
      !(s.min_frequency > 0.0) || !(s.max_frequency > s.min_frequency) || !(s.max_taper > 0.0))
    throw InvalidInput("roughness: invalid settings");
  return s;
}

nlohmann::json to_json(const Band& b) {
  return {{"lower", b.lower}, {"upper", b.upper}, {"bins", b.bins}};
}

Band band_from_json(const nlohmann::json& j) {
  Band b;
  Reader r(j, "band");
  r("lower", b.lower);
  r("upper", b.upper);
  r("bins", b.bins);
  r.finish();
  if (!(b.lower < b.upper) || b.bins < 2) throw InvalidInput("band: need lower < upper and >= 2 bins");
  return b;
}

Band parse_band(const std::string& text) {
  Band b;
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw InvalidInput("band must look like LOW:HIGH, got '" + text + "'");
  try {
    std::size_t used = 0;
    b.lower = std::stod(text.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument("trailing");
    const std::string hi = text.substr(colon + 1);
    b.upper = std::stod(hi, &used);
    if (used != hi.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw InvalidInput("band must look like LOW:HIGH, got '" + text + "'");
  }
  if (!(b.lower < b.upper)) throw InvalidInput("band: lower must be < upper");
  return b;
}

std::string config_hash(const nlohmann::json& j) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

}  // namespace driveby
