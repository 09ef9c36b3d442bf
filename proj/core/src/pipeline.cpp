#include "driveby/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cctype>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "driveby/columnar.hpp"
#include "driveby/config.hpp"
#include "driveby/error.hpp"
#include "driveby/fixtures.hpp"
#include "driveby/nondimensional.hpp"
#include "driveby/random.hpp"

namespace driveby {

namespace {

// Bumped whenever the assessment procedure changes, so stale cache entries
// are never reused.
constexpr int kAssessmentVersion = 1;

const char* coupling_name(CouplingMode m) {
  return m == CouplingMode::monolithic ? "monolithic" : "iterative";
}

CouplingMode coupling_from(const std::string& s) {
  if (s == "monolithic") return CouplingMode::monolithic;
  if (s == "iterative") return CouplingMode::iterative;
  throw InvalidInput("coupling must be 'monolithic' or 'iterative', got '" + s + "'");
}

const char* mass_model_name(AxleMassModel m) {
  return m == AxleMassModel::static_split ? "static_split" : "rigid_body";
}

AxleMassModel mass_model_from(const std::string& s) {
  if (s == "static_split") return AxleMassModel::static_split;
  if (s == "rigid_body") return AxleMassModel::rigid_body;
  throw InvalidInput("cp_mass_model must be 'static_split' or 'rigid_body', got '" + s + "'");
}

BeamBridge bridge_entry(const nlohmann::json& j) {
  if (j.is_string()) return fixtures::bridge_by_name(j.get<std::string>());
  return bridge_from_json(j);
}

HalfCarVehicle vehicle_entry(const nlohmann::json& j) {
  if (j.is_string()) return fixtures::vehicle_by_name(j.get<std::string>());
  return vehicle_from_json(j);
}

template <class T>
T get_as(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidInput(std::string("plan: key '") + key + "' has the wrong type");
  }
}

double first_frequency(const BeamBridge& bridge) {
  return natural_frequencies(AssembledSystem::assemble(bridge), 1).front();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_safe(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

std::string file_stem(const std::string& name) {
  std::string s;
  for (char c : name) s += std::isalnum(static_cast<unsigned char>(c)) || c == '-' ? c : '_';
  return s.empty() ? "vehicle" : s;
}

nlohmann::json welch_json(const WelchSettings& w) {
  return {{"segment_length", w.segment_length}, {"fft_length", w.fft_length},
          {"overlap", w.overlap}};
}

nlohmann::json counts_json(const DatasetCounts& c) {
  return {{"train", c.train}, {"test_healthy", c.test_healthy}, {"test_damaged", c.test_damaged}};
}

}  // namespace

ExperimentPlan ExperimentPlan::desk() {
  ExperimentPlan p;
  p.healthy_bridge = fixtures::reference_bridge();
  p.damaged_bridge = fixtures::with_crack(fixtures::reference_bridge(), 12.5);
  p.vehicles = fixtures::comparison_vehicles();
  p.training.epochs = 300;
  return p;
}

ExperimentPlan ExperimentPlan::full() {
  ExperimentPlan p = desk();
  p.sweep_count = 1500;
  p.healthy_crossings = 500;
  p.damaged_crossings = 100;
  p.k = 30;
  p.counts = {400, 100, 100};
  p.training.epochs = 1000;
  return p;
}

void ExperimentPlan::validate() const {
  healthy_bridge.validate();
  damaged_bridge.validate();
  if (healthy_bridge.span_length != damaged_bridge.span_length)
    throw InvalidInput("plan: healthy and damaged bridges must share the span length");
  for (const auto& v : vehicles) v.validate();
  space.validate();
  if (sweep_count < 1) throw InvalidInput("plan: sweep_count must be >= 1");
  if (k < 1) throw InvalidInput("plan: k must be >= 1");
  const auto hn = static_cast<std::size_t>(std::max(healthy_crossings, 0));
  const auto dm = static_cast<std::size_t>(std::max(damaged_crossings, 0));
  // 80/20 pools of the healthy crossings must each hold k distinct members.
  const std::size_t train_pool = (hn * 4) / 5;
  if (train_pool < k || hn - train_pool < k || dm < k)
    throw InvalidInput("plan: every crossing pool needs at least k crossings");
  if (counts.train < 10) throw InvalidInput("plan: need >= 10 training samples for the threshold");
  if (counts.test_healthy < 1 || counts.test_damaged < 1)
    throw InvalidInput("plan: test counts must be >= 1");
  if (!(band.lower < band.upper) || band.bins < 2) throw InvalidInput("plan: invalid band");
  if (welch.segment_length < 16 || welch.fft_length < welch.segment_length ||
      !(welch.overlap >= 0.0 && welch.overlap < 1.0))
    throw InvalidInput("plan: invalid Welch settings");
  if (!(time_step > 0.0)) throw InvalidInput("plan: time_step must be > 0");
  if (band.upper >= 0.5 / time_step) throw InvalidInput("plan: band exceeds the Nyquist frequency");
  training.validate();
  pso.validate();
  if (max_coupling_iterations < 1) throw InvalidInput("plan: max_coupling_iterations must be >= 1");
  if (threads < 0) throw InvalidInput("plan: threads must be >= 0");
}

nlohmann::json ExperimentPlan::to_json() const {
  nlohmann::json vs = nlohmann::json::array();
  for (const auto& v : vehicles) vs.push_back(driveby::to_json(v));
  return {{"healthy_bridge", driveby::to_json(healthy_bridge)},
          {"damaged_bridge", driveby::to_json(damaged_bridge)},
          {"vehicles", vs},
          {"design_space", driveby::to_json(space)},
          {"sweep_count", sweep_count},
          {"healthy_crossings", healthy_crossings},
          {"damaged_crossings", damaged_crossings},
          {"k", k},
          {"counts", counts_json(counts)},
          {"band", driveby::to_json(band)},
          {"welch", welch_json(welch)},
          {"training", driveby::to_json(training)},
          {"pso", driveby::to_json(pso)},
          {"roughness", driveby::to_json(roughness)},
          {"time_step", time_step},
          {"coupling", coupling_name(coupling)},
          {"max_coupling_iterations", max_coupling_iterations},
          {"cp_mass_model", mass_model_name(cp_mass_model)},
          {"master_seed", master_seed},
          {"output_dir", output_dir.string()},
          {"threads", threads}};
}

ExperimentPlan ExperimentPlan::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidInput("plan: expected an object");
  static const std::set<std::string> known = {
      "preset",  "healthy_bridge", "damaged_bridge", "vehicles",      "design_space",
      "sweep_count", "healthy_crossings", "damaged_crossings", "k",   "counts",
      "band",    "welch",          "training",       "pso",           "roughness",
      "time_step", "coupling",     "max_coupling_iterations", "cp_mass_model",  "master_seed",   "output_dir",
      "threads"};
  for (const auto& item : j.items())
    if (!known.count(item.key())) throw InvalidInput("plan: unknown key '" + item.key() + "'");

  ExperimentPlan p = desk();
  if (j.contains("preset")) {
    const auto preset = get_as<std::string>(j, "preset");
    if (preset == "full") p = full();
    else if (preset != "desk") throw InvalidInput("plan: preset must be 'desk' or 'full'");
  }
  if (j.contains("healthy_bridge")) p.healthy_bridge = bridge_entry(j.at("healthy_bridge"));
  if (j.contains("damaged_bridge")) p.damaged_bridge = bridge_entry(j.at("damaged_bridge"));
  if (j.contains("vehicles")) {
    if (!j.at("vehicles").is_array()) throw InvalidInput("plan: vehicles must be an array");
    p.vehicles.clear();
    for (const auto& v : j.at("vehicles")) p.vehicles.push_back(vehicle_entry(v));
  }
  if (j.contains("design_space")) p.space = design_space_from_json(j.at("design_space"));
  if (j.contains("sweep_count")) p.sweep_count = get_as<int>(j, "sweep_count");
  if (j.contains("healthy_crossings")) p.healthy_crossings = get_as<int>(j, "healthy_crossings");
  if (j.contains("damaged_crossings")) p.damaged_crossings = get_as<int>(j, "damaged_crossings");
  if (j.contains("k")) p.k = get_as<std::size_t>(j, "k");
  if (j.contains("counts")) {
    const auto& c = j.at("counts");
    if (!c.is_object()) throw InvalidInput("plan: counts must be an object");
    for (const auto& item : c.items())
      if (item.key() != "train" && item.key() != "test_healthy" && item.key() != "test_damaged")
        throw InvalidInput("plan.counts: unknown key '" + item.key() + "'");
    if (c.contains("train")) p.counts.train = get_as<std::size_t>(c, "train");
    if (c.contains("test_healthy")) p.counts.test_healthy = get_as<std::size_t>(c, "test_healthy");
    if (c.contains("test_damaged")) p.counts.test_damaged = get_as<std::size_t>(c, "test_damaged");
  }
  if (j.contains("band")) p.band = band_from_json(j.at("band"));
  if (j.contains("welch")) {
    const auto& w = j.at("welch");
    if (!w.is_object()) throw InvalidInput("plan: welch must be an object");
    for (const auto& item : w.items())
      if (item.key() != "segment_length" && item.key() != "fft_length" && item.key() != "overlap")
        throw InvalidInput("plan.welch: unknown key '" + item.key() + "'");
    if (w.contains("segment_length")) p.welch.segment_length = get_as<std::size_t>(w, "segment_length");
    if (w.contains("fft_length")) p.welch.fft_length = get_as<std::size_t>(w, "fft_length");
    if (w.contains("overlap")) p.welch.overlap = get_as<double>(w, "overlap");
  }
  if (j.contains("training")) {
    // Partial overrides keep the preset's remaining training fields.
    nlohmann::json t = driveby::to_json(p.training);
    t.update(j.at("training"));
    p.training = training_from_json(t);
  }
  if (j.contains("pso")) {
    nlohmann::json t = driveby::to_json(p.pso);
    t.update(j.at("pso"));
    p.pso = pso_from_json(t);
  }
  if (j.contains("roughness")) {
    nlohmann::json t = driveby::to_json(p.roughness);
    t.update(j.at("roughness"));
    p.roughness = roughness_from_json(t);
  }
  if (j.contains("time_step")) p.time_step = get_as<double>(j, "time_step");
  if (j.contains("coupling")) p.coupling = coupling_from(get_as<std::string>(j, "coupling"));
  if (j.contains("max_coupling_iterations"))
    p.max_coupling_iterations = get_as<int>(j, "max_coupling_iterations");
  if (j.contains("cp_mass_model"))
    p.cp_mass_model = mass_model_from(get_as<std::string>(j, "cp_mass_model"));
  if (j.contains("master_seed")) p.master_seed = get_as<std::uint64_t>(j, "master_seed");
  if (j.contains("output_dir")) p.output_dir = get_as<std::string>(j, "output_dir");
  if (j.contains("threads")) p.threads = get_as<int>(j, "threads");
  p.validate();
  return p;
}

ExperimentPlan ExperimentPlan::load(const std::filesystem::path& path) {
  return from_json(read_json(path));
}

std::uint64_t ExperimentPlan::crossing_seed(Condition condition, int index) const {
  return derive_seed(master_seed, "crossing",
                     {static_cast<std::uint64_t>(condition), static_cast<std::uint64_t>(index)});
}

int ExperimentPlan::effective_threads() const {
  if (threads > 0) return threads;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const auto workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

CrossingDraw crossing_draw(const ExperimentPlan& plan, const HalfCarVehicle& vehicle,
                           Condition condition, int index) {
  const auto seed = plan.crossing_seed(condition, index);
  return {derive_seed(seed, "road"), sample_speed(vehicle, derive_seed(seed, "speed"))};
}

CrossingRecord simulate_plan_crossing(const ExperimentPlan& plan, const AssembledSystem& bridge,
                                      const HalfCarVehicle& vehicle, Condition condition,
                                      int index, bool retain_bridge_state) {
  const auto draw = crossing_draw(plan, vehicle, condition, index);
  const auto road =
      RoadProfile::generate(bridge.bridge().span_length, draw.road_seed, plan.roughness);
  CrossingConfig cfg;
  cfg.speed = draw.speed;
  cfg.time_step = plan.time_step;
  cfg.coupling = plan.coupling;
  cfg.max_coupling_iterations = plan.max_coupling_iterations;
  cfg.retain_bridge_state = retain_bridge_state;
  auto record = simulate_crossing(bridge, vehicle, road, cfg);
  record.metadata["condition"] = condition == Condition::healthy ? "healthy" : "damaged";
  record.metadata["index"] = index;
  record.metadata["road_seed"] = draw.road_seed;
  record.metadata["master_seed"] = plan.master_seed;
  record.metadata["vehicle"] = driveby::to_json(vehicle);
  record.metadata["bridge"] = driveby::to_json(bridge.bridge());
  return record;
}

std::vector<std::vector<double>> simulate_features(const ExperimentPlan& plan,
                                                   const AssembledSystem& bridge,
                                                   const HalfCarVehicle& vehicle,
                                                   Condition condition, int count, int threads) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(std::max(count, 0)));
  parallel_for(out.size(), threads, [&](std::size_t i) {
    const auto record = simulate_plan_crossing(plan, bridge, vehicle, condition, static_cast<int>(i));
    out[i] = crossing_features(record, vehicle, plan.band, plan.welch, plan.cp_mass_model);
  });
  return out;
}

AAEArchitecture architecture_for(const Band& band) {
  AAEArchitecture arch;
  const int bins = static_cast<int>(band.bins);
  arch.encoder.front() = bins;
  arch.decoder.back() = bins;
  arch.validate();
  return arch;
}

Eigen::MatrixXd sample_matrix(const std::vector<SpectrumSample>& samples) {
  if (samples.empty()) return {};
  Eigen::MatrixXd m(static_cast<Eigen::Index>(samples.size()),
                    static_cast<Eigen::Index>(samples.front().values.size()));
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t j = 0; j < samples[i].values.size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = samples[i].values[j];
  return m;
}

nlohmann::json to_json(const VehicleAssessment& a) {
  return {{"row", to_json(a.row)},
          {"config_hash", a.config_hash},
          {"healthy_mean_spectrum", a.healthy_mean_spectrum},
          {"damaged_mean_spectrum", a.damaged_mean_spectrum},
          {"train_di", a.train_di},
          {"elapsed_seconds", a.elapsed_seconds},
          {"manifest", a.manifest}};
}

VehicleAssessment assessment_from_json(const nlohmann::json& j) {
  try {
    VehicleAssessment a;
    a.row = row_from_json(j.at("row"));
    a.config_hash = j.at("config_hash").get<std::string>();
    a.healthy_mean_spectrum = j.at("healthy_mean_spectrum").get<std::vector<double>>();
    a.damaged_mean_spectrum = j.at("damaged_mean_spectrum").get<std::vector<double>>();
    a.train_di = j.at("train_di").get<std::vector<double>>();
    a.elapsed_seconds = j.at("elapsed_seconds").get<double>();
    a.manifest = j.at("manifest");
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed assessment record: ") + e.what());
  }
}

namespace {

nlohmann::json assessment_inputs(const ExperimentPlan& plan, const HalfCarVehicle& vehicle) {
  return {{"version", kAssessmentVersion},
          {"healthy_bridge", to_json(plan.healthy_bridge)},
          {"damaged_bridge", to_json(plan.damaged_bridge)},
          {"vehicle", to_json(vehicle)},
          {"healthy_crossings", plan.healthy_crossings},
          {"damaged_crossings", plan.damaged_crossings},
          {"k", plan.k},
          {"counts", counts_json(plan.counts)},
          {"band", to_json(plan.band)},
          {"welch", welch_json(plan.welch)},
          {"training", to_json(plan.training)},
          {"roughness", to_json(plan.roughness)},
          {"time_step", plan.time_step},
          {"coupling", coupling_name(plan.coupling)},
          {"max_coupling_iterations",
           plan.coupling == CouplingMode::iterative ? plan.max_coupling_iterations : 0},
          {"cp_mass_model", mass_model_name(plan.cp_mass_model)},
          {"master_seed", plan.master_seed}};
}

VehicleAssessment compute_assessment(const ExperimentPlan& plan, const HalfCarVehicle& vehicle,
                                     int threads, const std::string& hash) {
  const auto start = std::chrono::steady_clock::now();
  const auto healthy = AssembledSystem::assemble(plan.healthy_bridge);
  const auto damaged = AssembledSystem::assemble(plan.damaged_bridge);
  const double f_b1 = natural_frequencies(healthy, 1).front();

  const auto hn =
      simulate_features(plan, healthy, vehicle, Condition::healthy, plan.healthy_crossings, threads);
  const auto dm =
      simulate_features(plan, damaged, vehicle, Condition::damaged, plan.damaged_crossings, threads);

  const auto dataset_seed = derive_seed(plan.master_seed, "dataset");
  const auto ds = build_dataset(hn, dm, plan.k, plan.counts, dataset_seed, plan.band);

  TrainingConfig training = plan.training;
  training.seed = derive_seed(plan.master_seed, "aae", {plan.training.seed});
  TrainingHistory history;
  const auto train_rows = sample_matrix(ds.train);
  const auto model = train_aae(train_rows, training, architecture_for(plan.band), &history);

  VehicleAssessment out;
  out.config_hash = hash;
  out.train_di = damage_indices(model, train_rows);
  const double threshold = fit_threshold(out.train_di);
  std::vector<double> hn_di, dm_di;
  for (const auto& s : ds.test)
    (s.label == Condition::healthy ? hn_di : dm_di).push_back(damage_index(model, s.values));

  out.row = summarize(vehicle.name, classify(hn_di, dm_di, threshold));
  out.row.mass = vehicle.mass;
  out.row.stiffness = vehicle.k_front;
  out.row.mass_ratio = mass_ratio(vehicle, plan.healthy_bridge);
  out.row.frequency_ratio = frequency_ratio(vehicle, f_b1);
  out.healthy_mean_spectrum = average_runs(hn);
  out.damaged_mean_spectrum = average_runs(dm);

  nlohmann::json crossings = nlohmann::json::array();
  for (auto condition : {Condition::healthy, Condition::damaged}) {
    const int n = condition == Condition::healthy ? plan.healthy_crossings : plan.damaged_crossings;
    for (int i = 0; i < n; ++i) {
      const auto draw = crossing_draw(plan, vehicle, condition, i);
      crossings.push_back({{"condition", condition == Condition::healthy ? "healthy" : "damaged"},
                           {"index", i},
                           {"road_seed", draw.road_seed},
                           {"speed", draw.speed}});
    }
  }
  out.manifest = {{"config_hash", hash},
                  {"inputs", assessment_inputs(plan, vehicle)},
                  {"bridge_frequency", f_b1},
                  {"dataset_seed", dataset_seed},
                  {"training_seed", training.seed},
                  {"normalization", {{"min", ds.reference.min}, {"max", ds.reference.max}}},
                  {"final_losses",
                   history.reconstruction.empty()
                       ? nlohmann::json(nullptr)
                       : nlohmann::json{{"reconstruction", history.reconstruction.back()},
                                        {"adversarial", history.adversarial.back()},
                                        {"discriminator", history.discriminator.back()}}},
                  {"crossings", crossings}};
  out.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (!plan.output_dir.empty()) {
    AAEModel saved = model;
    saved.metadata() = {{"config_hash", hash},
                        {"vehicle", vehicle.name},
                        {"threshold", threshold},
                        {"normalization", {{"min", ds.reference.min}, {"max", ds.reference.max}}}};
    saved.save(plan.output_dir / "models" / (file_stem(vehicle.name) + "-" + hash + ".aae"));
  }
  return out;
}

}  // namespace

std::string assessment_hash(const ExperimentPlan& plan, const HalfCarVehicle& vehicle) {
  return config_hash(assessment_inputs(plan, vehicle));
}

VehicleAssessment run_vehicle_assessment(const ExperimentPlan& plan, const HalfCarVehicle& vehicle,
                                         std::optional<int> threads) {
  const std::string hash = assessment_hash(plan, vehicle);
  std::filesystem::path cache;
  if (!plan.output_dir.empty()) {
    cache = plan.output_dir / "cache" / (file_stem(vehicle.name) + "-" + hash + ".json");
    if (std::filesystem::exists(cache)) {
      try {
        auto a = assessment_from_json(read_json(cache));
        if (a.config_hash == hash) {
          a.cache_hit = true;
          return a;
        }
      } catch (const Error&) {
        // Unreadable entry: recompute and overwrite.
      }
    }
  }
  try {
    plan.validate();
    vehicle.validate();
    auto a = compute_assessment(plan, vehicle, threads.value_or(plan.effective_threads()), hash);
    if (!cache.empty()) write_json(cache, to_json(a));
    return a;
  } catch (const NumericalError& e) {
    throw NumericalError(vehicle.name + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(vehicle.name + ": " + e.what());
  } catch (const InvalidInput& e) {
    throw InvalidInput(vehicle.name + ": " + e.what());
  }
}

std::string sweep_csv(const std::vector<SweepRecord>& rows) {
  std::ostringstream out;
  out << "index,mass,stiffness,mu,beta,wd,accuracy,f1,hn_mean_di,dm_mean_di,threshold,config_hash,"
         "error\n";
  for (const auto& r : rows)
    out << r.index << ',' << fmt(r.point.mass) << ',' << fmt(r.point.stiffness) << ','
        << fmt(r.point.mass_ratio) << ',' << fmt(r.point.frequency_ratio) << ','
        << fmt(r.wasserstein) << ',' << fmt(r.accuracy) << ',' << fmt(r.f1) << ','
        << fmt(r.healthy_mean) << ',' << fmt(r.damaged_mean) << ',' << fmt(r.threshold) << ','
        << r.config_hash << ',' << csv_safe(r.error) << '\n';
  return out.str();
}

std::vector<SweepRecord> parse_sweep_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("sweep CSV is empty");
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  const auto header = split(line);
  auto col = [&](const std::string& name) -> int {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int c_mass = col("mass"), c_k = col("stiffness"), c_wd = col("wd");
  if (c_mass < 0 || c_k < 0 || c_wd < 0)
    throw InvalidInput("sweep CSV needs mass, stiffness and wd columns");
  const int c_index = col("index"), c_mu = col("mu"), c_beta = col("beta"), c_acc = col("accuracy"),
            c_f1 = col("f1"), c_hn = col("hn_mean_di"), c_dm = col("dm_mean_di"),
            c_thr = col("threshold"), c_hash = col("config_hash"), c_err = col("error");

  std::vector<SweepRecord> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw InvalidInput("sweep CSV line " + std::to_string(line_no) + ": expected " +
                         std::to_string(header.size()) + " cells, got " +
                         std::to_string(cells.size()));
    auto num = [&](int c, double fallback) {
      if (c < 0 || c >= static_cast<int>(cells.size()) || cells[c].empty()) return fallback;
      try {
        return std::stod(cells[c]);
      } catch (const std::exception&) {
        throw InvalidInput("sweep CSV line " + std::to_string(line_no) + ": bad number '" +
                           cells[c] + "'");
      }
    };
    auto text_at = [&](int c) {
      return c < 0 || c >= static_cast<int>(cells.size()) ? std::string{} : cells[c];
    };
    const double nan = std::numeric_limits<double>::quiet_NaN();
    SweepRecord r;
    r.index = static_cast<int>(num(c_index, static_cast<double>(rows.size())));
    r.point.mass = num(c_mass, nan);
    r.point.stiffness = num(c_k, nan);
    r.point.mass_ratio = num(c_mu, nan);
    r.point.frequency_ratio = num(c_beta, nan);
    r.wasserstein = num(c_wd, nan);
    r.accuracy = num(c_acc, nan);
    r.f1 = num(c_f1, nan);
    r.healthy_mean = num(c_hn, nan);
    r.damaged_mean = num(c_dm, nan);
    r.threshold = num(c_thr, nan);
    r.config_hash = text_at(c_hash);
    r.error = text_at(c_err);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<SweepRecord> read_sweep_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_sweep_csv(ss.str());
}

std::vector<HalfCarVehicle> sweep_vehicles(const ExperimentPlan& plan) {
  const auto points = lhs_sample(plan.space, plan.sweep_count, derive_seed(plan.master_seed, "lhs"));
  std::vector<HalfCarVehicle> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "LHS-%04zu", i);
    out.push_back(HalfCarVehicle::with_design(points[i].mass, points[i].stiffness, name));
  }
  return out;
}

std::vector<SweepRecord> run_sweep(const ExperimentPlan& plan, const SweepProgress& progress) {
  plan.validate();
  const auto vehicles = sweep_vehicles(plan);
  const double f_b1 = first_frequency(plan.healthy_bridge);
  std::vector<SweepRecord> rows(vehicles.size());
  std::mutex progress_mutex;

  parallel_for(vehicles.size(), plan.effective_threads(), [&](std::size_t i) {
    const auto& v = vehicles[i];
    SweepRecord& r = rows[i];
    r.index = static_cast<int>(i);
    r.point.mass = v.mass;
    r.point.stiffness = v.k_front;
    r.point.mass_ratio = mass_ratio(v, plan.healthy_bridge);
    r.point.frequency_ratio = frequency_ratio(v, f_b1);
    r.config_hash = assessment_hash(plan, v);
    bool hit = false;
    try {
      const auto a = run_vehicle_assessment(plan, v, 1);
      hit = a.cache_hit;
      r.wasserstein = a.row.wasserstein;
      r.accuracy = a.row.accuracy;
      r.f1 = a.row.f1;
      r.healthy_mean = a.row.healthy_mean;
      r.damaged_mean = a.row.damaged_mean;
      r.threshold = a.row.threshold;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(r, hit);
    }
  });

  if (!plan.output_dir.empty()) write_text(plan.output_dir / "sweep.csv", sweep_csv(rows));
  return rows;
}

std::string OptimizationResult::grid_csv() const {
  std::ostringstream out;
  out << "mass,stiffness,mu,beta,wd_predicted\n";
  for (std::size_t i = 0; i < grid.size(); ++i)
    out << fmt(grid[i].mass) << ',' << fmt(grid[i].stiffness) << ',' << fmt(grid[i].mass_ratio)
        << ',' << fmt(grid[i].frequency_ratio) << ',' << fmt(grid_values[i]) << '\n';
  return out.str();
}

nlohmann::json OptimizationResult::optimum_json() const {
  nlohmann::json history = pso.history;
  return {{"space", space == SurrogateSpace::dimensional ? "dimensional" : "nondimensional"},
          {"mass", optimum.mass},
          {"stiffness", optimum.stiffness},
          {"mu", optimum.mass_ratio},
          {"beta", optimum.frequency_ratio},
          {"wd_predicted", optimum_value},
          {"pso_iterations", pso.iterations},
          {"holdout_r2", std::isfinite(holdout_r2) ? nlohmann::json(holdout_r2) : nlohmann::json()},
          {"training_rows", training_rows},
          {"gbest_history", history}};
}

void OptimizationResult::write(const std::filesystem::path& dir) const {
  write_json(dir / "kriging.json", model.to_json());
  write_text(dir / "surrogate_grid.csv", grid_csv());
  write_json(dir / "optimum.json", optimum_json());
}

OptimizationResult optimize(const std::vector<SweepRecord>& rows, const ExperimentPlan& plan,
                            const OptimizationOptions& options) {
  if (options.grid_steps < 2) throw InvalidInput("optimize: grid_steps must be >= 2");
  if (!(options.holdout_fraction >= 0.0 && options.holdout_fraction < 1.0))
    throw InvalidInput("optimize: holdout_fraction must be in [0, 1)");
  const auto& bridge = plan.healthy_bridge;
  const double f_b1 = first_frequency(bridge);
  const bool nd = options.space == SurrogateSpace::nondimensional;

  auto coordinates = [&](const DesignPoint& p) -> Eigen::Vector2d {
    if (!nd) return {p.mass, p.stiffness};
    const auto m = nondimensional_map(p, bridge, f_b1);
    return {m.mass_ratio, m.frequency_ratio};
  };

  std::vector<const SweepRecord*> ok;
  for (const auto& r : rows)
    if (r.ok() && std::isfinite(r.wasserstein)) ok.push_back(&r);
  if (ok.size() < 10) throw InvalidInput("optimize: need >= 10 successful sweep rows");

  Eigen::MatrixXd x(static_cast<Eigen::Index>(ok.size()), 2);
  Eigen::VectorXd y(static_cast<Eigen::Index>(ok.size()));
  for (std::size_t i = 0; i < ok.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = coordinates(ok[i]->point).transpose();
    y(static_cast<Eigen::Index>(i)) = ok[i]->wasserstein;
  }

  Eigen::Vector2d lower, upper;
  if (!nd) {
    lower << plan.space.mass.lower, plan.space.stiffness.lower;
    upper << plan.space.mass.upper, plan.space.stiffness.upper;
  } else {
    // beta decreases with mass and grows with stiffness, so the corners
    // bound the mapped design space.
    const auto lo = coordinates({plan.space.mass.lower, plan.space.stiffness.lower});
    const auto hi = coordinates({plan.space.mass.upper, plan.space.stiffness.upper});
    const auto b_min = coordinates({plan.space.mass.upper, plan.space.stiffness.lower});
    const auto b_max = coordinates({plan.space.mass.lower, plan.space.stiffness.upper});
    lower << lo(0), b_min(1);
    upper << hi(0), b_max(1);
  }

  OptimizationResult out;
  out.space = options.space;
  out.training_rows = ok.size();
  out.holdout_r2 = std::numeric_limits<double>::quiet_NaN();

  const auto n = ok.size();
  const auto n_test = static_cast<std::size_t>(std::llround(options.holdout_fraction * static_cast<double>(n)));
  if (n_test >= 1 && n - n_test >= 10) {
    Rng rng(derive_seed(plan.master_seed, "holdout"));
    const auto perm = rng.permutation(n);
    Eigen::MatrixXd xt(static_cast<Eigen::Index>(n - n_test), 2);
    Eigen::VectorXd yt(static_cast<Eigen::Index>(n - n_test));
    for (std::size_t i = n_test; i < n; ++i) {
      xt.row(static_cast<Eigen::Index>(i - n_test)) = x.row(static_cast<Eigen::Index>(perm[i]));
      yt(static_cast<Eigen::Index>(i - n_test)) = y(static_cast<Eigen::Index>(perm[i]));
    }
    const auto held = KrigingModel::fit(xt, yt, lower, upper);
    std::vector<double> truth, predicted;
    for (std::size_t i = 0; i < n_test; ++i) {
      truth.push_back(y(static_cast<Eigen::Index>(perm[i])));
      predicted.push_back(held(x.row(static_cast<Eigen::Index>(perm[i])).transpose()));
    }
    out.holdout_r2 = r_squared(truth, predicted);
  }

  out.model = KrigingModel::fit(x, y, lower, upper);
  PSOConfig pso = plan.pso;
  pso.seed = derive_seed(plan.master_seed, "pso", {plan.pso.seed});
  out.pso = pso_maximize([&](const Eigen::VectorXd& p) { return out.model(p); }, lower, upper, pso);
  out.optimum_value = out.pso.value;
  if (!nd) {
    out.optimum.mass = out.pso.best(0);
    out.optimum.stiffness = out.pso.best(1);
    const auto m = nondimensional_map(out.optimum, bridge, f_b1);
    out.optimum.mass_ratio = m.mass_ratio;
    out.optimum.frequency_ratio = m.frequency_ratio;
  } else {
    const auto v = inverse_nondimensional({out.pso.best(0), out.pso.best(1)}, bridge, f_b1);
    out.optimum.mass = v.mass;
    out.optimum.stiffness = v.k_front;
    out.optimum.mass_ratio = out.pso.best(0);
    out.optimum.frequency_ratio = out.pso.best(1);
  }

  if (!nd) {
    out.grid = surrogate_grid(out.model, plan.space, options.grid_steps, options.grid_steps, bridge,
                              f_b1, out.grid_values);
  } else {
    const int s = options.grid_steps;
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j) {
        DesignPoint p;
        p.mass = plan.space.mass.lower + plan.space.mass.width() * i / (s - 1);
        p.stiffness = plan.space.stiffness.lower + plan.space.stiffness.width() * j / (s - 1);
        const auto c = coordinates(p);
        p.mass_ratio = c(0);
        p.frequency_ratio = c(1);
        out.grid_values.push_back(out.model(c));
        out.grid.push_back(p);
      }
  }
  return out;
}

nlohmann::json ScenarioReport::json() const {
  auto rows = [](const std::vector<VehicleAssessment>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& x : v) a.push_back(to_json(x.row));
    return a;
  };
  return {{"quarter_span", rows(quarter_span)},
          {"transfer_vehicles", {to_json(transfer_best), to_json(transfer_worst)}},
          {"transfer", rows(transfer)}};
}

void ScenarioReport::write(const std::filesystem::path& dir) const {
  auto table = [](const std::vector<VehicleAssessment>& v) {
    std::vector<AssessmentRow> rows;
    for (const auto& x : v) rows.push_back(x.row);
    return assessment_report(std::move(rows));
  };
  table(quarter_span).write(dir / "quarter_span.csv", dir / "quarter_span.json");
  table(transfer).write(dir / "transfer.csv", dir / "transfer.json");
  write_json(dir / "scenarios.json", json());
}

HalfCarVehicle transfer_vehicle(const HalfCarVehicle& source, const BeamBridge& reference,
                                const BeamBridge& target, std::string name) {
  const double f_ref = first_frequency(reference);
  const NondimensionalPoint nd{mass_ratio(source, reference), frequency_ratio(source, f_ref)};
  auto v = inverse_nondimensional(nd, target, first_frequency(target), source);
  v.name = std::move(name);
  return v;
}

ScenarioReport validate_scenarios(const ExperimentPlan& plan) {
  plan.validate();
  ScenarioReport report;

  ExperimentPlan quarter = plan;
  quarter.damaged_bridge =
      fixtures::with_crack(plan.healthy_bridge, plan.healthy_bridge.span_length / 4.0,
                           plan.damaged_bridge.damage ? plan.damaged_bridge.damage->depth_ratio : 0.1);
  for (const auto& v : fixtures::comparison_vehicles())
    report.quarter_span.push_back(run_vehicle_assessment(quarter, v));

  ExperimentPlan transfer = plan;
  transfer.healthy_bridge = fixtures::transfer_bridge();
  transfer.damaged_bridge = fixtures::with_crack(transfer.healthy_bridge, 7.5);
  report.transfer_best = transfer_vehicle(fixtures::sv(1), plan.healthy_bridge,
                                          transfer.healthy_bridge, "SV-N1");
  report.transfer_worst = transfer_vehicle(fixtures::sv(3), plan.healthy_bridge,
                                           transfer.healthy_bridge, "SV-N2");
  report.transfer.push_back(run_vehicle_assessment(transfer, report.transfer_best));
  report.transfer.push_back(run_vehicle_assessment(transfer, report.transfer_worst));

  if (!plan.output_dir.empty()) report.write(plan.output_dir / "validate");
  return report;
}

}  // namespace driveby
