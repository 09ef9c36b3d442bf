#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "driveby/aae.hpp"
#include "driveby/bridge.hpp"
#include "driveby/cp_estimator.hpp"
#include "driveby/evaluation.hpp"
#include "driveby/kriging.hpp"
#include "driveby/pso.hpp"
#include "driveby/road_profile.hpp"
#include "driveby/spectral.hpp"
#include "driveby/vbi_solver.hpp"
#include "driveby/vehicle.hpp"

namespace driveby {

/// Everything that defines an experiment. Child seeds are derived from
/// `master_seed`; `output_dir` and `threads` do not affect results.
struct ExperimentPlan {
  BeamBridge healthy_bridge;
  BeamBridge damaged_bridge;
  std::vector<HalfCarVehicle> vehicles;  // explicit list for `assess`
  DesignSpace space;
  int sweep_count = 30;
  int healthy_crossings = 120;
  int damaged_crossings = 60;
  std::size_t k = 10;
  DatasetCounts counts{80, 20, 20};
  Band band;
  WelchSettings welch;
  TrainingConfig training;
  PSOConfig pso;
  RoughnessSettings roughness;
  double time_step = 1e-3;
  CouplingMode coupling = CouplingMode::monolithic;
  int max_coupling_iterations = 50;  // iterative coupling only
  AxleMassModel cp_mass_model = AxleMassModel::rigid_body;
  std::uint64_t master_seed = 20240521;
  std::filesystem::path output_dir;
  int threads = 0;  // 0: hardware concurrency

  /// Reduced preset that finishes a sweep in hours on one workstation.
  static ExperimentPlan desk();
  /// Full-scale crossing, sample and epoch counts.
  static ExperimentPlan full();

  void validate() const;
  nlohmann::json to_json() const;
  static ExperimentPlan from_json(const nlohmann::json& j);
  static ExperimentPlan load(const std::filesystem::path& path);

  /// Seed path of the `index`-th crossing of one condition. Shared by every
  /// vehicle so that vehicle comparisons see the same roads.
  std::uint64_t crossing_seed(Condition condition, int index) const;
  int effective_threads() const;
};

/// Runs fn(0..n-1) on up to `threads` workers and rethrows the first error.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

struct CrossingDraw {
  std::uint64_t road_seed = 0;
  double speed = 0.0;
};

CrossingDraw crossing_draw(const ExperimentPlan& plan, const HalfCarVehicle& vehicle,
                           Condition condition, int index);

/// Simulates one plan crossing; seeds and speed are recorded in the metadata.
CrossingRecord simulate_plan_crossing(const ExperimentPlan& plan, const AssembledSystem& bridge,
                                      const HalfCarVehicle& vehicle, Condition condition,
                                      int index, bool retain_bridge_state = false);

/// Band-limited residual features of `count` crossings, row i = crossing i.
std::vector<std::vector<double>> simulate_features(const ExperimentPlan& plan,
                                                   const AssembledSystem& bridge,
                                                   const HalfCarVehicle& vehicle,
                                                   Condition condition, int count, int threads);

/// Autoencoder layout whose input and output width follow the band.
AAEArchitecture architecture_for(const Band& band);

/// Dataset rows as a matrix; one row per sample.
Eigen::MatrixXd sample_matrix(const std::vector<SpectrumSample>& samples);

struct VehicleAssessment {
  AssessmentRow row;
  std::string config_hash;
  std::vector<double> healthy_mean_spectrum;  // raw band features, mean over crossings
  std::vector<double> damaged_mean_spectrum;
  std::vector<double> train_di;
  double elapsed_seconds = 0.0;  // compute time of the run that filled the cache
  bool cache_hit = false;
  nlohmann::json manifest = nlohmann::json::object();
};

nlohmann::json to_json(const VehicleAssessment& a);
VehicleAssessment assessment_from_json(const nlohmann::json& j);

/// Hash of every plan field the assessment of `vehicle` depends on.
std::string assessment_hash(const ExperimentPlan& plan, const HalfCarVehicle& vehicle);

/// crossings -> CP estimates -> spectra -> AAE -> DI populations -> row.
/// Cached under output_dir/cache when output_dir is set. Errors are
/// rethrown with the vehicle name prepended.
VehicleAssessment run_vehicle_assessment(const ExperimentPlan& plan,
                                         const HalfCarVehicle& vehicle,
                                         std::optional<int> threads = std::nullopt);

struct SweepRecord {
  int index = 0;
  DesignPoint point;
  double wasserstein = 0.0;
  double accuracy = 0.0;
  double f1 = 0.0;
  double healthy_mean = 0.0;
  double damaged_mean = 0.0;
  double threshold = 0.0;
  std::string config_hash;
  std::string error;

  bool ok() const { return error.empty(); }
};

std::string sweep_csv(const std::vector<SweepRecord>& rows);
std::vector<SweepRecord> parse_sweep_csv(const std::string& text);
std::vector<SweepRecord> read_sweep_csv(const std::filesystem::path& path);

/// LHS design vehicles of the plan's design space.
std::vector<HalfCarVehicle> sweep_vehicles(const ExperimentPlan& plan);

using SweepProgress = std::function<void(const SweepRecord&, bool cache_hit)>;

/// Assesses every LHS vehicle. Failed rows keep their error text and the
/// sweep continues. Writes output_dir/sweep.csv when output_dir is set.
std::vector<SweepRecord> run_sweep(const ExperimentPlan& plan, const SweepProgress& progress = {});

enum class SurrogateSpace { dimensional, nondimensional };

struct OptimizationOptions {
  SurrogateSpace space = SurrogateSpace::dimensional;
  int grid_steps = 41;
  double holdout_fraction = 0.2;
};

struct OptimizationResult {
  SurrogateSpace space = SurrogateSpace::dimensional;
  KrigingModel model;
  PSOResult pso;
  DesignPoint optimum;
  double optimum_value = 0.0;
  double holdout_r2 = 0.0;  // NaN when too few rows for a split
  std::size_t training_rows = 0;
  std::vector<DesignPoint> grid;
  std::vector<double> grid_values;

  std::string grid_csv() const;
  nlohmann::json optimum_json() const;
  void write(const std::filesystem::path& dir) const;
};

/// Kriging on the successful sweep rows, then PSO on the surrogate.
OptimizationResult optimize(const std::vector<SweepRecord>& rows, const ExperimentPlan& plan,
                            const OptimizationOptions& options = {});

struct ScenarioReport {
  std::vector<VehicleAssessment> quarter_span;  // SV1..SV5, crack at L/4
  HalfCarVehicle transfer_best;                 // derived from SV1
  HalfCarVehicle transfer_worst;                // derived from SV3
  std::vector<VehicleAssessment> transfer;      // best, worst on the transfer bridge
  nlohmann::json json() const;
  void write(const std::filesystem::path& dir) const;
};

/// Vehicles whose (mu, beta) on `target` equal those of `source` on
/// `reference`.
HalfCarVehicle transfer_vehicle(const HalfCarVehicle& source, const BeamBridge& reference,
                                const BeamBridge& target, std::string name);

/// Quarter-span damage scenario and the transfer-bridge scenario.
ScenarioReport validate_scenarios(const ExperimentPlan& plan);

}  // namespace driveby
