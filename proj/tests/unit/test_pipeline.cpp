#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "driveby/columnar.hpp"
#include "driveby/error.hpp"
#include "driveby/fixtures.hpp"
#include "driveby/nondimensional.hpp"
#include "driveby/pipeline.hpp"

using namespace driveby;
namespace fs = std::filesystem;

namespace {

// Enough of everything to exercise the full chain in a few seconds.
ExperimentPlan small_plan() {
  auto p = ExperimentPlan::desk();
  p.healthy_crossings = 25;
  p.damaged_crossings = 10;
  p.k = 3;
  p.counts = {12, 4, 4};
  p.band.bins = 32;
  p.training.epochs = 5;
  p.time_step = 4e-3;
  p.welch.fft_length = 1u << 14;
  p.space.mass = {2000.0, 12000.0};
  p.space.stiffness = {0.5e6, 4.0e6};
  p.sweep_count = 2;
  p.threads = 1;
  return p;
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "driveby-pipeline-test" / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void expect_same_row(const AssessmentRow& a, const AssessmentRow& b) {
  EXPECT_EQ(a.vehicle, b.vehicle);
  EXPECT_EQ(a.healthy_di, b.healthy_di);
  EXPECT_EQ(a.damaged_di, b.damaged_di);
  EXPECT_DOUBLE_EQ(a.threshold, b.threshold);
  EXPECT_DOUBLE_EQ(a.accuracy, b.accuracy);
  EXPECT_DOUBLE_EQ(a.wasserstein, b.wasserstein);
}

}  // namespace

TEST(Pipeline, PresetsValidate) {
  EXPECT_NO_THROW(ExperimentPlan::desk().validate());
  EXPECT_NO_THROW(ExperimentPlan::full().validate());
  EXPECT_NO_THROW(small_plan().validate());
  EXPECT_EQ(ExperimentPlan::desk().vehicles.size(), 5u);
}

TEST(Pipeline, ValidationRejectsInconsistentPlans) {
  auto p = small_plan();
  p.k = 30;  // larger than every pool
  EXPECT_THROW(p.validate(), InvalidInput);

  p = small_plan();
  p.band = {3.0, 200.0, 32};  // above Nyquist for dt = 4 ms
  EXPECT_THROW(p.validate(), InvalidInput);

  p = small_plan();
  p.damaged_bridge = fixtures::transfer_bridge();
  EXPECT_THROW(p.validate(), InvalidInput);

  p = small_plan();
  p.counts.train = 3;
  EXPECT_THROW(p.validate(), InvalidInput);

  p = small_plan();
  p.threads = -1;
  EXPECT_THROW(p.validate(), InvalidInput);
}

TEST(Pipeline, ParallelForVisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(97);
  parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  parallel_for(0, 4, [](std::size_t) { FAIL(); });
}

TEST(Pipeline, ParallelForRethrows) {
  EXPECT_THROW(parallel_for(20, 3,
                            [](std::size_t i) {
                              if (i == 11) throw NumericalError("boom");
                            }),
               NumericalError);
}

TEST(Pipeline, VehiclesShareRoadsAcrossComparisons) {
  const auto p = small_plan();
  const auto a = crossing_draw(p, fixtures::sv(1), Condition::healthy, 4);
  const auto b = crossing_draw(p, fixtures::sv(2), Condition::healthy, 4);
  EXPECT_EQ(a.road_seed, b.road_seed);
  EXPECT_NE(a.road_seed, crossing_draw(p, fixtures::sv(1), Condition::healthy, 5).road_seed);
  EXPECT_NE(a.road_seed, crossing_draw(p, fixtures::sv(1), Condition::damaged, 4).road_seed);
  EXPECT_GE(a.speed, kMinimumSpeed);
}

TEST(Pipeline, CrossingMetadataIsReproducible) {
  const auto p = small_plan();
  const auto system = AssembledSystem::assemble(p.healthy_bridge);
  const auto rec = simulate_plan_crossing(p, system, fixtures::sv(4), Condition::healthy, 2);
  const auto draw = crossing_draw(p, fixtures::sv(4), Condition::healthy, 2);
  EXPECT_EQ(rec.metadata.at("road_seed").get<std::uint64_t>(), draw.road_seed);
  EXPECT_DOUBLE_EQ(rec.speed, draw.speed);
  EXPECT_EQ(rec.metadata.at("index"), 2);
  const auto again = simulate_plan_crossing(p, system, fixtures::sv(4), Condition::healthy, 2);
  EXPECT_EQ(again.axle(Axle::front).z_ddot, rec.axle(Axle::front).z_ddot);
}

TEST(Pipeline, ArchitectureFollowsBand) {
  Band band{3.0, 5.0, 48};
  const auto arch = architecture_for(band);
  EXPECT_NO_THROW(arch.validate());
  EXPECT_EQ(arch.encoder.front(), 48);
  EXPECT_EQ(arch.decoder.back(), 48);
}

TEST(Pipeline, AssessmentIsDeterministicAndThreadIndependent) {
  auto p = small_plan();
  const auto v = fixtures::sv(2);
  const auto a = run_vehicle_assessment(p, v, 1);
  const auto b = run_vehicle_assessment(p, v, 2);
  expect_same_row(a.row, b.row);
  EXPECT_EQ(a.row.healthy_di.size(), 4u);
  EXPECT_EQ(a.row.damaged_di.size(), 4u);
  EXPECT_EQ(a.train_di.size(), 12u);
  EXPECT_EQ(a.healthy_mean_spectrum.size(), 32u);
  EXPECT_DOUBLE_EQ(a.row.mass_ratio, mass_ratio(v, p.healthy_bridge));
  EXPECT_GE(a.row.accuracy, 0.0);
  EXPECT_LE(a.row.accuracy, 1.0);
  EXPECT_GE(a.row.wasserstein, 0.0);
  EXPECT_EQ(a.manifest.at("crossings").size(), 35u);
  EXPECT_FALSE(a.cache_hit);
}

TEST(Pipeline, CacheHitReturnsIdenticalRecord) {
  auto p = small_plan();
  p.output_dir = fresh_dir("cache");
  const auto v = fixtures::sv(5);
  const auto first = run_vehicle_assessment(p, v);
  EXPECT_FALSE(first.cache_hit);
  const auto cache = p.output_dir / "cache" / ("SV5-" + first.config_hash + ".json");
  ASSERT_TRUE(fs::exists(cache));
  EXPECT_TRUE(fs::exists(p.output_dir / "models" / ("SV5-" + first.config_hash + ".aae")));

  const auto second = run_vehicle_assessment(p, v);
  EXPECT_TRUE(second.cache_hit);
  expect_same_row(first.row, second.row);
  EXPECT_EQ(first.train_di, second.train_di);
  EXPECT_DOUBLE_EQ(first.elapsed_seconds, second.elapsed_seconds);

  // A corrupt entry is recomputed, not trusted.
  { std::ofstream(cache) << "{ not json"; }
  const auto third = run_vehicle_assessment(p, v);
  EXPECT_FALSE(third.cache_hit);
  expect_same_row(first.row, third.row);
}

TEST(Pipeline, AssessmentJsonRoundTrip) {
  const auto a = run_vehicle_assessment(small_plan(), fixtures::sv(1), 1);
  const auto b = assessment_from_json(to_json(a));
  expect_same_row(a.row, b.row);
  EXPECT_EQ(a.config_hash, b.config_hash);
  EXPECT_EQ(a.healthy_mean_spectrum, b.healthy_mean_spectrum);
  EXPECT_THROW(assessment_from_json({{"row", 3}}), InvalidInput);
}

TEST(Pipeline, NumericalFailureNamesTheVehicle) {
  auto p = small_plan();
  p.coupling = CouplingMode::iterative;
  p.max_coupling_iterations = 1;
  try {
    run_vehicle_assessment(p, fixtures::sv(3), 1);
    FAIL() << "expected a coupling failure";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("SV3"), std::string::npos) << e.what();
  }
}

TEST(Pipeline, SweepRowsMatchAssessmentsAndResume) {
  auto p = small_plan();
  p.output_dir = fresh_dir("sweep");
  const auto vehicles = sweep_vehicles(p);
  ASSERT_EQ(vehicles.size(), 2u);
  EXPECT_EQ(vehicles[0].name, "LHS-0000");

  int calls = 0;
  const auto rows = run_sweep(p, [&](const SweepRecord&, bool) { ++calls; });
  EXPECT_EQ(calls, 2);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.ok()) << r.error;
    EXPECT_GE(r.point.mass, p.space.mass.lower);
    EXPECT_LE(r.point.mass, p.space.mass.upper);
  }
  const auto single = run_vehicle_assessment(p, vehicles[1]);
  EXPECT_TRUE(single.cache_hit);
  EXPECT_DOUBLE_EQ(single.row.wasserstein, rows[1].wasserstein);
  EXPECT_EQ(single.config_hash, rows[1].config_hash);

  const auto csv_path = p.output_dir / "sweep.csv";
  const auto original = slurp(csv_path);
  fs::remove(csv_path);
  fs::remove(p.output_dir / "cache" / ("LHS-0000-" + rows[0].config_hash + ".json"));
  std::vector<bool> hits;
  run_sweep(p, [&](const SweepRecord&, bool hit) { hits.push_back(hit); });
  EXPECT_EQ(slurp(csv_path), original);
  EXPECT_EQ(std::count(hits.begin(), hits.end(), true), 1);

  const auto parsed = read_sweep_csv(csv_path);
  ASSERT_EQ(parsed.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(parsed[i].index, rows[i].index);
    EXPECT_DOUBLE_EQ(parsed[i].point.mass, rows[i].point.mass);
    EXPECT_DOUBLE_EQ(parsed[i].point.frequency_ratio, rows[i].point.frequency_ratio);
    EXPECT_DOUBLE_EQ(parsed[i].wasserstein, rows[i].wasserstein);
    EXPECT_EQ(parsed[i].config_hash, rows[i].config_hash);
  }
}

TEST(Pipeline, SweepKeepsFailedRows) {
  auto p = small_plan();
  p.coupling = CouplingMode::iterative;
  p.max_coupling_iterations = 1;
  p.output_dir = fresh_dir("failing-sweep");
  const auto rows = run_sweep(p);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) EXPECT_FALSE(r.ok());
  const auto parsed = read_sweep_csv(p.output_dir / "sweep.csv");
  ASSERT_EQ(parsed.size(), 2u);
  EXPECT_FALSE(parsed[0].ok());
  EXPECT_NE(parsed[0].error.find("LHS-0000"), std::string::npos) << parsed[0].error;
}

TEST(Pipeline, SweepCsvParserNeedsCoreColumns) {
  const auto rows = parse_sweep_csv("mass,stiffness,wd\n100,2e5,0.5\n200,3e5,0.25\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_DOUBLE_EQ(rows[1].point.stiffness, 3e5);
  EXPECT_DOUBLE_EQ(rows[1].wasserstein, 0.25);
  EXPECT_TRUE(rows[0].ok());
  EXPECT_THROW(parse_sweep_csv("mass,wd\n1,2\n"), InvalidInput);
  EXPECT_THROW(parse_sweep_csv("mass,stiffness,wd\n1,2\n"), InvalidInput);
  EXPECT_THROW(parse_sweep_csv("mass,stiffness,wd\n1,x,2\n"), InvalidInput);
}

namespace {

// Synthetic response with a single interior peak.
std::vector<SweepRecord> synthetic_rows(const ExperimentPlan& p, int n) {
  const auto points = lhs_sample(p.space, n, 17);
  std::vector<SweepRecord> rows;
  for (int i = 0; i < n; ++i) {
    SweepRecord r;
    r.index = i;
    r.point = points[static_cast<std::size_t>(i)];
    const double a = (r.point.mass - 8000.0) / 4000.0;
    const double b = (r.point.stiffness - 2.5e6) / 1.5e6;
    r.wasserstein = std::exp(-a * a - b * b);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

TEST(Pipeline, OptimizeFindsSyntheticPeak) {
  const auto p = small_plan();
  auto rows = synthetic_rows(p, 40);
  rows[3].error = "failed";  // ignored by the fit
  const auto r = optimize(rows, p, {SurrogateSpace::dimensional, 11, 0.2});
  EXPECT_EQ(r.training_rows, 39u);
  EXPECT_NEAR(r.optimum.mass, 8000.0, 600.0);
  EXPECT_NEAR(r.optimum.stiffness, 2.5e6, 2.5e5);
  EXPECT_NEAR(r.optimum_value, 1.0, 0.05);
  EXPECT_GT(r.holdout_r2, 0.9);
  EXPECT_EQ(r.grid.size(), 121u);
  EXPECT_TRUE(std::isfinite(r.optimum.frequency_ratio));

  const auto dir = fresh_dir("optimize");
  r.write(dir);
  for (const char* f : {"kriging.json", "surrogate_grid.csv", "optimum.json"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  const auto back = KrigingModel::from_json(read_json(dir / "kriging.json"));
  const Eigen::Vector2d q(6000.0, 1.5e6);
  EXPECT_DOUBLE_EQ(back(q), r.model(q));
}

TEST(Pipeline, OptimizeNondimensionalStaysInMappedBounds) {
  const auto p = small_plan();
  const auto r = optimize(synthetic_rows(p, 40), p, {SurrogateSpace::nondimensional, 9, 0.0});
  EXPECT_TRUE(std::isnan(r.holdout_r2));
  EXPECT_GE(r.optimum.mass_ratio, r.model.lower()(0) - 1e-12);
  EXPECT_LE(r.optimum.mass_ratio, r.model.upper()(0) + 1e-12);
  EXPECT_GE(r.optimum.frequency_ratio, r.model.lower()(1) - 1e-12);
  EXPECT_LE(r.optimum.frequency_ratio, r.model.upper()(1) + 1e-12);
  // The inverse map must reproduce the reported coordinates.
  const auto f_b1 = natural_frequencies(AssembledSystem::assemble(p.healthy_bridge), 1).front();
  const auto nd = nondimensional_map(r.optimum, p.healthy_bridge, f_b1);
  EXPECT_NEAR(nd.mass_ratio, r.optimum.mass_ratio, 1e-9 * r.optimum.mass_ratio);
  EXPECT_NEAR(nd.frequency_ratio, r.optimum.frequency_ratio, 1e-6);
  EXPECT_EQ(r.grid.size(), 81u);
}

TEST(Pipeline, OptimizeRejectsTooFewRows) {
  const auto p = small_plan();
  EXPECT_THROW(optimize(synthetic_rows(p, 9), p), InvalidInput);
  EXPECT_THROW(optimize(synthetic_rows(p, 20), p, {SurrogateSpace::dimensional, 1, 0.2}),
               InvalidInput);
}

TEST(Pipeline, TransferVehicleKeepsRatios) {
  const auto ref = fixtures::reference_bridge();
  const auto target = fixtures::transfer_bridge();
  const auto f_ref = natural_frequencies(AssembledSystem::assemble(ref), 1).front();
  const auto f_t = natural_frequencies(AssembledSystem::assemble(target), 1).front();
  for (int i : {1, 3}) {
    const auto src = fixtures::sv(i);
    const auto v = transfer_vehicle(src, ref, target, "T");
    EXPECT_EQ(v.name, "T");
    EXPECT_NEAR(mass_ratio(v, target), mass_ratio(src, ref), 1e-9);
    EXPECT_NEAR(frequency_ratio(v, f_t), frequency_ratio(src, f_ref), 1e-6);
  }
}
