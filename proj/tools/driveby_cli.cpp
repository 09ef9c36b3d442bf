#include <algorithm>
#include <cstdio>
#include <limits>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "driveby/aae.hpp"
#include "driveby/columnar.hpp"
#include "driveby/config.hpp"
#include "driveby/error.hpp"
#include "driveby/evaluation.hpp"
#include "driveby/fixtures.hpp"
#include "driveby/kriging.hpp"
#include "driveby/nondimensional.hpp"
#include "driveby/pipeline.hpp"
#include "driveby/random.hpp"

namespace fs = std::filesystem;
using namespace driveby;

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

fs::path output_root() {
  if (const char* env = std::getenv("DRIVEBY_OUTPUT_ROOT"); env && *env) return env;
  return "driveby-out";
}

// Relative output paths live under the output root.
fs::path resolve_output(const std::string& path) {
  const fs::path p(path);
  return p.is_absolute() ? p : output_root() / p;
}

BeamBridge load_bridge(const std::string& source) {
  if (fs::exists(source)) return bridge_from_json(read_json(source));
  return fixtures::bridge_by_name(source);
}

HalfCarVehicle load_vehicle(const std::string& source) {
  if (fs::exists(source)) return vehicle_from_json(read_json(source));
  return fixtures::vehicle_by_name(source);
}

struct PlanOptions {
  std::string plan;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out;

  void add(CLI::App* app, bool with_out = true) {
    app->add_option("--plan", plan, "Experiment plan JSON (default: desk preset)");
    app->add_option("--seed", seed, "Override the master seed");
    app->add_option("--threads", threads, "Worker threads (0: all cores)");
    if (with_out) app->add_option("--out", out, "Output directory (relative to the output root)");
  }

  ExperimentPlan load() const {
    ExperimentPlan p = plan.empty() ? ExperimentPlan::desk() : ExperimentPlan::load(plan);
    if (seed) p.master_seed = *seed;
    if (threads) p.threads = *threads;
    if (!out.empty()) p.output_dir = resolve_output(out);
    if (p.output_dir.empty())
      p.output_dir = output_root() / ("plan-" + config_hash(p.to_json()));
    else if (p.output_dir.is_relative())
      p.output_dir = output_root() / p.output_dir;
    p.validate();
    return p;
  }
};

Condition parse_condition(const std::string& s) {
  if (s == "healthy" || s == "hn") return Condition::healthy;
  if (s == "damaged" || s == "dm") return Condition::damaged;
  throw InvalidInput("condition must be 'healthy' or 'damaged', got '" + s + "'");
}

const char* condition_name(Condition c) { return c == Condition::healthy ? "healthy" : "damaged"; }

void log(const std::string& line) { std::cerr << line << '\n'; }

std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs, const std::string& ext) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(in))
        if (e.path().extension() == ext) found.push_back(e.path());
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.emplace_back(in);
    }
  }
  if (files.empty()) throw InvalidInput("no " + ext + " inputs found");
  return files;
}

Eigen::MatrixXd rows_to_matrix(const std::vector<std::vector<double>>& rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

std::vector<std::vector<double>> matrix_to_rows(const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto& row = rows[static_cast<std::size_t>(i)];
    row.resize(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
  }
  return rows;
}

std::string histogram_csv(const std::vector<double>& healthy, const std::vector<double>& damaged,
                          int bins) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto* v : {&healthy, &damaged})
    for (double x : *v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  if (!(hi > lo)) hi = lo + 1.0;
  std::vector<int> h(static_cast<std::size_t>(bins)), d(static_cast<std::size_t>(bins));
  auto bin = [&](double x) {
    const int b = static_cast<int>((x - lo) / (hi - lo) * bins);
    return static_cast<std::size_t>(std::clamp(b, 0, bins - 1));
  };
  for (double x : healthy) ++h[bin(x)];
  for (double x : damaged) ++d[bin(x)];
  std::ostringstream out;
  out << "bin_lower,bin_upper,healthy,damaged\n";
  for (int b = 0; b < bins; ++b)
    out << lo + (hi - lo) * b / bins << ',' << lo + (hi - lo) * (b + 1) / bins << ','
        << h[static_cast<std::size_t>(b)] << ',' << d[static_cast<std::size_t>(b)] << '\n';
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Drive-by bridge inspection: simulation, damage assessment and vehicle design"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Simulate plan crossings and store their records");
  PlanOptions sim_plan;
  sim_plan.add(simulate);
  std::string sim_vehicle = "SV1", sim_bridge, sim_condition = "healthy", sim_channels = "axle";
  int sim_first = 0, sim_count = 1;
  simulate->add_option("--vehicle", sim_vehicle, "Fixture name or vehicle JSON");
  simulate->add_option("--bridge", sim_bridge, "Override the plan bridge (fixture name or JSON)");
  simulate->add_option("--condition", sim_condition, "healthy or damaged");
  simulate->add_option("--first", sim_first, "Index of the first crossing");
  simulate->add_option("--count", sim_count, "Number of crossings")->check(CLI::PositiveNumber);
  simulate->add_option("--channels", sim_channels, "axle or full")
      ->check(CLI::IsMember({"axle", "full"}));

  // preprocess
  auto* preprocess = app.add_subcommand("preprocess", "Residual CP spectra of stored crossings");
  std::vector<std::string> pre_inputs;
  std::string pre_band = "3:5", pre_vehicle, pre_out = "features.mat", pre_mass = "rigid_body";
  std::size_t pre_bins = 256;
  preprocess->add_option("inputs", pre_inputs, "Crossing files or directories")->required();
  preprocess->add_option("--band", pre_band, "Band LOW:HIGH in Hz");
  preprocess->add_option("--bins", pre_bins, "Band grid size");
  preprocess->add_option("--vehicle", pre_vehicle, "Vehicle (default: from each record)");
  preprocess->add_option("--mass-model", pre_mass, "static_split or rigid_body")
      ->check(CLI::IsMember({"static_split", "rigid_body"}));
  preprocess->add_option("--out", pre_out, "Feature matrix file");

  // train
  auto* train = app.add_subcommand("train", "Build a dataset from feature matrices and train the AAE");
  PlanOptions train_plan;
  train_plan.add(train, false);
  std::string train_hn, train_dm, train_out = "model";
  std::optional<int> train_epochs;
  std::optional<std::size_t> train_k;
  train->add_option("--healthy", train_hn, "Healthy feature matrix")->required();
  train->add_option("--damaged", train_dm, "Damaged feature matrix")->required();
  train->add_option("--epochs", train_epochs, "Override plan epochs");
  train->add_option("-k", train_k, "Crossings averaged per sample");
  train->add_option("--out", train_out, "Output directory");

  // score
  auto* score = app.add_subcommand("score", "Damage indices and verdicts of a sample matrix");
  std::string score_model, score_data, score_out = "scores.json";
  std::optional<double> score_threshold;
  score->add_option("--model", score_model, "Trained model file")->required();
  score->add_option("--data", score_data, "Sample matrix (labels read from its sidecar)")->required();
  score->add_option("--threshold", score_threshold, "Override the model threshold");
  score->add_option("--out", score_out, "Output JSON");

  // assess
  auto* assess = app.add_subcommand("assess", "Full damage assessment of named vehicles");
  PlanOptions assess_plan;
  assess_plan.add(assess);
  std::vector<std::string> assess_vehicles;
  assess->add_option("--vehicle", assess_vehicles, "Vehicles (default: plan list)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Latin hypercube sweep of the design space");
  PlanOptions sweep_plan;
  sweep_plan.add(sweep);
  std::optional<int> sweep_count;
  sweep->add_option("--count", sweep_count, "Override the number of sampled vehicles");

  // optimize
  auto* optimize_cmd = app.add_subcommand("optimize", "Fit the surrogate and maximize it with PSO");
  PlanOptions opt_plan;
  opt_plan.add(optimize_cmd, false);
  std::string opt_sweep, opt_space = "dimensional", opt_out = "optimize";
  int opt_grid = 41;
  optimize_cmd->add_option("--sweep", opt_sweep, "Sweep results CSV")->required();
  optimize_cmd->add_option("--space", opt_space, "dimensional or nondimensional")
      ->check(CLI::IsMember({"dimensional", "nondimensional"}));
  optimize_cmd->add_option("--grid", opt_grid, "Grid steps per axis");
  optimize_cmd->add_option("--out", opt_out, "Output directory");

  // validate
  auto* validate = app.add_subcommand("validate", "Quarter-span and transfer-bridge scenarios");
  PlanOptions val_plan;
  val_plan.add(validate);

  // report
  auto* report = app.add_subcommand("report", "Tabulate stored assessment records");
  std::vector<std::string> report_inputs;
  std::string report_out = "report";
  report->add_option("inputs", report_inputs, "Assessment JSON files or cache directories")->required();
  report->add_option("--out", report_out, "Output prefix (writes .csv and .json)");

  // plot-data
  auto* plot = app.add_subcommand("plot-data", "Isocurve grids and DI histograms for plotting");
  std::string plot_kriging, plot_assessment, plot_out = "plot", plot_bridge = "reference";
  int plot_grid = 61, plot_bins = 20;
  plot->add_option("--kriging", plot_kriging, "Fitted surrogate JSON (dimensional)");
  plot->add_option("--assessment", plot_assessment, "Assessment JSON");
  plot->add_option("--bridge", plot_bridge, "Bridge for the (mu, beta) view");
  plot->add_option("--grid", plot_grid, "Grid steps per axis");
  plot->add_option("--bins", plot_bins, "Histogram bins");
  plot->add_option("--out", plot_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*simulate) {
      const auto plan = sim_plan.load();
      const auto vehicle = load_vehicle(sim_vehicle);
      const auto condition = parse_condition(sim_condition);
      const auto bridge = !sim_bridge.empty() ? load_bridge(sim_bridge)
                          : condition == Condition::healthy ? plan.healthy_bridge
                                                            : plan.damaged_bridge;
      const auto system = AssembledSystem::assemble(bridge);
      const auto channels = sim_channels == "full" ? ChannelSet::full : ChannelSet::axle;
      const fs::path dir = plan.output_dir / "crossings";
      parallel_for(static_cast<std::size_t>(sim_count), plan.effective_threads(), [&](std::size_t n) {
        const int index = sim_first + static_cast<int>(n);
        const auto record = simulate_plan_crossing(plan, system, vehicle, condition, index,
                                                   channels == ChannelSet::full);
        char name[64];
        std::snprintf(name, sizeof name, "%s-%s-%05d.col", vehicle.name.c_str(),
                      condition_name(condition), index);
        write_columns(dir / name, crossing_table(record, channels));
      });
      log("wrote " + std::to_string(sim_count) + " crossings to " + dir.string());
      return 0;
    }

    if (*preprocess) {
      Band band = parse_band(pre_band);
      band.bins = pre_bins;
      const auto model = pre_mass == "rigid_body" ? AxleMassModel::rigid_body : AxleMassModel::static_split;
      std::optional<HalfCarVehicle> vehicle;
      if (!pre_vehicle.empty()) vehicle = load_vehicle(pre_vehicle);
      std::vector<std::vector<double>> rows;
      nlohmann::json sources = nlohmann::json::array();
      for (const auto& file : expand_inputs(pre_inputs, ".col")) {
        const auto record = crossing_from_table(read_columns(file));
        const auto v = vehicle ? *vehicle : vehicle_from_json(record.metadata.at("vehicle"));
        rows.push_back(crossing_features(record, v, band, {}, model));
        sources.push_back(file.string());
      }
      const auto out = resolve_output(pre_out);
      write_matrix(out, rows_to_matrix(rows),
                   {{"band", to_json(band)}, {"mass_model", pre_mass}, {"sources", sources}});
      log("wrote " + std::to_string(rows.size()) + " feature rows to " + out.string());
      return 0;
    }

    if (*train) {
      auto plan = train_plan.load();
      if (train_epochs) plan.training.epochs = *train_epochs;
      nlohmann::json hn_meta;
      const auto hn = matrix_to_rows(read_matrix(train_hn, &hn_meta));
      const auto dm = matrix_to_rows(read_matrix(train_dm));
      Band band = plan.band;
      if (hn_meta.contains("band")) band = band_from_json(hn_meta.at("band"));
      const auto ds = build_dataset(hn, dm, train_k.value_or(plan.k), plan.counts,
                                    derive_seed(plan.master_seed, "dataset"), band);
      TrainingConfig cfg = plan.training;
      cfg.seed = derive_seed(plan.master_seed, "aae", {plan.training.seed});
      TrainingHistory history;
      const auto train_rows = sample_matrix(ds.train);
      auto model = train_aae(train_rows, cfg, architecture_for(band), &history);
      const auto train_di = damage_indices(model, train_rows);
      model.metadata() = {{"threshold", fit_threshold(train_di)},
                          {"normalization", {{"min", ds.reference.min}, {"max", ds.reference.max}}},
                          {"band", to_json(band)}};
      const auto dir = resolve_output(train_out);
      model.save(dir / "model.aae");
      std::vector<int> labels;
      for (const auto& s : ds.test) labels.push_back(s.label == Condition::healthy ? 0 : 1);
      write_matrix(dir / "train.mat", train_rows, {{"band", to_json(band)}});
      write_matrix(dir / "test.mat", sample_matrix(ds.test),
                   {{"band", to_json(band)}, {"labels", labels}});
      std::ostringstream h;
      h << "epoch,reconstruction,adversarial,discriminator\n";
      for (std::size_t e = 0; e < history.reconstruction.size(); ++e)
        h << e << ',' << history.reconstruction[e] << ',' << history.adversarial[e] << ','
          << history.discriminator[e] << '\n';
      write_text(dir / "history.csv", h.str());
      log("model and datasets written to " + dir.string());
      return 0;
    }

    if (*score) {
      const auto model = AAEModel::load(score_model);
      nlohmann::json meta;
      const auto rows = read_matrix(score_data, &meta);
      const auto di = damage_indices(model, rows);
      const double threshold = score_threshold.value_or(model.metadata().value("threshold", 0.0));
      nlohmann::json out = {{"damage_index", di}, {"threshold", threshold}};
      if (meta.contains("labels")) {
        const auto labels = meta.at("labels").get<std::vector<int>>();
        if (labels.size() != di.size()) throw InvalidInput("label count does not match the rows");
        std::vector<double> hn, dm;
        for (std::size_t i = 0; i < di.size(); ++i) (labels[i] == 0 ? hn : dm).push_back(di[i]);
        out["summary"] = to_json(summarize("scored", classify(hn, dm, threshold)));
      }
      write_json(resolve_output(score_out), out);
      return 0;
    }

    if (*assess) {
      auto plan = assess_plan.load();
      if (!assess_vehicles.empty()) {
        plan.vehicles.clear();
        for (const auto& v : assess_vehicles) plan.vehicles.push_back(load_vehicle(v));
      }
      std::vector<AssessmentRow> rows;
      for (const auto& v : plan.vehicles) {
        const auto a = run_vehicle_assessment(plan, v);
        log(v.name + (a.cache_hit ? " (cached)" : "") + ": accuracy " +
            std::to_string(a.row.accuracy) + ", W_d " + std::to_string(a.row.wasserstein));
        write_json(plan.output_dir / "assessments" / (v.name + ".json"), to_json(a));
        rows.push_back(a.row);
      }
      assessment_report(rows).write(plan.output_dir / "assessment.csv",
                                    plan.output_dir / "assessment.json");
      write_json(plan.output_dir / "plan.json", plan.to_json());
      std::cout << assessment_report(rows).csv();
      return 0;
    }

    if (*sweep) {
      auto plan = sweep_plan.load();
      if (sweep_count) plan.sweep_count = *sweep_count;
      plan.validate();
      write_json(plan.output_dir / "plan.json", plan.to_json());
      const auto rows = run_sweep(plan, [](const SweepRecord& r, bool hit) {
        log("vehicle " + std::to_string(r.index) + (hit ? " (cached)" : "") +
            (r.ok() ? ": W_d " + std::to_string(r.wasserstein) : ": failed: " + r.error));
      });
      std::size_t failed = 0;
      for (const auto& r : rows) failed += r.ok() ? 0 : 1;
      log("sweep written to " + (plan.output_dir / "sweep.csv").string() + ", " +
          std::to_string(failed) + " failed rows");
      return 0;
    }

    if (*optimize_cmd) {
      const auto plan = opt_plan.load();
      OptimizationOptions options;
      options.space = opt_space == "nondimensional" ? SurrogateSpace::nondimensional
                                                    : SurrogateSpace::dimensional;
      options.grid_steps = opt_grid;
      const auto result = optimize(read_sweep_csv(opt_sweep), plan, options);
      const auto dir = resolve_output(opt_out);
      result.write(dir);
      std::cout << result.optimum_json().dump(2) << '\n';
      return 0;
    }

    if (*validate) {
      const auto plan = val_plan.load();
      const auto r = validate_scenarios(plan);
      std::cout << r.json().dump(2) << '\n';
      log("scenario tables written to " + (plan.output_dir / "validate").string());
      return 0;
    }

    if (*report) {
      std::vector<AssessmentRow> rows;
      for (const auto& file : expand_inputs(report_inputs, ".json")) {
        const auto j = read_json(file);
        rows.push_back(j.contains("row") ? assessment_from_json(j).row : row_from_json(j));
      }
      const auto prefix = resolve_output(report_out);
      const auto r = assessment_report(rows);
      r.write(prefix.string() + ".csv", prefix.string() + ".json");
      std::cout << r.csv();
      return 0;
    }

    if (*plot) {
      if (plot_kriging.empty() && plot_assessment.empty())
        throw InvalidInput("plot-data needs --kriging and/or --assessment");
      const auto dir = resolve_output(plot_out);
      if (!plot_kriging.empty()) {
        const auto model = KrigingModel::from_json(read_json(plot_kriging));
        if (model.dimension() != 2) throw InvalidInput("surrogate must be two-dimensional");
        DesignSpace space;
        space.mass = {model.lower()(0), model.upper()(0)};
        space.stiffness = {model.lower()(1), model.upper()(1)};
        const auto bridge = load_bridge(plot_bridge);
        const double f_b1 = natural_frequencies(AssembledSystem::assemble(bridge), 1).front();
        std::vector<double> values;
        const auto grid = surrogate_grid(model, space, plot_grid, plot_grid, bridge, f_b1, values);
        std::ostringstream out;
        out << "mass,stiffness,mu,beta,wd_predicted\n";
        out.precision(17);
        for (std::size_t i = 0; i < grid.size(); ++i)
          out << grid[i].mass << ',' << grid[i].stiffness << ',' << grid[i].mass_ratio << ','
              << grid[i].frequency_ratio << ',' << values[i] << '\n';
        write_text(dir / "isocurve_grid.csv", out.str());
      }
      if (!plot_assessment.empty()) {
        const auto j = read_json(plot_assessment);
        const auto row = j.contains("row") ? assessment_from_json(j).row : row_from_json(j);
        write_text(dir / (row.vehicle + "_di_histogram.csv"),
                   histogram_csv(row.healthy_di, row.damaged_di, plot_bins));
      }
      log("plot data written to " + dir.string());
      return 0;
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return 0;
}
