#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "driveby/columnar.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "driveby-cli-test";

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(const std::string& args) {
  const auto out = kRoot / "stdout.txt";
  const auto err = kRoot / "stderr.txt";
  const std::string cmd = std::string("\"") + DRIVEBY_CLI_PATH + "\" " + args + " >\"" +
                          out.string() + "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path write_plan(const std::string& name, nlohmann::json overrides) {
  nlohmann::json plan = {{"healthy_crossings", 25},
                         {"damaged_crossings", 10},
                         {"k", 3},
                         {"counts", {{"train", 12}, {"test_healthy", 4}, {"test_damaged", 4}}},
                         {"band", {{"lower", 3.0}, {"upper", 5.0}, {"bins", 32}}},
                         {"welch", {{"fft_length", 16384}}},
                         {"training", {{"epochs", 3}}},
                         {"time_step", 4e-3},
                         {"threads", 1}};
  plan.merge_patch(overrides);
  const auto path = kRoot / name;
  std::ofstream(path) << plan.dump(2);
  return path;
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    fs::remove_all(kRoot);
    fs::create_directories(kRoot);
    setenv("DRIVEBY_OUTPUT_ROOT", kRoot.c_str(), 1);
  }
};

}  // namespace

TEST_F(Cli, HelpListsSubcommands) {
  const auto r = run("--help");
  EXPECT_EQ(r.code, 0);
  for (const char* sub : {"simulate", "preprocess", "train", "score", "assess", "sweep", "optimize",
                          "validate", "report", "plot-data"})
    EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
}

TEST_F(Cli, UsageErrorsExitWithTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("simulate --count 0").code, 2);
  EXPECT_EQ(run("simulate --vehicle NOPE").code, 2);
  EXPECT_EQ(run("simulate --plan " + (kRoot / "missing.json").string()).code, 2);

  const auto bad = write_plan("bad-plan.json", {{"healthy_crosings", 3}});
  const auto r = run("simulate --plan " + bad.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("healthy_crosings"), std::string::npos) << r.err;
}

TEST_F(Cli, NumericalFailureExitsWithThree) {
  const auto plan =
      write_plan("iter-plan.json", {{"coupling", "iterative"}, {"max_coupling_iterations", 1}});
  const auto r = run("simulate --plan " + plan.string() + " --out iter");
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST_F(Cli, SimulateTrainScoreChain) {
  const auto plan = write_plan("plan.json", nlohmann::json::object());
  const std::string p = " --plan " + plan.string();
  ASSERT_EQ(run("simulate" + p + " --vehicle SV2 --count 25 --out hn").code, 0);
  ASSERT_EQ(run("simulate" + p + " --vehicle SV2 --condition damaged --count 10 --out dm").code, 0);
  EXPECT_TRUE(fs::exists(kRoot / "hn" / "crossings" / "SV2-healthy-00024.col"));
  EXPECT_TRUE(fs::exists(kRoot / "dm" / "crossings" / "SV2-damaged-00009.col.json"));

  ASSERT_EQ(run("preprocess " + (kRoot / "hn" / "crossings").string() + " --bins 32 --out hn.mat").code, 0);
  ASSERT_EQ(run("preprocess " + (kRoot / "dm" / "crossings").string() + " --bins 32 --out dm.mat").code, 0);
  const auto hn = driveby::read_matrix(kRoot / "hn.mat");
  EXPECT_EQ(hn.rows(), 25);
  EXPECT_EQ(hn.cols(), 32);

  const auto t = run("train" + p + " --healthy " + (kRoot / "hn.mat").string() + " --damaged " +
                     (kRoot / "dm.mat").string() + " --out model");
  ASSERT_EQ(t.code, 0) << t.err;
  for (const char* f : {"model.aae", "train.mat", "test.mat", "history.csv"})
    EXPECT_TRUE(fs::exists(kRoot / "model" / f)) << f;

  const auto s = run("score --model " + (kRoot / "model" / "model.aae").string() + " --data " +
                     (kRoot / "model" / "test.mat").string() + " --out scores.json");
  ASSERT_EQ(s.code, 0) << s.err;
  const auto scores = driveby::read_json(kRoot / "scores.json");
  EXPECT_EQ(scores.at("damage_index").size(), 8u);
  EXPECT_TRUE(scores.contains("summary"));
}

TEST_F(Cli, AssessReportAndPlotData) {
  const auto plan = write_plan("assess-plan.json", nlohmann::json::object());
  const auto a = run("assess --plan " + plan.string() + " --vehicle SV4 --out assess");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_NE(a.out.find("SV4"), std::string::npos);
  EXPECT_TRUE(fs::exists(kRoot / "assess" / "assessment.csv"));
  EXPECT_TRUE(fs::exists(kRoot / "assess" / "plan.json"));

  // The second run is served from the cache.
  const auto again = run("assess --plan " + plan.string() + " --vehicle SV4 --out assess");
  EXPECT_EQ(again.code, 0);
  EXPECT_NE(again.err.find("cached"), std::string::npos) << again.err;
  EXPECT_EQ(again.out, a.out);

  const auto r = run("report " + (kRoot / "assess" / "assessments").string() + " --out table");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(kRoot / "table.csv"));

  const auto h = run("plot-data --assessment " + (kRoot / "assess" / "assessments" / "SV4.json").string() +
                     " --bins 5 --out plots");
  EXPECT_EQ(h.code, 0) << h.err;
  EXPECT_TRUE(fs::exists(kRoot / "plots" / "SV4_di_histogram.csv"));
}

TEST_F(Cli, OptimizeFromSweepCsv) {
  std::ostringstream csv;
  csv << "mass,stiffness,wd\n";
  for (int i = 0; i < 16; ++i) {
    const double m = 500.0 + 1200.0 * i;
    const double k = 0.1e6 + 0.45e6 * ((i * 7) % 16);
    const double a = (m - 9000.0) / 6000.0, b = (k - 3e6) / 2e6;
    csv << m << ',' << k << ',' << std::exp(-a * a - b * b) << '\n';
  }
  std::ofstream(kRoot / "sweep.csv") << csv.str();
  const auto o = run("optimize --sweep " + (kRoot / "sweep.csv").string() + " --grid 5 --out opt");
  ASSERT_EQ(o.code, 0) << o.err;
  const auto optimum = driveby::read_json(kRoot / "opt" / "optimum.json");
  EXPECT_GT(optimum.at("wd_predicted").get<double>(), 0.5);
  EXPECT_TRUE(fs::exists(kRoot / "opt" / "surrogate_grid.csv"));

  const auto g = run("plot-data --kriging " + (kRoot / "opt" / "kriging.json").string() +
                     " --grid 4 --out plots");
  EXPECT_EQ(g.code, 0) << g.err;
  EXPECT_TRUE(fs::exists(kRoot / "plots" / "isocurve_grid.csv"));

  EXPECT_EQ(run("optimize --sweep " + (kRoot / "sweep.csv").string() + " --space sideways").code, 2);
}
