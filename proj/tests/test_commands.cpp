#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "radlab/commands.hpp"

using namespace radlab;
namespace fs = std::filesystem;

namespace {

Json run_json(int (*cmd)(const RunConfig&, std::ostream&), const RunConfig& cfg) {
  std::ostringstream out;
  EXPECT_EQ(cmd(cfg, out), 0);
  return Json::parse(out.str());
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::string column(const std::vector<std::vector<std::string>>& rows, std::size_t row, const std::string& name) {
  const auto& header = rows.front();
  const auto k = std::size_t(std::find(header.begin(), header.end(), name) - header.begin());
  return k < rows[row].size() ? rows[row][k] : "";
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("radlab_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Classify, SpecAOnWholeSpaceIsGlobal) {
  const auto j = run_json(cmd_classify, load_config(fixtures::config_path("spec_a.conf")));
  EXPECT_EQ(j["predicted_class"], "Global");
  EXPECT_EQ(j["criterion_unweighted"]["verdict"], "Infinite");
  EXPECT_EQ(j["valid"], true);
  EXPECT_DOUBLE_EQ(j["theta"].get<double>(), 1.0);
}

TEST(Classify, SpecBIsB2WithValue) {
  const auto j = run_json(cmd_classify, load_config(fixtures::config_path("spec_b.conf")));
  EXPECT_EQ(j["predicted_class"], "B2");
  EXPECT_EQ(j["criterion_unweighted"]["verdict"], "Finite");
  EXPECT_NEAR(j["criterion_unweighted"]["value"].get<double>(), 1.5119052598738478, 1e-8);
  EXPECT_EQ(j["criterion_weighted"]["verdict"], "Finite");
}

TEST(Classify, LargeGradientExponentHasNoSolution) {
  auto cfg = load_config(fixtures::config_path("spec_b.conf"));
  cfg.alpha = 1.5;
  const auto j = run_json(cmd_classify, cfg);
  EXPECT_EQ(j["predicted_class"], "NoSolution");
  EXPECT_TRUE(j["criterion_unweighted"].is_null());
  EXPECT_TRUE(j["theta"].is_null());
}

TEST(Classify, SweepConfigIsRejected) {
  std::ostringstream out;
  EXPECT_THROW(cmd_classify(load_config(fixtures::config_path("q_sweep.conf")), out), ConfigError);
}

TEST(Solve, WritesTrajectoryAndReport) {
  const auto dir = scratch_dir("solve");
  std::ostringstream out;
  ASSERT_EQ(cmd_solve(load_config(fixtures::config_path("spec_b.conf")), dir, out), 0);
  std::ifstream csv(dir / "trajectory.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "r,u,v,du,dv,res_eq1,res_eq2");
  std::ifstream report(dir / "report.json");
  const auto j = Json::parse(report);
  EXPECT_EQ(j, Json::parse(out.str()));
  EXPECT_EQ(j["termination"], "BlowUp");
  EXPECT_NEAR(j["R0"].get<double>(), 4.440015366337724, 1e-6);
  EXPECT_EQ(j["predicted_class"], "B2");
  EXPECT_EQ(j["numeric_class"], "B2");
  EXPECT_EQ(j["reconcile"]["agree"], true);
  EXPECT_EQ(j["envelope"]["pass"], true);
  EXPECT_LT(j["residuals"]["sup_eq1"].get<double>(), 1e-6);
  for (const auto& r : j["verify"]) EXPECT_EQ(r["pass"], true) << r["name"];
  fs::remove_all(dir);
}

TEST(Solve, TrajectoryRoundTripsThroughVerify) {
  const auto dir = scratch_dir("roundtrip");
  std::ostringstream out;
  const auto cfg = load_config(fixtures::config_path("spec_c.conf"));
  ASSERT_EQ(cmd_solve(cfg, dir, out), 0);
  std::ostringstream vout;
  EXPECT_EQ(cmd_verify(cfg, dir / "trajectory.csv", vout), 0) << vout.str();
  fs::remove_all(dir);
}

TEST(Sweep, QSweepAtlas) {
  std::ostringstream out;
  ASSERT_EQ(cmd_sweep(load_config(fixtures::config_path("q_sweep.conf")), true, out), 0);
  const auto rows = csv_rows(out.str());
  ASSERT_EQ(rows.size(), 9u);
  const char* expected[] = {"B1", "B3", "B3", "B3", "B2", "B2", "B2", "B2"};
  for (std::size_t i = 1; i <= 8; ++i) {
    EXPECT_EQ(column(rows, i, "q"), std::to_string(i));
    EXPECT_EQ(column(rows, i, "predicted_class"), expected[i - 1]) << i;
    EXPECT_EQ(column(rows, i, "numeric_class"), expected[i - 1]) << i;
    EXPECT_EQ(column(rows, i, "agreement"), "true") << i;
    EXPECT_EQ(column(rows, i, "error"), "");
  }
}

TEST(Sweep, NoSweepSectionGivesOneRow) {
  std::ostringstream out;
  ASSERT_EQ(cmd_sweep(load_config(fixtures::config_path("spec_b.conf")), false, out), 0);
  const auto rows = csv_rows(out.str());
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(column(rows, 1, "predicted_class"), "B2");
}

TEST(Sweep, AlphaCrossingTheGapGivesNoSolution) {
  auto cfg = load_config(fixtures::config_path("spec_b.conf"));
  cfg.sweep = {{"alpha", {0.0, 0.5, 1.0, 1.5}}};
  std::ostringstream out;
  ASSERT_EQ(cmd_sweep(cfg, true, out), 0);
  const auto rows = csv_rows(out.str());
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_NE(column(rows, 1, "predicted_class"), "NoSolution");
  EXPECT_EQ(column(rows, 3, "predicted_class"), "NoSolution");
  EXPECT_EQ(column(rows, 4, "predicted_class"), "NoSolution");
  EXPECT_EQ(column(rows, 4, "error"), "");
}

TEST(Sweep, OutputIsDeterministic) {
  const auto cfg = load_config(fixtures::config_path("power_grid.conf"));
  std::ostringstream a, b;
  ASSERT_EQ(cmd_sweep(cfg, false, a, std::nullopt, 4), 0);
  ASSERT_EQ(cmd_sweep(cfg, false, b, std::nullopt, 1), 0);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Verify, FreshSolvePasses) {
  std::ostringstream out;
  EXPECT_EQ(cmd_verify(load_config(fixtures::config_path("spec_b.conf")), std::nullopt, out), 0);
  EXPECT_EQ(Json::parse(out.str())["pass"], true);
}

TEST(Verify, CorruptedTrajectoryFails) {
  const auto dir = scratch_dir("corrupt");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "bad.csv");
    f << "r,u,v,du,dv\n0,1,1,0,0\n0.5,1.1,oops,0.1,0.1\n";
  }
  std::ostringstream out;
  EXPECT_EQ(cmd_verify(load_config(fixtures::config_path("spec_b.conf")), dir / "bad.csv", out), 1);
  const auto j = Json::parse(out.str());
  EXPECT_EQ(j["pass"], false);
  EXPECT_NE(j["error"].get<std::string>().find("line 3"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Verify, DecreasingTrajectoryFailsMonotone) {
  const auto dir = scratch_dir("decreasing");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "dec.csv");
    f << "r,u,v,du,dv\n";
    for (int i = 0; i <= 100; ++i) {
      const double r = 0.02 * i;
      f << r << ',' << 2.0 - r << ',' << 1.0 + r << ',' << -1.0 << ',' << 1.0 << '\n';
    }
  }
  std::ostringstream out;
  EXPECT_EQ(cmd_verify(load_config(fixtures::config_path("spec_b.conf")), dir / "dec.csv", out), 1);
  const auto j = Json::parse(out.str());
  EXPECT_EQ(j["reports"][0]["name"], "monotone");
  EXPECT_EQ(j["reports"][0]["pass"], false);
  fs::remove_all(dir);
}

TEST(SandwichSamples, SeededAndInRange) {
  const auto a = sandwich_samples(5), b = sandwich_samples(5), c = sandwich_samples(6);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  for (double s : a) {
    EXPECT_GE(s, 1e-3);
    EXPECT_LE(s, 1e3);
  }
}
