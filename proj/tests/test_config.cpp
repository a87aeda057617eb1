#include <gtest/gtest.h>

#include <algorithm>
#include <string>

#include "fixtures.hpp"
#include "radlab/config.hpp"

using namespace radlab;

namespace {

const char* kValid = R"(# comment
seed = 7

[problem]
p = 2
alpha = 0
n = 3
f1 = "1"
f2 = "1"
g1 = "t"
g2 = "1"
h = "t^6"
omega = "ball"

[solver]
u0 = 2
v0 = 0.5
target_radius = 20
)";

std::vector<std::string> errors_of(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const ConfigError& e) {
    return e.errors();
  }
  return {};
}

bool has(const std::vector<std::string>& errs, const std::string& needle) {
  return std::any_of(errs.begin(), errs.end(), [&](const auto& e) { return e.find(needle) != std::string::npos; });
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  text.replace(text.find(from), from.size(), to);
  return text;
}

}  // namespace

TEST(Config, ParsesValidFile) {
  const auto cfg = parse_config(kValid);
  EXPECT_EQ(cfg.p, 2.0);
  EXPECT_EQ(cfg.h, "t^6");
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.u0, 2.0);
  EXPECT_EQ(cfg.v0, 0.5);
  EXPECT_EQ(cfg.solver.target_radius, 20.0);
  EXPECT_EQ(cfg.solver.blowup_threshold, 1e8);
  const auto run = instantiate(cfg);
  EXPECT_EQ(run.spec, fixtures::spec_b());
  EXPECT_EQ(run.omega, Domain::Ball);
}

TEST(Config, ShippedConfigsLoad) {
  for (const char* name : {"spec_a.conf", "spec_b.conf", "spec_c.conf", "q_sweep.conf", "power_grid.conf"}) {
    EXPECT_NO_THROW((void)load_config(fixtures::config_path(name))) << name;
  }
  EXPECT_EQ(load_config(fixtures::config_path("spec_a.conf")).omega, Domain::WholeSpace);
}

TEST(Config, RejectsPBelowOne) {
  const auto errs = errors_of(replace(kValid, "p = 2", "p = 0.5"));
  EXPECT_TRUE(has(errs, "p must exceed 1"));
}

TEST(Config, ReportsMissingKey) {
  const auto errs = errors_of(replace(kValid, "h = \"t^6\"\n", ""));
  EXPECT_TRUE(has(errs, "missing key h in [problem]"));
}

TEST(Config, UnknownKeyCarriesLineNumber) {
  const auto errs = errors_of(replace(kValid, "n = 3", "n = 3\nfoo = 1"));
  ASSERT_EQ(errs.size(), 1u);
  EXPECT_TRUE(has(errs, "line 8"));
  EXPECT_TRUE(has(errs, "unknown key foo in [problem]"));
}

TEST(Config, ExpressionErrorsCarryColumn) {
  const auto errs = errors_of(replace(kValid, "h = \"t^6\"", "h = \"t^-6\""));
  ASSERT_EQ(errs.size(), 1u);
  EXPECT_TRUE(has(errs, "line 12, column 8"));
  EXPECT_TRUE(has(errs, "negative literal"));
}

TEST(Config, ListsEveryError) {
  std::string text = replace(kValid, "p = 2", "p = 0.5");
  text = replace(text, "alpha = 0", "alpha = -1");
  text = replace(text, "g1 = \"t\"", "g1 = t");
  text = replace(text, "u0 = 2", "u0 = 2\nbogus = 3");
  text = replace(text, "omega = \"ball\"", "omega = \"disc\"");
  const auto errs = errors_of(text);
  EXPECT_TRUE(has(errs, "p must exceed 1"));
  EXPECT_TRUE(has(errs, "alpha must be non-negative"));
  EXPECT_TRUE(has(errs, "g1 must be a quoted expression"));
  EXPECT_TRUE(has(errs, "unknown key bogus in [solver]"));
  EXPECT_TRUE(has(errs, "omega"));
  EXPECT_GE(errs.size(), 5u);
}

TEST(Config, SyntaxErrors) {
  EXPECT_TRUE(has(errors_of("[problem\n"), "line 1"));
  EXPECT_TRUE(has(errors_of("[nowhere]\n"), "unknown section [nowhere]"));
  EXPECT_TRUE(has(errors_of(replace(kValid, "n = 3", "n 3")), "expected `key = value`"));
  EXPECT_TRUE(has(errors_of(replace(kValid, "n = 3", "n = 3\nn = 4")), "duplicate key n"));
  EXPECT_TRUE(has(errors_of(replace(kValid, "h = \"t^6\"", "h = \"t^6")), "unterminated string"));
}

TEST(Config, GrowthAssumptionsChecked) {
  const auto errs = errors_of(replace(kValid, "g2 = \"1\"", "g2 = \"t^3\""));
  EXPECT_TRUE(has(errs, "k2 <= k1"));
}

TEST(Config, SweepAndPlaceholders) {
  std::string text = replace(kValid, "h = \"t^6\"", "h = \"t^{q}\"");
  text += "\n[sweep]\nq = [1, 2, 3]\nalpha = [0, 0.5]\n";
  const auto cfg = parse_config(text);
  const auto points = sweep_points(cfg);
  ASSERT_EQ(points.size(), 6u);
  EXPECT_EQ(points[0], (SweepPoint{{"q", 1.0}, {"alpha", 0.0}}));
  EXPECT_EQ(points[1], (SweepPoint{{"q", 1.0}, {"alpha", 0.5}}));
  const auto run = instantiate(cfg, points[5]);
  EXPECT_EQ(run.spec.h, FuncExpr::parse("t^3"));
  EXPECT_EQ(run.spec.alpha, 0.5);
}

TEST(Config, PlaceholderNeedsSweep) {
  const auto errs = errors_of(replace(kValid, "h = \"t^6\"", "h = \"t^{q}\""));
  EXPECT_TRUE(has(errs, "placeholder {q} has no [sweep] entry"));
}

TEST(Config, EmptySweepIsOnePoint) {
  const auto cfg = parse_config(kValid);
  const auto points = sweep_points(cfg);
  ASSERT_EQ(points.size(), 1u);
  EXPECT_TRUE(points[0].empty());
}

TEST(Config, MissingFileIsAnError) {
  EXPECT_THROW((void)load_config("/nonexistent/radlab.conf"), ConfigError);
}
