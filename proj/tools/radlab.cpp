// radlab: classify, solve, sweep and verify radial p-Laplacian systems.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "radlab/radlab.hpp"

namespace {

void print_errors(const std::vector<std::string>& errors) {
  radlab::Json j{{"valid", false}, {"errors", errors}};
  std::cout << j.dump(2) << '\n';
  for (const auto& e : errors) std::cerr << "radlab: " << e << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for positive radial solutions of p-Laplacian systems with gradient terms"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string trajectory;
  std::optional<std::uint64_t> seed;
  bool solve = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "seed for sampled checks (overrides the config)");
  };
  auto* classify = app.add_subcommand("classify", "evaluate the criteria and predict the boundary class");
  add_common(classify);
  auto* solve_cmd = app.add_subcommand("solve", "integrate one problem and write trajectory.csv and report.json");
  add_common(solve_cmd);
  solve_cmd->add_option("--out", out_dir, "output directory")->default_val("out");
  auto* sweep = app.add_subcommand("sweep", "criteria atlas over the [sweep] grid (CSV on stdout)");
  add_common(sweep);
  sweep->add_flag("--solve", solve, "also solve every row and reconcile");
  sweep->add_option("--out", out_dir, "also write atlas.csv into this directory");
  auto* verify = app.add_subcommand("verify", "run the inequality suite on a solve or a trajectory file");
  add_common(verify);
  verify->add_option("--trajectory", trajectory, "trajectory CSV to check instead of solving")
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    radlab::RunConfig cfg = radlab::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (classify->parsed()) return radlab::cmd_classify(cfg, std::cout);
    if (solve_cmd->parsed()) return radlab::cmd_solve(cfg, out_dir, std::cout);
    if (sweep->parsed()) {
      std::optional<std::filesystem::path> dir;
      if (!out_dir.empty()) dir = out_dir;
      return radlab::cmd_sweep(cfg, solve, std::cout, dir);
    }
    std::optional<std::filesystem::path> traj;
    if (!trajectory.empty()) traj = trajectory;
    return radlab::cmd_verify(cfg, traj, std::cout);
  } catch (const radlab::ConfigError& e) {
    print_errors(e.errors());
  } catch (const radlab::ValidationError& e) {
    print_errors(e.errors());
  } catch (const radlab::ParseError& e) {
    print_errors({e.what()});
  } catch (const std::exception& e) {
    std::cerr << "radlab: " << e.what() << '\n';
  }
  return 2;
}
