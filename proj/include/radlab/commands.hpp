#pragma once

// Subcommands behind the radlab executable. Each writes its report to the
// given stream and returns the process exit code.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "radlab/classifier.hpp"
#include "radlab/config.hpp"
#include "radlab/criteria.hpp"
#include "radlab/format.hpp"
#include "radlab/radial_solver.hpp"
#include "radlab/verify.hpp"

namespace radlab {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Serialisation

inline Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline Json to_json(const ProblemSpec& s, Domain omega) {
  return Json{{"p", s.p},
              {"alpha", s.alpha},
              {"n", s.n},
              {"f1", s.f1.to_string()},
              {"f2", s.f2.to_string()},
              {"g1", s.g1.to_string()},
              {"g2", s.g2.to_string()},
              {"h", s.h.to_string()},
              {"omega", to_string(omega)}};
}

inline Json to_json(const ConvergenceVerdict& v) {
  Json j{{"verdict", to_string(v.verdict)}};
  if (v.value) j["value"] = number_or_null(*v.value);
  if (v.divergence_exponent) j["slope"] = number_or_null(*v.divergence_exponent);
  j["outer_exponent"] = number_or_null(v.outer_exponent);
  j["method"] = to_string(v.method);
  return j;
}

inline Json to_json(const TrajectoryEvidence& e) {
  Json j{{"termination", to_string(e.terminated)},
         {"R0", e.R0 ? number_or_null(*e.R0) : Json(nullptr)},
         {"r_end", number_or_null(e.r_end)},
         {"u_end", number_or_null(e.u_end)},
         {"v_end", number_or_null(e.v_end)}};
  j["trend_slope"] = e.trend_slope ? number_or_null(*e.trend_slope) : Json(nullptr);
  return j;
}

inline Json to_json(const Classification& c) {
  Json j{{"class", to_string(c.cls)}, {"omega", to_string(c.omega)}, {"basis", to_string(c.basis)}};
  if (c.unweighted) j["criterion_unweighted"] = to_json(*c.unweighted);
  if (c.weighted) j["criterion_weighted"] = to_json(*c.weighted);
  if (c.evidence) j["evidence"] = to_json(*c.evidence);
  j["heuristic"] = c.heuristic;
  j["details"] = c.details;
  return j;
}

inline Json to_json(const AgreementReport& r) {
  Json j{{"agree", r.agree},
         {"predicted", to_string(r.predicted)},
         {"observed", to_string(r.observed)},
         {"rule", r.rule}};
  if (r.discrepancy) {
    const Discrepancy& d = *r.discrepancy;
    Json dj{{"reason", d.reason}};
    dj["criterion_unweighted"] = d.unweighted ? to_json(*d.unweighted) : Json(nullptr);
    dj["criterion_weighted"] = d.weighted ? to_json(*d.weighted) : Json(nullptr);
    dj["evidence"] = d.evidence ? to_json(*d.evidence) : Json(nullptr);
    j["discrepancy"] = dj;
  }
  return j;
}

inline Json to_json(const InequalityReport& r) {
  return Json{{"name", r.name},
              {"points_checked", r.points_checked},
              {"max_relative_violation", number_or_null(r.max_relative_violation)},
              {"slack", r.slack},
              {"worst_at", number_or_null(r.worst_at)},
              {"pass", r.pass}};
}

inline Json to_json(const EnvelopeReport& e) {
  return Json{{"c1", number_or_null(e.c1)},
              {"c2", number_or_null(e.c2)},
              {"window_start", number_or_null(e.window_start)},
              {"points_checked", e.points_checked},
              {"violations", e.violations},
              {"max_violation", number_or_null(e.max_violation)},
              {"pass", e.pass}};
}

/// Trajectory CSV with columns r,u,v,du,dv,res_eq1,res_eq2.
inline void write_trajectory_csv(std::ostream& out, const RadialSolution& s, const EquationResiduals& res) {
  out << "r,u,v,du,dv,res_eq1,res_eq2\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << format_number(s.r[i]) << ',' << format_number(s.u[i]) << ',' << format_number(s.v[i]) << ','
        << format_number(s.w[i]) << ',' << format_number(s.dv[i]) << ',' << format_number(res.eq1[i]) << ','
        << format_number(res.eq2[i]) << '\n';
  }
}

/// Reads the r,u,v,du,dv columns of a trajectory CSV (other columns are
/// ignored). Throws std::runtime_error with the line number on bad input.
inline RadialSolution read_trajectory_csv(std::istream& in, const ProblemSpec& spec, double threshold) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trajectory file is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) header.push_back(detail::trim(cell));
  }
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* need : {"r", "u", "v", "du", "dv"}) {
    if (!col.contains(need)) throw std::runtime_error(std::string("trajectory header lacks column ") + need);
  }
  RadialSolution s;
  s.spec = spec;
  s.threshold = threshold;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(detail::trim(cell));
    auto get = [&](const char* name) {
      const std::size_t k = col[name];
      const auto v = k < cells.size() ? detail::parse_double(cells[k]) : std::nullopt;
      if (!v) throw std::runtime_error("trajectory line " + std::to_string(line_no) + ": bad value in column " + name);
      return *v;
    };
    s.r.push_back(get("r"));
    s.u.push_back(get("u"));
    s.v.push_back(get("v"));
    s.w.push_back(get("du"));
    s.dv.push_back(get("dv"));
  }
  if (s.r.size() < 2) throw std::runtime_error("trajectory needs at least two rows");
  for (std::size_t i = 1; i < s.r.size(); ++i) {
    if (!(s.r[i] > s.r[i - 1])) {
      throw std::runtime_error("trajectory radii not strictly increasing at data row " + std::to_string(i + 1));
    }
  }
  s.u0 = s.u.front();
  s.v0 = s.v.front();
  return s;
}

// ---------------------------------------------------------------------------
// Shared pieces

/// Log-uniform sample radii in [1e-3, 1e3] for the sandwich check.
inline std::vector<double> sandwich_samples(std::uint64_t seed, std::size_t count = 50) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> exponent(-3.0, 3.0);
  std::vector<double> out(count);
  for (auto& s : out) s = std::pow(10.0, exponent(rng));
  return out;
}

/// Runs one check; an exception becomes a failing report.
template <class F>
InequalityReport guarded(const std::string& name, F&& check) {
  try {
    return check();
  } catch (const std::exception& e) {
    InequalityReport r{.name = name};
    r.max_relative_violation = std::nan("");
    r.pass = false;
    r.worst_at = std::nan("");
    std::cerr << "radlab: " << name << ": " << e.what() << '\n';
    return r;
  }
}

inline std::vector<InequalityReport> verify_suite(const RadialSolution& sol, std::uint64_t seed) {
  const auto samples = sandwich_samples(seed);
  return {guarded("monotone", [&] { return check_monotone(sol); }),
          guarded("convexity_bounds", [&] { return check_convexity_bounds(sol); }),
          guarded("uprime_estimate", [&] { return check_uprime_estimate(sol); }),
          guarded("sandwich", [&] { return check_sandwich(sol.spec.h, sol.spec.p, samples); }),
          guarded("no_u_only_blowup", [&] { return check_no_u_only_blowup(sol); })};
}

inline Json reports_json(const std::vector<InequalityReport>& reports) {
  Json arr = Json::array();
  for (const auto& r : reports) arr.push_back(to_json(r));
  return arr;
}

inline void require_fixed_problem(const RunConfig& cfg, const char* command) {
  if (!cfg.sweep.empty()) {
    throw ConfigError({std::string(command) + " needs a fixed problem; remove the [sweep] section or use sweep"});
  }
}

// ---------------------------------------------------------------------------
// Commands

/// Criteria and predicted class as JSON.
inline int cmd_classify(const RunConfig& cfg, std::ostream& out) {
  require_fixed_problem(cfg, "classify");
  const RunInstance run = instantiate(cfg);
  const ProblemSpec& spec = run.spec;
  const Classification pred = predict(spec, run.omega);
  Json j;
  j["spec"] = to_json(spec, run.omega);
  j["valid"] = true;
  j["theta"] = spec.admissible() ? Json(spec.theta()) : Json(nullptr);
  j["delta"] = spec.admissible() ? Json(spec.delta()) : Json(nullptr);
  j["k1"] = spec.k1();
  j["k2"] = spec.k2();
  j["criterion_unweighted"] = pred.unweighted ? to_json(*pred.unweighted) : Json(nullptr);
  j["criterion_weighted"] = pred.weighted ? to_json(*pred.weighted) : Json(nullptr);
  j["predicted_class"] = to_string(pred.cls);
  j["heuristic"] = pred.heuristic;
  Json notes = Json::array();
  for (const auto& n : validate(spec).notes) notes.push_back(n);
  if (!pred.details.empty()) notes.push_back(pred.details);
  j["notes"] = notes;
  out << j.dump(2) << '\n';
  return 0;
}

/// Solves one problem, writes <out_dir>/trajectory.csv and report.json and
/// prints the report. Solver failures are reported, not fatal.
inline int cmd_solve(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& out) {
  require_fixed_problem(cfg, "solve");
  const RunInstance run = instantiate(cfg);
  const ProblemSpec& spec = run.spec;
  std::filesystem::create_directories(out_dir);

  Json j;
  j["spec"] = to_json(spec, run.omega);
  j["solver"] = Json{{"u0", run.u0},
                     {"v0", run.v0},
                     {"target_radius", run.solver.target_radius},
                     {"blowup_threshold", run.solver.blowup_threshold},
                     {"rel_tol", run.solver.rel_tol}};
  const Classification pred = predict(spec, run.omega);
  j["predicted"] = to_json(pred);
  j["predicted_class"] = to_string(pred.cls);

  std::ofstream csv(out_dir / "trajectory.csv", std::ios::binary);
  std::optional<RadialSolution> sol;
  try {
    sol = march(spec, run.u0, run.v0, run.solver);
  } catch (const std::exception& e) {
    j["error"] = e.what();
    csv << "r,u,v,du,dv,res_eq1,res_eq2\n";
  }
  if (sol) {
    const EquationResiduals res = equation_residuals(*sol);
    write_trajectory_csv(csv, *sol, res);
    j["termination"] = to_string(sol->terminated);
    j["R0"] = sol->R0 ? number_or_null(*sol->R0) : Json(nullptr);
    j["r_end"] = sol->r.back();
    j["points"] = sol->size();
    j["steps"] = Json{{"accepted", sol->accepted_steps}, {"rejected", sol->rejected_steps}};
    j["bootstrap"] = Json{{"radius", sol->bootstrap_radius}, {"points", sol->bootstrap_points}};
    Json crossings = Json::array();
    for (double c : sol->threshold_crossings) crossings.push_back(c);
    j["threshold_crossings"] = crossings;
    j["diagnostics"] = sol->diagnostics;
    const Classification num = numeric_classify(*sol, run.omega);
    j["numeric"] = to_json(num);
    j["numeric_class"] = to_string(num.cls);
    j["reconcile"] = to_json(reconcile(pred, num));
    j["residuals"] = Json{{"window", Json::array({0.01, 0.9 * sol->r.back()})},
                          {"sup_eq1", number_or_null(residual_sup(*sol, res.eq1))},
                          {"sup_eq2", number_or_null(residual_sup(*sol, res.eq2))}};
    j["verify"] = reports_json(verify_suite(*sol, cfg.seed));
    if (sol->terminated == Termination::BlowUp && pred.unweighted && pred.unweighted->verdict == Verdict::Finite) {
      try {
        j["envelope"] = to_json(blowup_envelope_check(*sol));
      } catch (const std::exception& e) {
        j["envelope"] = Json{{"error", e.what()}};
      }
    }
  }
  const std::string text = j.dump(2) + "\n";
  std::ofstream(out_dir / "report.json", std::ios::binary) << text;
  out << text;
  return 0;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

inline std::vector<std::string> sweep_row(const RunConfig& cfg, const SweepPoint& point, bool solve) {
  std::vector<std::string> cells;
  for (const auto& [name, value] : point) cells.push_back(format_number(value));
  const std::size_t fixed = solve ? 9 : 5;
  std::vector<std::string> rest(fixed);
  std::string error;
  try {
    const RunInstance run = instantiate(cfg, point);
    const Classification pred = predict(run.spec, run.omega);
    rest[0] = to_string(pred.cls);
    if (pred.unweighted) {
      rest[1] = to_string(pred.unweighted->verdict);
      rest[2] = format_number(pred.unweighted->outer_exponent);
    }
    if (pred.weighted) {
      rest[3] = to_string(pred.weighted->verdict);
      rest[4] = format_number(pred.weighted->outer_exponent);
    }
    if (solve && run.spec.admissible()) {
      const RadialSolution sol = march(run.spec, run.u0, run.v0, run.solver);
      const Classification num = numeric_classify(sol, run.omega);
      rest[5] = to_string(sol.terminated);
      rest[6] = sol.R0 ? format_number(*sol.R0) : "";
      rest[7] = to_string(num.cls);
      rest[8] = reconcile(pred, num).agree ? "true" : "false";
    }
  } catch (const std::exception& e) {
    error = e.what();
  }
  for (auto& c : rest) cells.push_back(std::move(c));
  cells.push_back(csv_field(error));
  return cells;
}

}  // namespace detail

/// Atlas over the sweep grid, one CSV row per point in declared order.
/// Rows are computed concurrently; a failing row fills the error column.
inline int cmd_sweep(const RunConfig& cfg, bool solve, std::ostream& out,
                     const std::optional<std::filesystem::path>& out_dir = std::nullopt, unsigned threads = 0) {
  const auto points = sweep_points(cfg);
  std::vector<std::vector<std::string>> rows(points.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(points.size()));
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < points.size(); i = next++) rows[i] = detail::sweep_row(cfg, points[i], solve);
      });
    }
  }
  std::ostringstream csv;
  std::vector<std::string> header;
  for (const auto& axis : cfg.sweep) header.push_back(axis.name);
  for (const char* h : {"predicted_class", "unweighted_verdict", "unweighted_exponent", "weighted_verdict",
                        "weighted_exponent"}) {
    header.push_back(h);
  }
  if (solve) {
    for (const char* h : {"termination", "R0", "numeric_class", "agreement"}) header.push_back(h);
  }
  header.push_back("error");
  auto emit = [&csv](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) csv << (i ? "," : "") << cells[i];
    csv << '\n';
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    std::ofstream(*out_dir / "atlas.csv", std::ios::binary) << csv.str();
  }
  out << csv.str();
  return 0;
}

/// Verify suite on a fresh solve, or on a trajectory file when given.
/// Exit code 1 when any check fails.
inline int cmd_verify(const RunConfig& cfg, const std::optional<std::filesystem::path>& trajectory,
                      std::ostream& out) {
  require_fixed_problem(cfg, "verify");
  const RunInstance run = instantiate(cfg);
  Json j;
  j["spec"] = to_json(run.spec, run.omega);
  std::vector<InequalityReport> reports;
  try {
    RadialSolution sol;
    if (trajectory) {
      j["source"] = trajectory->string();
      std::ifstream in(*trajectory, std::ios::binary);
      if (!in) throw std::runtime_error("cannot open trajectory file " + trajectory->string());
      sol = read_trajectory_csv(in, run.spec, run.solver.blowup_threshold);
    } else {
      j["source"] = "solve";
      sol = march(run.spec, run.u0, run.v0, run.solver);
      j["termination"] = to_string(sol.terminated);
    }
    reports = verify_suite(sol, cfg.seed);
  } catch (const std::exception& e) {
    j["error"] = e.what();
    InequalityReport r{.name = "trajectory"};
    r.max_relative_violation = std::nan("");
    r.pass = false;
    reports.push_back(r);
  }
  const bool pass = std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.pass; });
  j["reports"] = reports_json(reports);
  j["pass"] = pass;
  out << j.dump(2) << '\n';
  return pass ? 0 : 1;
}

}  // namespace radlab
