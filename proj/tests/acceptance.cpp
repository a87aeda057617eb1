// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "radlab/radlab.hpp"

using namespace radlab;
namespace fs = std::filesystem;

namespace {

/// Collects failure reasons; a criterion passes when none were recorded.
struct Check {
  std::vector<std::string> failures;
  void require(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

std::string describe(const fixtures::Case& c) {
  std::ostringstream s;
  s << "(p=" << c.p << ", alpha=" << c.alpha << ", m=" << c.m << ", beta=" << c.beta << ", q=" << c.q << ")";
  return s.str();
}

std::string power(double e) { return e == 0.0 ? "1" : "t^" + format_number(e); }

RunConfig config_of(const fixtures::Case& c) {
  RunConfig cfg;
  cfg.p = c.p;
  cfg.alpha = c.alpha;
  cfg.g1 = power(c.m);
  cfg.g2 = power(c.beta);
  cfg.h = power(c.q);
  return cfg;
}

void power_grid_oracle(Check& ck) {
  std::size_t count = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (double p : {1.5, 2.0, 3.0}) {
    for (double alpha : {0.0, 0.5 * (p - 1.0)}) {
      const double gap = p - 1.0 - alpha;
      for (double m : {1.0, 2.0}) {
        for (double beta = 0.0; beta <= m; ++beta) {
          for (double q = 1.0; q <= 8.0; ++q) {
            const auto spec = fixtures::power_spec(p, alpha, m, beta, q);
            const auto pred = predict(spec);
            const double P = m * p / (m * p + p - 1.0 - beta);
            const bool b1 = q * m <= gap * (p - 1.0 - beta) + 1e-12;
            const bool weighted_finite = 1.0 / gap - (q / (gap * p) + 1.0) * P < -1.0 - 1e-12;
            const fixtures::Case c{p, alpha, m, beta, q, pred.cls};
            ck.require((pred.cls == BoundaryClass::B1) == b1, "B1 condition " + describe(c));
            ck.require((pred.cls == BoundaryClass::B2) == (!b1 && weighted_finite), "B2 condition " + describe(c));
            ++count;
          }
        }
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ck.require(count == 240, "grid size " + std::to_string(count));
  ck.require(secs < 1.0, "grid took " + format_number(secs) + " s");
}

void comparison_forms(Check& ck) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> coeff(0.05, 20.0), expo(0.0, 8.0), pd(1.05, 5.0), th(0.1, 5.0);
  std::uniform_int_distribution<int> terms(1, 4);
  auto random_h = [&] {
    std::vector<PowerTerm> t;
    for (int k = terms(rng); k > 0; --k) t.push_back({coeff(rng), expo(rng)});
    return FuncExpr::from_terms(t);
  };
  for (int i = 0; i < 200; ++i) {
    const auto h = random_h();
    const double p = pd(rng), theta = th(rng);
    for (int k = 1; k <= 50; ++k) {
      const auto f = comparison_form_verdicts(h, theta, p, 0.1 * k);
      ck.require(f.h_form == f.big_h_form, "form verdicts differ for h = " + h.to_string());
    }
  }
  std::uniform_real_distribution<double> log_s(std::log(1e-3), std::log(1e3));
  std::size_t violations = 0;
  for (int i = 0; i < 500; ++i) {
    const auto h = random_h();
    const double p = pd(rng);
    const double s[] = {std::exp(log_s(rng))};
    if (!check_sandwich(h, p, s, 1e-9).pass) ++violations;
  }
  ck.require(violations == 0, std::to_string(violations) + " sandwich violations");
}

void reconciliation(Check& ck, std::vector<RadialSolution>& runs) {
  for (const auto& c : fixtures::reconciliation_cases()) {
    const auto spec = fixtures::spec_of(c);
    const auto pred = predict(spec);
    ck.require(pred.cls == c.expected, "prediction " + describe(c));
    const auto t0 = std::chrono::steady_clock::now();
    runs.push_back(march(spec, 1.0, 1.0));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto num = numeric_classify(runs.back());
    ck.require(reconcile(pred, num).agree, "disagreement " + describe(c) + ": " + num.details);
    ck.require(secs < 10.0, "slow run " + describe(c));
  }
  // Spec A is also checked as a whole-space problem.
  const auto a = fixtures::spec_a();
  ck.require(reconcile(predict(a, Domain::WholeSpace), numeric_classify(runs.front(), Domain::WholeSpace)).agree,
             "spec A on the whole space");
}

void inequalities(Check& ck, const std::vector<RadialSolution>& runs) {
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& s = runs[i];
    const std::string who = describe(fixtures::reconciliation_cases()[i]);
    ck.require(check_monotone(s).pass, "monotone " + who);
    ck.require(check_convexity_bounds(s, 1e-4).pass, "convexity " + who);
    ck.require(check_uprime_estimate(s, 1e-6).pass, "u' estimate " + who);
    ck.require(check_no_u_only_blowup(s).pass, "u-only blow-up " + who);
  }
}

void bootstrap(Check& ck) {
  const auto seg = picard_bootstrap(fixtures::spec_a(), 1.0, 1.0, 0.1);
  const double r = seg.r.back();
  ck.require(std::abs(r - 0.1) < 1e-15, "bootstrap radius shrank");
  ck.require(std::abs(seg.u.back() - (1.0 + r * r / 6.0)) < 1e-6, "u(0.1)");
  ck.require(std::abs(seg.v.back() - (1.0 + r * r * r / 36.0)) < 1e-6, "v(0.1)");
}

void scaling(Check& ck) {
  struct Run {
    const char* name;
    ProblemSpec spec;
    double lambda, rho;
  };
  // Spec B blows up near r = 4.44, so its windows stay below that.
  for (const auto& run : {Run{"A", fixtures::spec_a(), 0.5, 8.0}, Run{"A", fixtures::spec_a(), 2.0, 2.0},
                          Run{"B", fixtures::spec_b(), 0.5, 8.0}, Run{"B", fixtures::spec_b(), 2.0, 2.0}}) {
    const auto rep = check_scaling_identity(run.spec, run.lambda, 1.0, 1.0, run.rho);
    ck.require(std::max(rep.residual_u, rep.residual_v) < 1e-6,
               std::string("spec ") + run.name + " lambda " + format_number(run.lambda));
  }
}

void criterion_value(Check& ck) {
  const auto spec = fixtures::spec_b();
  const double exact = 3.0 * std::pow(4.0, 2.0 / 3.0) / 5.0;
  const auto v = criterion(spec, CriterionKind::Unweighted);
  ck.require(v.value && std::abs(*v.value / exact - 1.0) < 1e-8, "criterion value");
  ck.require(std::abs(phi(spec, 1.0) / exact - 1.0) < 1e-8, "Phi(1)");
}

void envelope(Check& ck, const std::vector<RadialSolution>& runs) {
  for (const auto* s : {&runs[4], &runs[8]}) {
    const auto rep = blowup_envelope_check(*s);
    ck.require(rep.c1 > 0.0 && rep.c1 < rep.c2 && rep.violations == 0 && rep.pass,
               "envelope " + s->spec.h.to_string());
  }
}

void residual_columns(Check& ck) {
  const auto dir = fs::temp_directory_path() / "radlab_acceptance";
  for (const auto& c : fixtures::reconciliation_cases()) {
    fs::remove_all(dir);
    std::ostringstream sink;
    cmd_solve(config_of(c), dir, sink);
    std::ifstream in(dir / "trajectory.csv");
    std::string line;
    std::getline(in, line);
    std::vector<std::array<double, 3>> rows;  // r, res_eq1, res_eq2
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      std::vector<double> cells;
      for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(std::stod(cell));
      rows.push_back({cells[0], cells[5], cells[6]});
    }
    ck.require(rows.size() > 10, "trajectory " + describe(c));
    if (rows.empty()) continue;
    const double hi = 0.9 * rows.back()[0];
    double sup = 0.0;
    for (const auto& row : rows) {
      if (row[0] >= 0.01 && row[0] <= hi) sup = std::max({sup, std::abs(row[1]), std::abs(row[2])});
    }
    ck.require(sup < 1e-6, "residual " + format_number(sup) + " " + describe(c));
  }
  fs::remove_all(dir);
}

void determinism(Check& ck) {
  const auto cfg = load_config(fixtures::config_path("power_grid.conf"));
  std::ostringstream a, b;
  cmd_sweep(cfg, true, a);
  cmd_sweep(cfg, true, b);
  ck.require(!a.str().empty() && a.str() == b.str(), "sweep output differs");
}

}  // namespace

int main() {
  std::vector<RadialSolution> runs;
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"power-family classification matches the closed-form conditions", power_grid_oracle},
      {"comparison forms agree and sandwich quantities are ordered", comparison_forms},
      {"numeric classification reconciles with prediction on twelve specs",
       [&](Check& ck) { reconciliation(ck, runs); }},
      {"trajectory inequalities hold on every reconciliation run",
       [&](Check& ck) {
         ck.require(runs.size() == 12, "reconciliation runs unavailable");
         if (runs.size() == 12) inequalities(ck, runs);
       }},
      {"Picard bootstrap reproduces the series near the origin", bootstrap},
      {"scaling identity holds for lambda 0.5 and 2", scaling},
      {"closed-form criterion value and Phi(1)", criterion_value},
      {"blow-up gradient envelope",
       [&](Check& ck) {
         ck.require(runs.size() == 12, "reconciliation runs unavailable");
         if (runs.size() == 12) envelope(ck, runs);
       }},
      {"solve residual columns below 1e-6", residual_columns},
      {"sweep output is byte-identical across runs", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check ck;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(ck);
    } catch (const std::exception& e) {
      ck.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = ck.failures.empty();
    failed += ok ? 0 : 1;
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << criteria[i].first << " (" << std::fixed
              << std::setprecision(2) << secs << " s)\n";
    for (std::size_t k = 0; k < ck.failures.size() && k < 10; ++k) std::cout << "    " << ck.failures[k] << '\n';
  }
  return failed == 0 ? 0 : 1;
}
