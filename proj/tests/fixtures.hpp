#pragma once

#include <string>
#include <vector>

#include "radlab/classifier.hpp"


namespace fixtures {

/// n = 3, f1 = f2 = 1, g1 = t^m, g2 = t^beta, h = t^q.
inline radlab::ProblemSpec power_spec(double p, double alpha, double m, double beta, double q) {
  radlab::ProblemSpec s;
  s.p = p;
  s.alpha = alpha;
  s.n = 3;
  s.g1 = radlab::FuncExpr::power(1.0, m);
  s.g2 = beta == 0.0 ? radlab::FuncExpr::constant(1.0) : radlab::FuncExpr::power(1.0, beta);
  s.h = radlab::FuncExpr::power(1.0, q);
  return s;
}

inline radlab::ProblemSpec spec_a() { return power_spec(2, 0, 1, 0, 1); }
inline radlab::ProblemSpec spec_b() { return power_spec(2, 0, 1, 0, 6); }
inline radlab::ProblemSpec spec_c() { return power_spec(2, 0, 1, 0, 4); }

struct Case {
  double p, alpha, m, beta, q;
  radlab::BoundaryClass expected;
};

/// Twelve specs, four per boundary class; the first of each group is spec A, B or C.
inline const std::vector<Case>& reconciliation_cases() {
  using radlab::BoundaryClass;
  static const std::vector<Case> cases{
      {2, 0, 1, 0, 1, BoundaryClass::B1},   {3, 0, 1, 0, 4, BoundaryClass::B1},
      {3, 0, 2, 0, 2, BoundaryClass::B1},   {3, 1, 1, 1, 1, BoundaryClass::B1},
      {2, 0, 1, 0, 6, BoundaryClass::B2},   {1.5, 0, 1, 0, 3, BoundaryClass::B2},
      {2, 0.5, 1, 0, 5, BoundaryClass::B2}, {3, 0, 2, 0, 8, BoundaryClass::B2},
      {2, 0, 1, 0, 4, BoundaryClass::B3},   {1.5, 0, 1, 0, 1, BoundaryClass::B3},
      {2, 0.5, 1, 0, 1, BoundaryClass::B3}, {3, 0, 1, 1, 4, BoundaryClass::B3},
  };
  return cases;
}

inline radlab::ProblemSpec spec_of(const Case& c) { return power_spec(c.p, c.alpha, c.m, c.beta, c.q); }

inline std::string config_path(const std::string& name) { return std::string(RADLAB_CONFIG_DIR) + "/" + name; }

}  // namespace fixtures
