#pragma once

// Boundary classes of radial solutions: predicted from the integral
// criteria, observed on solver trajectories, and reconciled.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "radlab/criteria.hpp"
#include "radlab/format.hpp"
#include "radlab/problem.hpp"
#include "radlab/quadrature.hpp"
#include "radlab/radial_solver.hpp"

namespace radlab {

/// B1: u, v bounded on the ball.  B2: u bounded, v blows up.  B3: both blow up.
enum class BoundaryClass { B1, B2, B3, NoSolution, Global, Undecided };
enum class Domain { Ball, WholeSpace };
enum class Basis { Theorem, Numeric };

inline const char* to_string(BoundaryClass c) {
  switch (c) {
    case BoundaryClass::B1: return "B1";
    case BoundaryClass::B2: return "B2";
    case BoundaryClass::B3: return "B3";
    case BoundaryClass::NoSolution: return "NoSolution";
    case BoundaryClass::Global: return "Global";
    case BoundaryClass::Undecided: return "Undecided";
  }
  return "?";
}
inline const char* to_string(Domain d) { return d == Domain::Ball ? "ball" : "wholespace"; }
inline const char* to_string(Basis b) { return b == Basis::Theorem ? "Theorem" : "Numeric"; }

inline Domain parse_domain(const std::string& s) {
  if (s == "ball") return Domain::Ball;
  if (s == "wholespace") return Domain::WholeSpace;
  throw std::invalid_argument("omega must be \"ball\" or \"wholespace\", got \"" + s + "\"");
}

/// Data behind a numeric classification.
struct TrajectoryEvidence {
  Termination terminated = Termination::ReachedTarget;
  std::optional<double> R0;
  double r_end = 0.0;
  double u0 = 0.0;
  double u_end = 0.0;
  double v_end = 0.0;
  double threshold = 0.0;
  /// Log-log slope of u' v / v' against v just below the threshold.
  std::optional<double> trend_slope;
};

struct Classification {
  BoundaryClass cls = BoundaryClass::Undecided;
  Domain omega = Domain::Ball;
  Basis basis = Basis::Theorem;
  std::optional<ConvergenceVerdict> unweighted;
  std::optional<ConvergenceVerdict> weighted;
  std::optional<TrajectoryEvidence> evidence;
  /// Set when a verdict came from the numeric heuristic or was undecidable.
  bool heuristic = false;
  std::string details;
};

/// Class implied by the two criterion verdicts. Pure in its arguments.
inline BoundaryClass class_from_verdicts(bool admissible, Verdict unweighted, Verdict weighted, Domain omega) {
  if (!admissible) return BoundaryClass::NoSolution;
  if (omega == Domain::WholeSpace) {
    return unweighted == Verdict::Infinite ? BoundaryClass::Global : BoundaryClass::NoSolution;
  }
  if (unweighted == Verdict::Infinite) {
    if (weighted == Verdict::Finite) {
      throw std::logic_error("weighted criterion finite while unweighted diverges");
    }
    return BoundaryClass::B1;
  }
  return weighted == Verdict::Finite ? BoundaryClass::B2 : BoundaryClass::B3;
}

/// Class predicted by the criteria. A borderline numeric verdict yields
/// Undecided with the heuristic flag set.
inline Classification predict(const ProblemSpec& spec, Domain omega = Domain::Ball) {
  require_valid(spec);
  Classification c;
  c.omega = omega;
  c.basis = Basis::Theorem;
  if (!spec.admissible()) {
    c.cls = BoundaryClass::NoSolution;
    c.details = "alpha >= p - 1: no positive radial solution exists";
    return c;
  }
  try {
    c.unweighted = criterion(spec, CriterionKind::Unweighted);
    c.weighted = criterion(spec, CriterionKind::Weighted);
  } catch (const BorderlineUndecidable& e) {
    c.cls = BoundaryClass::Undecided;
    c.heuristic = true;
    c.details = e.what();
    return c;
  }
  c.heuristic = c.unweighted->method == Method::NumericHeuristic || c.weighted->method == Method::NumericHeuristic;
  c.cls = class_from_verdicts(true, c.unweighted->verdict, c.weighted->verdict, omega);
  if (omega == Domain::WholeSpace && c.cls == BoundaryClass::NoSolution) {
    c.details = "unweighted criterion converges: every solution blows up at a finite radius";
  }
  return c;
}

struct NumericClassifyOptions {
  /// Window of v, as fractions of the threshold, for the trend fit.
  double trend_window_low = 1e-4;
  double trend_window_high = 1.0;
  /// Trend slopes below -trend_margin mean u converges (B2).
  double trend_margin = 0.02;
  /// Used when the trend window holds fewer than four points: u_end below
  /// this multiple of u(0) means B2.
  double bounded_factor = 1e3;
};

namespace detail {

inline std::optional<double> trend_slope(const RadialSolution& s, double lo, double hi) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.v[i] < lo || s.v[i] > hi || !(s.dv[i] > 0.0) || !(s.w[i] > 0.0)) continue;
    x.push_back(std::log(s.v[i]));
    y.push_back(std::log(s.w[i] * s.v[i] / s.dv[i]));
  }
  if (x.size() < 4 || x.back() - x.front() < 1.0) return std::nullopt;
  return least_squares_slope(x, y);
}

}  // namespace detail

/// Class observed on a trajectory.
///
/// ReachedTarget is B1 evidence on a ball and Global evidence on the whole
/// space. After blow-up, u counts as unbounded (B3) when it passed the
/// threshold itself or when du/d(log v) = u' v / v' does not decay as a
/// power of v near the threshold; a decaying trend means u converges (B2).
/// StepUnderflow is Undecided.
inline Classification numeric_classify(const RadialSolution& sol, Domain omega = Domain::Ball,
                                       const NumericClassifyOptions& opts = {}) {
  if (sol.size() == 0) throw std::invalid_argument("numeric_classify: empty trajectory");
  Classification c;
  c.omega = omega;
  c.basis = Basis::Numeric;
  TrajectoryEvidence ev;
  ev.terminated = sol.terminated;
  ev.R0 = sol.R0;
  ev.r_end = sol.r.back();
  ev.u0 = sol.u.front();
  ev.u_end = sol.u.back();
  ev.v_end = sol.v.back();
  ev.threshold = sol.threshold;

  switch (sol.terminated) {
    case Termination::StepUnderflow:
      c.cls = BoundaryClass::Undecided;
      c.details = sol.diagnostics;
      break;
    case Termination::ReachedTarget:
      c.cls = omega == Domain::Ball ? BoundaryClass::B1 : BoundaryClass::Global;
      c.details = "reached r = " + format_number(ev.r_end) + " without blow-up";
      break;
    case Termination::BlowUp: {
      if (omega == Domain::WholeSpace) {
        c.cls = BoundaryClass::NoSolution;
        c.details = "blow-up at finite radius";
        break;
      }
      ev.trend_slope =
          detail::trend_slope(sol, opts.trend_window_low * sol.threshold, opts.trend_window_high * sol.threshold);
      if (ev.u_end > sol.threshold) {
        c.cls = BoundaryClass::B3;
        c.details = "u exceeded the blow-up threshold";
      } else if (ev.trend_slope) {
        c.cls = *ev.trend_slope < -opts.trend_margin ? BoundaryClass::B2 : BoundaryClass::B3;
        c.details = "du/dlog(v) ~ v^" + format_number(*ev.trend_slope);
      } else {
        c.cls = ev.u_end < opts.bounded_factor * ev.u0 ? BoundaryClass::B2 : BoundaryClass::B3;
        c.details = "too few points for a trend fit; decided by u at termination";
      }
      break;
    }
  }
  c.evidence = ev;
  return c;
}

/// Structured record of a prediction/observation mismatch.
struct Discrepancy {
  BoundaryClass predicted = BoundaryClass::Undecided;
  BoundaryClass observed = BoundaryClass::Undecided;
  std::optional<ConvergenceVerdict> unweighted;
  std::optional<ConvergenceVerdict> weighted;
  std::optional<TrajectoryEvidence> evidence;
  std::string reason;
};

struct AgreementReport {
  bool agree = false;
  BoundaryClass predicted = BoundaryClass::Undecided;
  BoundaryClass observed = BoundaryClass::Undecided;
  std::string rule;
  std::optional<Discrepancy> discrepancy;
};

namespace detail {

/// Reads a numeric class as evidence about another domain: a run without
/// blow-up supports B1 and Global alike, a blow-up rules out Global.
inline BoundaryClass as_domain(BoundaryClass observed, Domain from, Domain to) {
  if (from == to) return observed;
  if (to == Domain::WholeSpace) {
    if (observed == BoundaryClass::B1) return BoundaryClass::Global;
    if (observed == BoundaryClass::B2 || observed == BoundaryClass::B3) return BoundaryClass::NoSolution;
    return observed;
  }
  if (observed == BoundaryClass::Global) return BoundaryClass::B1;
  return observed == BoundaryClass::NoSolution ? BoundaryClass::Undecided : observed;
}

}  // namespace detail

/// Compares a prediction with a numeric classification of the same spec.
/// Global (or B1) is confirmed by a run that reached `horizon` without
/// blow-up, since unbounded domains are never observed in full.
inline AgreementReport reconcile(const Classification& predicted, const Classification& numeric,
                                 double horizon = 50.0) {
  AgreementReport rep;
  rep.predicted = predicted.cls;
  rep.observed = detail::as_domain(numeric.cls, numeric.omega, predicted.omega);
  const bool no_blowup = numeric.evidence && numeric.evidence->terminated == Termination::ReachedTarget;
  const bool long_enough = no_blowup && numeric.evidence->r_end >= horizon * (1.0 - 1e-12);
  std::string reason;
  if (predicted.cls == BoundaryClass::Undecided || rep.observed == BoundaryClass::Undecided) {
    reason = "at least one side is undecided";
  } else if (predicted.cls != rep.observed) {
    reason = std::string("predicted ") + to_string(predicted.cls) + ", observed " + to_string(rep.observed);
  } else if ((predicted.cls == BoundaryClass::Global || predicted.cls == BoundaryClass::B1) && !long_enough) {
    reason = "run stopped before the evidence horizon r = " + format_number(horizon);
  }
  if (reason.empty()) {
    rep.agree = true;
    rep.rule = predicted.cls == BoundaryClass::Global || predicted.cls == BoundaryClass::B1
                   ? "finite-horizon evidence up to r = " + format_number(horizon)
                   : "classes equal";
    return rep;
  }
  rep.rule = "mismatch";
  rep.discrepancy = Discrepancy{predicted.cls, rep.observed, predicted.unweighted, predicted.weighted,
                                numeric.evidence, reason};
  return rep;
}

}  // namespace radlab
