#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "hpf/function.hpp"

namespace hpf {
namespace quad {

struct QuadConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_subdivisions = 4000;
  // Upper bound on structural breakpoints accepted from a handle per call.
  std::size_t breakpoint_budget = 300000;
  // Smallest epsilon probed by the improper-limit schedule: eps_n = 2^-n,
  // n = improper_n_lo .. improper_n_hi.
  int improper_n_lo = 4;
  int improper_n_hi = 40;
  double divergence_bound = 1e6;
};

struct QuadResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  int subdivisions = 0;
  bool converged = false;
};

// Adaptive Gauss-Kronrod (G7,K15) over [lo, hi], 0 < lo <= hi. Panels are
// pre-split at the handle's breakpoints when it carries any. Throws
// NonFiniteSample if the integrand returns a non-finite value and
// MaxSubdivisions if the tolerance is unreachable within the budget.
QuadResult integrate(const FunctionHandle& f, double lo, double hi,
                     QuadConfig cfg = {});

// Same kernel for a bare callable with explicit initial panel edges.
QuadResult integrate_kernel(const std::function<double(double)>& f, double lo,
                            double hi, const std::vector<double>& inner_edges,
                            QuadConfig cfg, const std::string& label);

// Non-adaptive single K15 panel; used for piecewise-smooth structures where
// the caller already aligned the panel with the integrand's structure.
std::pair<double, double> kronrod15(const std::function<double(double)>& f,
                                    double lo, double hi);

enum class ImproperKind {
  Convergent,
  DivergentPlus,
  DivergentMinus,
  Oscillatory,  // no stable pattern within the probe range: honest "unknown"
};

struct ImproperVerdict {
  ImproperKind kind = ImproperKind::Oscillatory;
  double value = 0.0;               // extrapolated limit when Convergent
  double abs_error_estimate = 0.0;  // for the Convergent case
  // (eps, integral over [eps, hi]) along the realized schedule, eps strictly
  // decreasing geometrically.
  std::vector<std::pair<double, double>> epsilon_trace;

  bool convergent() const { return kind == ImproperKind::Convergent; }
};

/* Limit of int_eps^hi f as eps -> 0+, probed on the dyadic schedule
   eps_n = 2^-n. The increments d_n = int over [eps_{n+1}, eps_n] of an
   integrable algebraic endpoint behave geometrically, d_n ~ C 2^{-pn} with
   p > 0, so the remaining mass extrapolates as a geometric series from the
   measured increment ratio. A ratio pinned near 1 with one sign means the
   partial integrals grow without bound (log-type or worse); the verdict is
   Divergent as soon as that pattern is stable or the trace itself passes the
   divergence bound. Anything without a stable pattern stays Oscillatory.
   The schedule stops early once a verdict is confident. */
ImproperVerdict improper_integral(const FunctionHandle& f, QuadConfig cfg = {},
                                  double hi = 1.0);

enum class L1Verdict { L1, NotL1, Unknown };

// f is L1 iff the improper integral of |f| converges. Divergence of |f|
// maps to NotL1; an unstable trace propagates as Unknown.
L1Verdict l1_classify(const FunctionHandle& f, QuadConfig cfg = {});

const char* to_string(ImproperKind k);
const char* to_string(L1Verdict v);

}  // namespace quad
}  // namespace hpf
