#include "hpf/finite_part.hpp"

#include <cmath>

namespace hpf {
namespace finitepart {

double pochhammer_ratio(double alpha, int k) {
  if (k < 0) return 1.0;
  double prod = 1.0;
  for (int j = 0; j <= k; ++j) {
    const double factor = alpha + j;
    if (std::fabs(factor) < 1e-14) throw PoleError(alpha, j);
    prod *= factor;
  }
  return 1.0 / prod;
}

namespace {

// Evaluator for f^(n); identity for n == 0.
FunctionHandle::Eval nth_derivative(const FunctionHandle& f, int n) {
  if (n == 0) {
    FunctionHandle copy = f;
    return [copy](double s) { return copy(s); };
  }
  const auto* d = f.exact_derivative(n);
  if (!d)
    throw OrderUnavailable("derivative of order " + std::to_string(n) +
                           " unavailable for " + f.label());
  return *d;
}

bool bounded_near_zero(const FunctionHandle::Eval& g) {
  const double probes[3] = {1e-8, 1e-10, 1e-12};
  double ref = 0.0;
  for (double s : probes) {
    const double v = g(s);
    if (!std::isfinite(v)) return false;
    if (s == probes[0]) ref = std::fabs(v);
    if (std::fabs(v) > 1e6 * (1.0 + ref)) return false;
  }
  return true;
}

// int_0^x s^beta g(s) ds for an integrand that is integrable at 0.
// Splits at x/2: proper panel above, and below either the substitution
// u = s^(beta+1) (bounded g, beta > -1) or the epsilon-limit schedule.
quad::QuadResult tail_integral(const FunctionHandle::Eval& g, double beta,
                               double x, const FunctionHandle& f_for_bp,
                               quad::QuadConfig cfg) {
  auto weighted = [g, beta](double s) { return std::pow(s, beta) * g(s); };
  std::vector<double> edges = f_for_bp.breakpoints(x / 2, x, cfg.breakpoint_budget);
  quad::QuadResult upper = quad::integrate_kernel(weighted, x / 2, x, edges,
                                                  cfg, "tail upper");

  quad::QuadResult lower;
  if (beta > -1.0 && bounded_near_zero(g)) {
    const double p = beta + 1.0;
    const double cap = std::pow(x / 2, p);
    auto substituted = [g, p](double u) { return g(std::pow(u, 1.0 / p)); };
    // The open end at u = 0 carries at most sup|g| * u_min of mass.
    const double u_min = cap * 1e-16;
    lower = quad::integrate_kernel(substituted, u_min, cap, {}, cfg,
                                   "tail lower (power substitution)");
    lower.value /= p;
    lower.abs_error_estimate = lower.abs_error_estimate / p + cap * 1e-15;
  } else {
    FunctionHandle wh("s^beta * f^(n)", weighted, 0);
    if (f_for_bp.has_breakpoints()) {
      FunctionHandle base = f_for_bp;
      wh = wh.with_breakpoints([base](double lo, double hi, std::size_t b) {
        return base.breakpoints(lo, hi, b);
      });
    }
    quad::ImproperVerdict v = quad::improper_integral(wh, cfg, x / 2);
    if (!v.convergent())
      throw PreconditionFailed(
          std::string("tail integral does not converge near 0 (") +
          quad::to_string(v.kind) + ")");
    lower.value = v.value;
    lower.abs_error_estimate = v.abs_error_estimate;
    lower.converged = true;
  }

  quad::QuadResult out;
  out.value = lower.value + upper.value;
  out.abs_error_estimate = lower.abs_error_estimate + upper.abs_error_estimate;
  out.subdivisions = upper.subdivisions;
  out.converged = true;
  return out;
}

}  // namespace

TailConditionReport check_tail_condition(const FunctionHandle& f, double alpha,
                                         int n, quad::QuadConfig cfg) {
  TailConditionReport rep;
  if (n < 0) {
    rep.reason = "negative depth";
    return rep;
  }
  rep.derivative_available = (n == 0) || f.has_exact_derivative(n);
  if (!rep.derivative_available) {
    rep.reason = "OrderUnavailable: no order-" + std::to_string(n) +
                 " derivative on " + f.label();
    return rep;
  }
  FunctionHandle::Eval g = nth_derivative(f, n);
  const double beta = alpha + n - 1.0;
  if (beta >= 0.0 && bounded_near_zero(g)) {
    // Bounded integrand with a bounded weight: integrable without probing.
    rep.integrand_verdict = quad::L1Verdict::L1;
    rep.ok = true;
    return rep;
  }
  auto weighted = [g, beta](double s) { return std::pow(s, beta) * g(s); };
  FunctionHandle wh("s^(alpha+n-1)*f^(n)", weighted, 0);
  if (f.has_breakpoints()) {
    FunctionHandle base = f;
    wh = wh.with_breakpoints([base](double lo, double hi, std::size_t b) {
      return base.breakpoints(lo, hi, b);
    });
  }
  rep.integrand_verdict = quad::l1_classify(wh, cfg);
  rep.ok = rep.integrand_verdict == quad::L1Verdict::L1;
  if (!rep.ok)
    rep.reason = std::string("integrand classifies as ") +
                 quad::to_string(rep.integrand_verdict);
  return rep;
}

PFResult riesz_finite_part(const PFQuery& q, quad::QuadConfig cfg) {
  if (!(q.x > 0.0) || !(q.x <= 1.0))
    throw DomainError("riesz_finite_part: x outside (0,1]");
  if (q.depth < 0) throw DomainError("riesz_finite_part: negative depth");
  // Boundary coefficients pole at alpha in {0,-1,...,-(n-1)}.
  for (int j = 0; j < q.depth; ++j)
    if (std::fabs(q.alpha + j) < 1e-14) throw PoleError(q.alpha, j);

  PFResult out;
  out.condition_report = check_tail_condition(q.f, q.alpha, q.depth, cfg);
  if (!out.condition_report.ok)
    throw PreconditionFailed("riesz_finite_part precondition: " +
                             (out.condition_report.reason.empty()
                                  ? std::string("tail condition not satisfied")
                                  : out.condition_report.reason));

  double sum = 0.0;
  double sign = 1.0;
  for (int k = 0; k < q.depth; ++k) {
    const double coeff = pochhammer_ratio(q.alpha, k);
    const double deriv = eval_deriv(q.f, k, q.x).value;
    const double term = sign * coeff * deriv * std::pow(q.x, q.alpha + k);
    out.boundary_terms.push_back(term);
    sum += term;
    sign = -sign;
  }

  FunctionHandle::Eval g = nth_derivative(q.f, q.depth);
  quad::QuadResult tail =
      tail_integral(g, q.alpha + q.depth - 1.0, q.x, q.f, cfg);
  const double tail_coeff = sign * pochhammer_ratio(q.alpha, q.depth - 1);
  tail.value *= tail_coeff;
  tail.abs_error_estimate *= std::fabs(tail_coeff);
  out.tail_integral = tail;
  out.value = sum + tail.value;
  return out;
}

double depth_consistency(const FunctionHandle& f, double alpha, double x,
                         int n1, int n2, quad::QuadConfig cfg) {
  PFResult a = riesz_finite_part({f, alpha, x, n1}, cfg);
  PFResult b = riesz_finite_part({f, alpha, x, n2}, cfg);
  return std::fabs(a.value - b.value);
}

double gamma_normalized(const PFResult& r, double alpha) {
  if (alpha <= 0.0 && std::fabs(alpha - std::round(alpha)) < 1e-14)
    throw PoleError(alpha, static_cast<int>(-std::round(alpha)));
  return r.value / std::tgamma(alpha);
}

}  // namespace finitepart
}  // namespace hpf
