#pragma once

#include <string>
#include <vector>

#include "hpf/function.hpp"
#include "hpf/quadrature.hpp"

namespace hpf {
namespace finitepart {

/* Riesz regularization of int_0^x s^(alpha-1) f(s) ds.

   Repeated integration by parts against s^(alpha+k-1), discarding the
   divergent endpoint values at 0, gives

     I(alpha, x) = sum_{k=0}^{n-1} (-1)^k r(alpha,k) f^(k)(x) x^(alpha+k)
                   + (-1)^n r(alpha,n-1) int_0^x s^(alpha+n-1) f^(n)(s) ds

   with r(alpha,k) = 1 / prod_{j=0}^{k} (alpha+j) and r(alpha,-1) = 1.
   The right side is the analytic continuation of the left from
   Re alpha > 0 to Re alpha > -n, provided f^(n)(s) s^(alpha+n-1) is
   integrable. The value reported here is Gamma(alpha) * (J^alpha f)(x);
   dividing by Gamma(alpha) is a separate utility so that the poles of
   Gamma at nonpositive integers stay isolated from the continuation. */

struct PFQuery {
  FunctionHandle f;
  double alpha = 0.5;
  double x = 1.0;
  int depth = 0;  // n: number of integrations by parts
};

struct TailConditionReport {
  bool ok = false;
  bool derivative_available = false;
  quad::L1Verdict integrand_verdict = quad::L1Verdict::Unknown;
  std::string reason;
};

struct PFResult {
  double value = 0.0;                  // Gamma(alpha) * J^alpha f (x)
  std::vector<double> boundary_terms;  // signed, exactly as summed
  // Tail integral with its coefficient (-1)^n r(alpha, n-1) already applied,
  // so that value == sum(boundary_terms) + tail_integral.value.
  quad::QuadResult tail_integral;
  TailConditionReport condition_report;
};

// 1 / prod_{j=0}^{k} (alpha + j), the boundary-term coefficient magnitude
// Gamma(alpha)/Gamma(alpha+k+1), computed as a product. k = -1 returns 1.
// Throws PoleError when a factor vanishes (|alpha + j| < 1e-14).
double pochhammer_ratio(double alpha, int k);

// Smoothness-and-integrability condition for depth n: the handle exposes an
// order-n derivative and s^(alpha+n-1) f^(n)(s) is integrable on (0,1].
TailConditionReport check_tail_condition(const FunctionHandle& f, double alpha,
                                         int n, quad::QuadConfig cfg = {});

PFResult riesz_finite_part(const PFQuery& q, quad::QuadConfig cfg = {});

// |riesz(n1) - riesz(n2)|: uniqueness of the continuation, made executable.
double depth_consistency(const FunctionHandle& f, double alpha, double x,
                         int n1, int n2, quad::QuadConfig cfg = {});

// J^alpha f = value / Gamma(alpha); rejects nonpositive-integer alpha.
double gamma_normalized(const PFResult& r, double alpha);

}  // namespace finitepart
}  // namespace hpf
