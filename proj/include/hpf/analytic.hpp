#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <vector>

#include "hpf/antiderivative.hpp"
#include "hpf/common.hpp"
#include "hpf/quadrature.hpp"
#include "hpf/summation.hpp"

namespace hpf {
namespace analytic {

// Geometric interpolation nodes base^k, k = 1..K, with the induced growth
// index g(x) = log_base(x) and weight W(t) = t^(2 g(t) - 1). Any base
// strictly above 5 keeps the k-th node above 5^k.
class NodeSequence {
 public:
  NodeSequence(int K, double base);

  double node(int k) const;  // 1-based
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& nodes() const { return nodes_; }
  double base() const { return base_; }
  double base_pow(int j) const { return std::pow(base_, j); }

  double growth_index(double x) const { return std::log(x) / log_base_; }
  double weight(double t) const {
    return std::pow(t, 2.0 * growth_index(t) - 1.0);
  }

 private:
  std::vector<double> nodes_;
  double base_;
  double log_base_;
};

struct EvalResult {
  double value = 0.0;      // may overflow to inf; magnitude stays valid
  SignLog magnitude;
  double error_bound = 0.0;  // truncation: coefficient tail + product tail
};

/* The entire interpolants F(z) = sum_k B_k prod_{j != k} (1 - z/beta_j)^2
   with B_k = s_k / prod_{j != k} (1 - beta_k/beta_j)^2, where s_k are the
   partial sums of a binary sequence with first bit 0. By construction
   F(beta_k) = s_k. Coefficients and products are accumulated as sign plus
   log-magnitude; the infinite products are truncated at J factors with the
   tail folded into the reported error bound. */
class InterpolationSystem {
 public:
  InterpolationSystem(NodeSequence nodes, summation::BinarySeq a,
                      int product_truncation);

  int K() const { return nodes_.size(); }
  int J() const { return J_; }
  const NodeSequence& nodes() const { return nodes_; }
  const summation::BinarySeq& sequence() const { return a_; }

  double partial_sum(int k) const;   // s_k, 1-based
  SignLog coefficient(int k) const;  // B_k, zero when s_k = 0
  // Bound on the relative change of |B_k| if the product ran past J.
  double coefficient_tail_bound(int k) const;

  EvalResult value(double z) const;
  std::complex<double> value(std::complex<double> z) const;

  // Term-by-term differentiation of the truncated series.
  double derivative_termwise(double z) const;

  // Cauchy integral for F'(z) on a circle of radius radius_factor * rho,
  // trapezoid rule with node doubling until it settles (spectral for entire
  // integrands). Throws QuadratureDivergence if it fails to settle.
  double derivative_cauchy(double z, double rho, double radius_factor = 2.0,
                           int max_doublings = 12) const;

 private:
  NodeSequence nodes_;
  summation::BinarySeq a_;
  int J_;
  std::vector<double> s_;          // s_1..s_K
  std::vector<SignLog> coeff_;     // B_1..B_K
  std::vector<double> tail_bound_;
};

struct GrowthRecord {
  double rho = 0.0;
  double measured_log = 0.0;  // log |F(-rho)|
  double bound_log = 0.0;     // log C + g(rho) * log(4 rho^2)
  bool ok = false;
};

struct GrowthReport {
  double fitted_log_c = 0.0;  // fitted once on the smallest rho, then fixed
  std::vector<GrowthRecord> records;
  bool all_ok = true;
};

// |F(-rho)| <= C (4 rho^2)^(g(rho)) across the given radii.
GrowthReport growth_bound_check(const InterpolationSystem& sys,
                                const std::vector<double>& rhos);

struct CoefficientDecayRecord {
  int k = 0;
  double abs_coeff = 0.0;
  double bound = 0.0;
  bool ok = false;
};

struct CoefficientDecayReport {
  double fitted_c = 0.0;  // fitted on the first k with s_k > 0
  std::vector<CoefficientDecayRecord> records;
  bool all_ok = true;
};

// |B_k| <= C s_k base^(-2k) with one fitted constant.
CoefficientDecayReport coefficient_decay_check(const InterpolationSystem& sys);

struct IncrementRecord {
  int k = 0;
  int bit = 0;               // a_{k+1}
  double by_difference = 0.0;  // F(beta_{k+1}) - F(beta_k)
  double by_quadrature = 0.0;  // int over [1/beta_{k+1}, 1/beta_k] of f_1
};

struct IncrementReport {
  std::vector<IncrementRecord> records;
  double max_route_gap = 0.0;  // between the two routes
  double max_bit_gap = 0.0;    // against the exact bit
};

/* After t = 1/x the increments of the antiderivative become bits: with
   f_1(t) = F'(1/t) t^-2 and alpha_k = 1/beta_k, the integral of f_1 over
   [alpha_{k+1}, alpha_k] equals s_{k+1} - s_k. Checked by the fundamental
   theorem (difference of F at the nodes) and independently by direct
   quadrature of f_1. */
IncrementReport increment_check(const InterpolationSystem& sys,
                                quad::QuadConfig cfg = {});

struct LaurentData {
  std::map<int, double> coeffs;  // n -> c_n, finitely many, n >= -pole_order
};

struct LaurentFinitePart {
  double value = 0.0;            // sum_{n != -1} c_n x^(n+1) / (n+1)
  double log_coefficient = 0.0;  // c_{-1}, the coefficient of log x
};

// Termwise antiderivative with the divergent endpoint values at 0 dropped;
// the 1/x term contributes a log, returned as a coefficient and never
// evaluated at the endpoint.
LaurentFinitePart laurent_finite_part(const LaurentData& L, double x);

struct WindowAgreementReport {
  std::vector<double> windows_f1;  // integrals over [beta_n, beta_{n+1}]
  std::vector<double> windows_f2;
  bool windows_match = false;  // hypothesis of the implication
  bool applicable = false;     // alias of windows_match
  double anchored_f1 = 0.0;    // (P f1)(beta_1)
  double anchored_f2 = 0.0;
  bool anchored_match = false;
};

// If the window integrals of f1 and f2 coincide for every realized n, the
// anchored antiderivatives must coincide at beta_1; emits the integral
// vectors and both anchored values.
WindowAgreementReport anchored_agreement_check(const FunctionHandle& f1,
                                               const FunctionHandle& f2,
                                               const NodeSequence& nodes,
                                               const AnchoredAntiderivative& P,
                                               double tol = 1e-9,
                                               quad::QuadConfig cfg = {});

}  // namespace analytic
}  // namespace hpf
