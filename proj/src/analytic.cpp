#include "hpf/analytic.hpp"

#include <algorithm>
#include <cmath>

namespace hpf {
namespace analytic {

NodeSequence::NodeSequence(int K, double base) : base_(base) {
  if (!(base > 5.0))
    throw BaseTooSmall("node base must exceed 5, got " + std::to_string(base));
  if (K < 1) throw DomainError("NodeSequence: K must be >= 1");
  log_base_ = std::log(base);
  nodes_.reserve(K);
  double v = 1.0;
  for (int k = 1; k <= K; ++k) {
    v *= base;
    nodes_.push_back(v);
  }
}

double NodeSequence::node(int k) const {
  if (k < 1 || k > size())
    throw DomainError("NodeSequence::node: k out of range");
  return nodes_[k - 1];
}

InterpolationSystem::InterpolationSystem(NodeSequence nodes,
                                         summation::BinarySeq a,
                                         int product_truncation)
    : nodes_(std::move(nodes)), a_(std::move(a)), J_(product_truncation) {
  if (J_ < nodes_.size())
    throw DomainError("product truncation J must be >= K");
  if (a_.bit(0) != 0)
    throw DomainError("interpolation sequences use the a_1 = 0 convention");
  const int K = nodes_.size();
  s_.resize(K);
  double acc = 0.0;
  for (int k = 1; k <= K; ++k) {
    acc += a_.bit(k - 1);  // bit(j-1) is a_j
    s_[k - 1] = acc;
  }
  coeff_.resize(K);
  tail_bound_.resize(K);
  const double base = nodes_.base();
  for (int k = 1; k <= K; ++k) {
    if (s_[k - 1] == 0.0) {
      coeff_[k - 1] = SignLog::zero();
      tail_bound_[k - 1] = 0.0;
      continue;
    }
    const double beta_k = std::pow(base, k);
    double log_prod = 0.0;
    for (int j = 1; j <= J_; ++j) {
      if (j == k) continue;
      const double factor = 1.0 - beta_k / std::pow(base, j);
      log_prod += 2.0 * std::log(std::fabs(factor));
    }
    coeff_[k - 1] = SignLog{+1, std::log(s_[k - 1]) - log_prod};
    // factors beyond J are exp(-2 beta_k / beta_j) up to second order
    tail_bound_[k - 1] =
        2.0 * beta_k * std::pow(base, -J_) / (base - 1.0);
  }
}

double InterpolationSystem::partial_sum(int k) const {
  if (k < 1 || k > K()) throw DomainError("partial_sum: k out of range");
  return s_[k - 1];
}

SignLog InterpolationSystem::coefficient(int k) const {
  if (k < 1 || k > K()) throw DomainError("coefficient: k out of range");
  return coeff_[k - 1];
}

double InterpolationSystem::coefficient_tail_bound(int k) const {
  if (k < 1 || k > K()) throw DomainError("tail bound: k out of range");
  return tail_bound_[k - 1];
}

EvalResult InterpolationSystem::value(double z) const {
  const int K = this->K();
  std::vector<SignLog> terms(K);
  double max_term_log = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= K; ++k) {
    if (coeff_[k - 1].sign == 0) {
      terms[k - 1] = SignLog::zero();
      continue;
    }
    double log_prod = 0.0;
    bool zero = false;
    int sign = coeff_[k - 1].sign;
    for (int j = 1; j <= J_; ++j) {
      if (j == k) continue;
      const double factor = 1.0 - z / nodes_.base_pow(j);
      if (factor == 0.0) {
        zero = true;
        break;
      }
      log_prod += 2.0 * std::log(std::fabs(factor));
    }
    terms[k - 1] = zero ? SignLog::zero()
                        : SignLog{sign, coeff_[k - 1].log_abs + log_prod};
    if (terms[k - 1].sign != 0)
      max_term_log = std::max(max_term_log, terms[k - 1].log_abs);
  }
  EvalResult out;
  out.magnitude = signlog_sum(terms.data(), terms.size());
  out.value = out.magnitude.value();

  // Error: truncated product factors (j > J) and the coefficient tails.
  const double prod_tail =
      2.0 * std::fabs(z) * std::pow(nodes_.base(), -J_) /
      (nodes_.base() - 1.0);
  double coeff_tail = 0.0;
  for (int k = 1; k <= K; ++k) coeff_tail += tail_bound_[k - 1];
  const double mag =
      std::isfinite(max_term_log) ? std::exp(std::min(max_term_log, 700.0))
                                  : 0.0;
  out.error_bound = mag * (std::expm1(prod_tail) + coeff_tail);
  return out;
}

std::complex<double> InterpolationSystem::value(std::complex<double> z) const {
  // Scaled accumulation: complex mantissa with a separate log scale.
  std::complex<double> total(0.0, 0.0);
  double total_scale = 0.0;  // total = mantissa * exp(total_scale)
  for (int k = 1; k <= K(); ++k) {
    if (coeff_[k - 1].sign == 0) continue;
    std::complex<double> mant(1.0, 0.0);
    double scale = coeff_[k - 1].log_abs;
    for (int j = 1; j <= J_; ++j) {
      if (j == k) continue;
      const std::complex<double> factor = 1.0 - z / nodes_.base_pow(j);
      mant *= factor * factor;
      const double a = std::abs(mant);
      if (a > 1e100 || (a > 0.0 && a < 1e-100)) {
        scale += std::log(a);
        mant /= a;
      }
    }
    // bring the term onto the running scale
    if (total == std::complex<double>(0.0, 0.0)) {
      total = mant;
      total_scale = scale;
    } else {
      const double shift = scale - total_scale;
      if (shift > 0) {
        total = total * std::exp(-shift) + mant;
        total_scale = scale;
      } else {
        total += mant * std::exp(shift);
      }
    }
  }
  return total * std::exp(total_scale);
}

double InterpolationSystem::derivative_termwise(double z) const {
  double total = 0.0;
  for (int k = 1; k <= K(); ++k) {
    if (coeff_[k - 1].sign == 0) continue;
    double log_prod = 0.0;
    bool zero = false;
    double log_deriv = 0.0;
    for (int j = 1; j <= J_; ++j) {
      if (j == k) continue;
      const double beta_j = nodes_.base_pow(j);
      const double factor = 1.0 - z / beta_j;
      if (factor == 0.0) {
        zero = true;  // squared zero: the term's derivative vanishes too
        break;
      }
      log_prod += 2.0 * std::log(std::fabs(factor));
      log_deriv += -2.0 / (beta_j * factor);
    }
    if (zero) continue;
    total += coeff_[k - 1].sign *
             std::exp(coeff_[k - 1].log_abs + log_prod) * log_deriv;
  }
  return total;
}

double InterpolationSystem::derivative_cauchy(double z, double rho,
                                              double radius_factor,
                                              int max_doublings) const {
  const double R = radius_factor * std::max(rho, std::fabs(z));
  if (!(R > std::fabs(z)))
    throw DomainError("derivative_cauchy: contour must enclose z");
  double prev = 0.0;
  bool have_prev = false;
  int M = 64;
  for (int d = 0; d < max_doublings; ++d, M *= 2) {
    std::complex<double> acc(0.0, 0.0);
    for (int m = 0; m < M; ++m) {
      const double theta = 2.0 * M_PI * m / M;
      const std::complex<double> s = R * std::exp(std::complex<double>(0, theta));
      const std::complex<double> d2 = (s - z) * (s - z);
      acc += value(s) * s / d2;
    }
    const double est = (acc / static_cast<double>(M)).real();
    if (have_prev &&
        std::fabs(est - prev) <= 1e-9 * (1.0 + std::fabs(est)))
      return est;
    prev = est;
    have_prev = true;
  }
  throw QuadratureDivergence(
      "contour derivative failed to settle after node doubling");
}

GrowthReport growth_bound_check(const InterpolationSystem& sys,
                                const std::vector<double>& rhos) {
  GrowthReport rep;
  std::vector<double> sorted = rhos;
  std::sort(sorted.begin(), sorted.end());
  bool fitted = false;
  for (double rho : sorted) {
    const EvalResult v = sys.value(-rho);
    const double measured =
        v.magnitude.sign == 0 ? -std::numeric_limits<double>::infinity()
                              : v.magnitude.log_abs;
    const double envelope =
        sys.nodes().growth_index(rho) * std::log(4.0 * rho * rho);
    if (!fitted) {
      rep.fitted_log_c = measured - envelope;
      fitted = true;
    }
    GrowthRecord rec;
    rec.rho = rho;
    rec.measured_log = measured;
    rec.bound_log = rep.fitted_log_c + envelope;
    rec.ok = measured <= rec.bound_log + 1e-9;
    rep.all_ok = rep.all_ok && rec.ok;
    rep.records.push_back(rec);
  }
  return rep;
}

CoefficientDecayReport coefficient_decay_check(const InterpolationSystem& sys) {
  CoefficientDecayReport rep;
  const double base = sys.nodes().base();
  bool fitted = false;
  for (int k = 1; k <= sys.K(); ++k) {
    const double s_k = sys.partial_sum(k);
    const SignLog b = sys.coefficient(k);
    const double abs_b = b.sign == 0 ? 0.0 : std::exp(b.log_abs);
    CoefficientDecayRecord rec;
    rec.k = k;
    rec.abs_coeff = abs_b;
    if (s_k == 0.0) {
      rec.bound = 0.0;
      rec.ok = abs_b == 0.0;
    } else {
      const double shape = s_k * std::pow(base, -2.0 * k);
      if (!fitted) {
        rep.fitted_c = abs_b / shape;
        fitted = true;
      }
      rec.bound = rep.fitted_c * shape;
      rec.ok = abs_b <= rec.bound * (1.0 + 1e-9);
    }
    rep.all_ok = rep.all_ok && rec.ok;
    rep.records.push_back(rec);
  }
  return rep;
}

IncrementReport increment_check(const InterpolationSystem& sys,
                                quad::QuadConfig cfg) {
  IncrementReport rep;
  for (int k = 1; k + 1 <= sys.K(); ++k) {
    IncrementRecord rec;
    rec.k = k;
    rec.bit = sys.sequence().bit(k);  // a_{k+1}
    rec.by_difference =
        sys.value(sys.nodes().node(k + 1)).value -
        sys.value(sys.nodes().node(k)).value;
    const double a_lo = 1.0 / sys.nodes().node(k + 1);
    const double a_hi = 1.0 / sys.nodes().node(k);
    auto f1 = [&sys](double t) {
      return sys.derivative_termwise(1.0 / t) / (t * t);
    };
    rec.by_quadrature =
        quad::integrate_kernel(f1, a_lo, a_hi, {}, cfg, "f_1 window").value;
    rep.max_route_gap =
        std::max(rep.max_route_gap,
                 std::fabs(rec.by_difference - rec.by_quadrature));
    rep.max_bit_gap = std::max(
        rep.max_bit_gap, std::fabs(rec.by_difference - rec.bit));
    rep.records.push_back(rec);
  }
  return rep;
}

LaurentFinitePart laurent_finite_part(const LaurentData& L, double x) {
  if (!(x > 0.0) || !(x <= 1.0))
    throw DomainError("laurent_finite_part: x outside (0,1]");
  LaurentFinitePart out;
  for (const auto& [n, c] : L.coeffs) {
    if (c == 0.0) continue;
    if (n == -1)
      out.log_coefficient += c;
    else
      out.value += c * std::pow(x, n + 1) / (n + 1);
  }
  return out;
}

WindowAgreementReport anchored_agreement_check(const FunctionHandle& f1,
                                               const FunctionHandle& f2,
                                               const NodeSequence& nodes,
                                               const AnchoredAntiderivative& P,
                                               double tol,
                                               quad::QuadConfig cfg) {
  WindowAgreementReport rep;
  rep.windows_match = true;
  for (int n = 1; n + 1 <= nodes.size(); ++n) {
    const double lo = nodes.node(n), hi = nodes.node(n + 1);
    const double i1 = quad::integrate(f1, lo, hi, cfg).value;
    const double i2 = quad::integrate(f2, lo, hi, cfg).value;
    rep.windows_f1.push_back(i1);
    rep.windows_f2.push_back(i2);
    if (std::fabs(i1 - i2) > tol * (1.0 + std::fabs(i1) + std::fabs(i2)))
      rep.windows_match = false;
  }
  rep.applicable = rep.windows_match;
  if (rep.applicable) {
    rep.anchored_f1 = P.evaluate(f1, nodes.node(1));
    rep.anchored_f2 = P.evaluate(f2, nodes.node(1));
    rep.anchored_match = std::fabs(rep.anchored_f1 - rep.anchored_f2) <=
                         tol * (1.0 + std::fabs(rep.anchored_f1));
  }
  return rep;
}

}  // namespace analytic
}  // namespace hpf
