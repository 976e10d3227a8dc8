#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace hpf {

// Default absolute + relative tolerance used by every check unless a caller
// overrides it. The CLI maps the HPF_TOLERANCE environment variable onto this.
struct Tolerance {
  double abs = 1e-9;
  double rel = 1e-9;

  bool close(double a, double b) const {
    const double diff = std::fabs(a - b);
    return diff <= abs + rel * std::max(std::fabs(a), std::fabs(b));
  }
};

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(what) {}
};

// Requested derivative order is not available and numeric fallback is off.
class OrderUnavailable : public Error {
 public:
  explicit OrderUnavailable(const std::string& what) : Error(what) {}
};

class ProfileOutOfRange : public Error {
 public:
  explicit ProfileOutOfRange(const std::string& what) : Error(what) {}
};

class NonFiniteSample : public Error {
 public:
  NonFiniteSample(const std::string& label, double x)
      : Error("non-finite sample of " + label + " at x=" + std::to_string(x)),
        x_(x) {}
  double where() const { return x_; }

 private:
  double x_;
};

class MaxSubdivisions : public Error {
 public:
  explicit MaxSubdivisions(const std::string& what) : Error(what) {}
};

// A factor alpha + j vanished in a coefficient product.
class PoleError : public Error {
 public:
  PoleError(double alpha, int j)
      : Error("coefficient pole: alpha + j = 0 at j=" + std::to_string(j) +
              " (alpha=" + std::to_string(alpha) + ")"),
        j_(j) {}
  int index() const { return j_; }

 private:
  int j_;
};

class PreconditionFailed : public Error {
 public:
  explicit PreconditionFailed(const std::string& what) : Error(what) {}
};

class NotDivergentPositive : public PreconditionFailed {
 public:
  explicit NotDivergentPositive(const std::string& what)
      : PreconditionFailed(what) {}
};

class LevelSetNotFound : public Error {
 public:
  LevelSetNotFound(const std::string& what, int level_reached)
      : Error(what), level_(level_reached) {}
  int level_reached() const { return level_; }

 private:
  int level_;
};

class CriterionFails : public Error {
 public:
  explicit CriterionFails(const std::string& what) : Error(what) {}
};

class RangeExhausted : public Error {
 public:
  RangeExhausted(const std::string& what, int realized)
      : Error(what), realized_(realized) {}
  int realized() const { return realized_; }

 private:
  int realized_;
};

class PartitionTooShallow : public Error {
 public:
  explicit PartitionTooShallow(const std::string& what) : Error(what) {}
};

class NotConstant : public Error {
 public:
  NotConstant(const std::string& what, double deviation)
      : Error(what), deviation_(deviation) {}
  double deviation() const { return deviation_; }

 private:
  double deviation_;
};

class BaseTooSmall : public Error {
 public:
  explicit BaseTooSmall(const std::string& what) : Error(what) {}
};

class QuadratureDivergence : public Error {
 public:
  explicit QuadratureDivergence(const std::string& what) : Error(what) {}
};

// Real number stored as sign and log-magnitude, for products whose raw value
// would overflow a double. sign == 0 encodes an exact zero.
struct SignLog {
  int sign = 0;
  double log_abs = -std::numeric_limits<double>::infinity();

  static SignLog from(double v) {
    if (v == 0.0) return {};
    return {v > 0 ? 1 : -1, std::log(std::fabs(v))};
  }
  static SignLog zero() { return {}; }

  double value() const {
    if (sign == 0) return 0.0;
    return sign * std::exp(log_abs);
  }
  bool representable() const {
    return sign == 0 || std::fabs(log_abs) < 700.0;
  }
  SignLog operator*(const SignLog& o) const {
    if (sign == 0 || o.sign == 0) return {};
    return {sign * o.sign, log_abs + o.log_abs};
  }
  SignLog& operator*=(const SignLog& o) { return *this = *this * o; }
};

// Sum of sign/log values, done in log space relative to the largest term.
inline SignLog signlog_sum(const SignLog* terms, std::size_t n) {
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    if (terms[i].sign != 0 && terms[i].log_abs > peak) peak = terms[i].log_abs;
  if (!std::isfinite(peak)) return SignLog::zero();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (terms[i].sign != 0)
      acc += terms[i].sign * std::exp(terms[i].log_abs - peak);
  if (acc == 0.0) return SignLog::zero();
  return {acc > 0 ? 1 : -1, peak + std::log(std::fabs(acc))};
}

// C-infinity step: 0 for t <= 0, 1 for t >= 1, strictly increasing between,
// with all derivatives vanishing at both ends.
inline double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

}  // namespace hpf
