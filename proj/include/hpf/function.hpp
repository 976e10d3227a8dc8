#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "hpf/common.hpp"

namespace hpf {

// An evaluable real function on (0,1] (the evaluator itself may be defined on
// a wider range, e.g. the node-side checks work on [1,inf)). Optionally carries
// exact derivatives and a list of natural subdivision points (zeros of an
// oscillating factor, transition edges of a profile) that quadrature uses to
// align panels. Immutable and shareable across threads.
class FunctionHandle {
 public:
  using Eval = std::function<double(double)>;
  // Returns an evaluator for the exact derivative of the given order, or
  // nullopt if that order is not available in closed form.
  using DerivGen = std::function<std::optional<Eval>(int order)>;
  // Natural subdivision points inside [lo, hi], at most `budget` of them.
  // Empty result means "no structure in this window".
  using Breakpoints =
      std::function<std::vector<double>(double lo, double hi, std::size_t budget)>;

  static constexpr int kSmoothInfinity = -1;

  FunctionHandle(std::string label, Eval eval, int smoothness_order = 0)
      : impl_(std::make_shared<Impl>()) {
    impl_->label = std::move(label);
    impl_->eval = std::move(eval);
    impl_->smoothness = smoothness_order;
  }

  double operator()(double x) const { return impl_->eval(x); }

  const std::string& label() const { return impl_->label; }

  // kSmoothInfinity means C-infinity.
  int smoothness_order() const { return impl_->smoothness; }
  bool smooth_to(int order) const {
    return impl_->smoothness == kSmoothInfinity || order <= impl_->smoothness;
  }

  FunctionHandle with_derivatives(std::vector<Eval> derivs,
                                  int smoothness_order) const {
    FunctionHandle out = clone();
    auto list = std::make_shared<std::vector<Eval>>(std::move(derivs));
    out.impl_->deriv_gen = [list](int order) -> std::optional<Eval> {
      if (order >= 1 && order <= static_cast<int>(list->size()))
        return (*list)[order - 1];
      return std::nullopt;
    };
    out.impl_->smoothness = smoothness_order;
    return out;
  }

  FunctionHandle with_derivative_generator(DerivGen gen,
                                           int smoothness_order) const {
    FunctionHandle out = clone();
    out.impl_->deriv_gen = std::move(gen);
    out.impl_->smoothness = smoothness_order;
    return out;
  }

  FunctionHandle with_breakpoints(Breakpoints bp) const {
    FunctionHandle out = clone();
    out.impl_->breakpoints = std::move(bp);
    return out;
  }

  FunctionHandle with_label(std::string label) const {
    FunctionHandle out = clone();
    out.impl_->label = std::move(label);
    return out;
  }

  bool has_exact_derivative(int order) const {
    if (order == 0) return true;
    return exact_derivative(order) != nullptr;
  }

  // Exact derivative evaluator of the given order, nullptr if unavailable.
  // Generated evaluators are cached; the handle stays logically immutable.
  const Eval* exact_derivative(int order) const;

  bool has_breakpoints() const { return static_cast<bool>(impl_->breakpoints); }
  std::vector<double> breakpoints(double lo, double hi,
                                  std::size_t budget) const {
    if (!impl_->breakpoints) return {};
    return impl_->breakpoints(lo, hi, budget);
  }

 private:
  struct Impl {
    std::string label;
    Eval eval;
    int smoothness = 0;
    DerivGen deriv_gen;
    Breakpoints breakpoints;
    mutable std::mutex cache_mutex;
    mutable std::map<int, Eval> deriv_cache;
  };

  FunctionHandle clone() const {
    FunctionHandle out;
    out.impl_ = std::make_shared<Impl>();
    out.impl_->label = impl_->label;
    out.impl_->eval = impl_->eval;
    out.impl_->smoothness = impl_->smoothness;
    out.impl_->deriv_gen = impl_->deriv_gen;
    out.impl_->breakpoints = impl_->breakpoints;
    return out;
  }

  FunctionHandle() = default;
  std::shared_ptr<Impl> impl_;
};

struct DerivResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool exact = false;
};

// Derivative of f at x in (0,1]. Uses the exact derivative when the handle
// carries one; otherwise Richardson-extrapolated central differences with
// step h = max(1e-5, 1e-3 * x), shrunk so the stencil stays inside (0,1].
DerivResult eval_deriv(const FunctionHandle& f, int order, double x,
                       bool allow_numeric = true);

// Sampled test of the germ relation: true iff |f - g| is within tolerance on
// a geometric grid in (0, a]. A `true` is evidence, a `false` is conclusive
// for the sampled points.
bool germ_equal(const FunctionHandle& f, const FunctionHandle& g, double a,
                int grid, Tolerance tol = {});

// ---------------------------------------------------------------------------
// Gluing profiles: C-infinity functions with values in [0,1] that are 1 on
// given core intervals and 0 outside the cores inflated by their transition
// widths.

class GluingProfile {
 public:
  struct Core {
    double lo = 0.0;        // core is [lo, hi]; lo == 0 means "down to 0+"
    double hi = 0.0;
    double lo_width = 0.0;  // rise band [lo - lo_width, lo]
    double hi_width = 0.0;  // fall band [hi, hi + hi_width]
  };

  GluingProfile() = default;
  explicit GluingProfile(std::vector<Core> cores);

  double operator()(double x) const;
  const std::vector<Core>& cores() const { return cores_; }
  bool empty() const { return cores_.empty(); }

  // All band and core edges inside [lo, hi], for panel alignment.
  std::vector<double> edges(double lo, double hi) const;

  FunctionHandle as_handle(std::string label = "profile") const;

  static GluingProfile constant_one();

 private:
  std::vector<Core> cores_;  // sorted by lo ascending, disjoint with bands
  bool always_one_ = false;
};

// h*f for a profile h with ||h||_inf <= 1. The result keeps f's derivative
// structure out (products with profiles are evaluated pointwise only) but
// merges breakpoints so quadrature stays aligned.
FunctionHandle modulate(const FunctionHandle& f, const GluingProfile& h,
                        Tolerance tol = {});

// Pointwise combinators (plumbing used throughout the library and the tests).
FunctionHandle fn_abs(const FunctionHandle& f);
FunctionHandle fn_pos_part(const FunctionHandle& f);
FunctionHandle fn_scale(const FunctionHandle& f, double c);
FunctionHandle fn_sum(const FunctionHandle& f, const FunctionHandle& g,
                      double a = 1.0, double b = 1.0);
FunctionHandle fn_product(const FunctionHandle& f, const FunctionHandle& g);
FunctionHandle fn_negate(const FunctionHandle& f);
FunctionHandle fn_from(std::string label, FunctionHandle::Eval eval,
                       int smoothness = 0);

}  // namespace hpf
