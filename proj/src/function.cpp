#include "hpf/function.hpp"

#include <algorithm>
#include <cmath>

namespace hpf {

const FunctionHandle::Eval* FunctionHandle::exact_derivative(int order) const {
  if (order <= 0) return nullptr;
  std::lock_guard<std::mutex> lock(impl_->cache_mutex);
  auto it = impl_->deriv_cache.find(order);
  if (it != impl_->deriv_cache.end()) return &it->second;
  if (!impl_->deriv_gen) return nullptr;
  std::optional<Eval> gen = impl_->deriv_gen(order);
  if (!gen) return nullptr;
  auto ins = impl_->deriv_cache.emplace(order, std::move(*gen));
  return &ins.first->second;
}

namespace {

// Central difference of a callable, Richardson-extrapolated over three step
// halvings. Returns value and a spread-based error estimate.
DerivResult richardson_central(const std::function<double(double)>& f,
                               double x, double h0) {
  double estimates[3];
  for (int level = 0; level < 3; ++level) {
    const double h = h0 / (1 << level);
    estimates[level] = (f(x + h) - f(x - h)) / (2.0 * h);
  }
  // One Richardson sweep (central difference has even error powers).
  const double r1 = (4.0 * estimates[1] - estimates[0]) / 3.0;
  const double r2 = (4.0 * estimates[2] - estimates[1]) / 3.0;
  const double value = (16.0 * r2 - r1) / 15.0;
  DerivResult out;
  out.value = value;
  out.error_estimate = std::fabs(r2 - r1) + 1e-12 * std::fabs(value);
  out.exact = false;
  return out;
}

}  // namespace

DerivResult eval_deriv(const FunctionHandle& f, int order, double x,
                       bool allow_numeric) {
  if (!(x > 0.0) || !(x <= 1.0))
    throw DomainError("eval_deriv: x=" + std::to_string(x) +
                      " outside (0,1]");
  if (order < 0) throw DomainError("eval_deriv: negative order");
  if (order == 0) return {f(x), 0.0, true};

  if (const auto* exact = f.exact_derivative(order))
    return {(*exact)(x), 0.0, true};

  if (!allow_numeric || !f.smooth_to(order))
    throw OrderUnavailable("derivative of order " + std::to_string(order) +
                           " unavailable for " + f.label());

  // Highest order with an exact evaluator below the request; finite
  // differences bridge the remaining orders.
  int base = 0;
  for (int m = order - 1; m >= 1; --m) {
    if (f.exact_derivative(m)) {
      base = m;
      break;
    }
  }
  std::function<double(double)> g;
  if (base == 0) {
    g = [f](double t) { return f(t); };
  } else {
    const auto* exact = f.exact_derivative(base);
    g = *exact;
  }
  int remaining = order - base;
  // Step respects the singular endpoint: smaller steps closer to 0.
  auto step_at = [](double t) { return std::max(1e-5, 1e-3 * t); };
  std::function<double(double)> cur = g;
  for (int level = 1; level < remaining; ++level) {
    auto prev = cur;
    cur = [prev, step_at](double t) {
      const double h = step_at(t) * 0.5;
      return (prev(t + h) - prev(t - h)) / (2.0 * h);
    };
  }
  double h = step_at(x);
  // Keep the stencil's lower reach away from the singular endpoint. Above 1
  // the closures stay evaluable; the stencil may probe up to ~order*h past x.
  if (x - 2.0 * h * remaining <= 0.0) h = 0.4 * x / remaining;
  return richardson_central(cur, x, h);
}

bool germ_equal(const FunctionHandle& f, const FunctionHandle& g, double a,
                int grid, Tolerance tol) {
  if (!(a > 0.0) || !(a <= 1.0))
    throw DomainError("germ_equal: a outside (0,1]");
  if (grid < 2) throw DomainError("germ_equal: grid must be >= 2");
  // Geometric grid from a down to ~1e-9 * a probes the approach to 0.
  const double ratio = std::pow(1e-9, 1.0 / (grid - 1));
  double x = a;
  for (int i = 0; i < grid; ++i, x *= ratio)
    if (!tol.close(f(x), g(x))) return false;
  return true;
}

// ---------------------------------------------------------------------------
// GluingProfile

GluingProfile::GluingProfile(std::vector<Core> cores) : cores_(std::move(cores)) {
  std::sort(cores_.begin(), cores_.end(),
            [](const Core& a, const Core& b) { return a.lo < b.lo; });
  for (const Core& c : cores_) {
    if (!(c.hi >= c.lo) || c.lo < 0.0 || c.lo_width < 0.0 || c.hi_width < 0.0)
      throw DomainError("GluingProfile: malformed core interval");
  }
  for (std::size_t i = 0; i + 1 < cores_.size(); ++i) {
    if (cores_[i].hi + cores_[i].hi_width >
        cores_[i + 1].lo - cores_[i + 1].lo_width + 1e-18)
      throw DomainError("GluingProfile: cores overlap after inflation");
  }
}

GluingProfile GluingProfile::constant_one() {
  GluingProfile p;
  p.always_one_ = true;
  return p;
}

double GluingProfile::operator()(double x) const {
  if (always_one_) return 1.0;
  // First core with lo - lo_width above x bounds the search.
  auto it = std::upper_bound(
      cores_.begin(), cores_.end(), x,
      [](double v, const Core& c) { return v < c.lo - c.lo_width; });
  if (it == cores_.begin()) return 0.0;
  const Core& c = *(it - 1);
  if (x <= c.hi) {
    if (x >= c.lo) return 1.0;
    // x in the rise band [lo - lo_width, lo)
    if (c.lo_width == 0.0) return 1.0;
    return smooth_step((x - (c.lo - c.lo_width)) / c.lo_width);
  }
  if (c.hi_width > 0.0 && x < c.hi + c.hi_width)
    return smooth_step(((c.hi + c.hi_width) - x) / c.hi_width);
  return 0.0;
}

std::vector<double> GluingProfile::edges(double lo, double hi) const {
  std::vector<double> out;
  if (always_one_) return out;
  for (const Core& c : cores_) {
    const double pts[4] = {c.lo - c.lo_width, c.lo, c.hi, c.hi + c.hi_width};
    for (double p : pts)
      if (p > lo && p < hi) out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

FunctionHandle GluingProfile::as_handle(std::string label) const {
  GluingProfile copy = *this;
  FunctionHandle h(
      std::move(label), [copy](double x) { return copy(x); },
      FunctionHandle::kSmoothInfinity);
  GluingProfile for_bp = *this;
  return h.with_breakpoints(
      [for_bp](double lo, double hi, std::size_t) { return for_bp.edges(lo, hi); });
}

FunctionHandle modulate(const FunctionHandle& f, const GluingProfile& h,
                        Tolerance tol) {
  // Spot-check the bound ||h||_inf <= 1 on core/band edges and a coarse grid.
  std::vector<double> probes = h.edges(0.0, 1.0);
  for (int i = 0; i <= 64; ++i)
    probes.push_back(std::pow(2.0, -28.0 * i / 64.0));
  for (double x : probes) {
    if (!(x > 0.0) || x > 1.0) continue;
    const double v = h(x);
    if (std::fabs(v) > 1.0 + tol.abs)
      throw ProfileOutOfRange("profile exceeds 1 at x=" + std::to_string(x));
  }
  GluingProfile prof = h;
  FunctionHandle base = f;
  FunctionHandle out(
      "(" + f.label() + ")*profile",
      [base, prof](double x) { return base(x) * prof(x); },
      f.smoothness_order());
  return out.with_breakpoints([base, prof](double lo, double hi,
                                           std::size_t budget) {
    std::vector<double> e = prof.edges(lo, hi);
    std::vector<double> fb = base.breakpoints(lo, hi, budget);
    e.insert(e.end(), fb.begin(), fb.end());
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end()), e.end());
    return e;
  });
}

// ---------------------------------------------------------------------------
// Combinators

namespace {

FunctionHandle wrap_unary(const FunctionHandle& f, const char* tag,
                          std::function<double(double)> map) {
  FunctionHandle base = f;
  FunctionHandle out(std::string(tag) + "(" + f.label() + ")",
                     [base, map](double x) { return map(base(x)); }, 0);
  if (f.has_breakpoints()) {
    out = out.with_breakpoints([base](double lo, double hi, std::size_t b) {
      return base.breakpoints(lo, hi, b);
    });
  }
  return out;
}

}  // namespace

FunctionHandle fn_abs(const FunctionHandle& f) {
  return wrap_unary(f, "abs", [](double v) { return std::fabs(v); });
}

FunctionHandle fn_pos_part(const FunctionHandle& f) {
  return wrap_unary(f, "pos", [](double v) { return v > 0.0 ? v : 0.0; });
}

FunctionHandle fn_negate(const FunctionHandle& f) {
  FunctionHandle base = f;
  FunctionHandle out("-(" + f.label() + ")",
                     [base](double x) { return -base(x); },
                     f.smoothness_order());
  auto gen = [base](int order) -> std::optional<FunctionHandle::Eval> {
    const auto* d = base.exact_derivative(order);
    if (!d) return std::nullopt;
    auto dd = *d;
    return FunctionHandle::Eval([dd](double x) { return -dd(x); });
  };
  out = out.with_derivative_generator(gen, f.smoothness_order());
  if (f.has_breakpoints())
    out = out.with_breakpoints([base](double lo, double hi, std::size_t b) {
      return base.breakpoints(lo, hi, b);
    });
  return out;
}

FunctionHandle fn_scale(const FunctionHandle& f, double c) {
  FunctionHandle base = f;
  FunctionHandle out(std::to_string(c) + "*(" + f.label() + ")",
                     [base, c](double x) { return c * base(x); },
                     f.smoothness_order());
  auto gen = [base, c](int order) -> std::optional<FunctionHandle::Eval> {
    const auto* d = base.exact_derivative(order);
    if (!d) return std::nullopt;
    auto dd = *d;
    return FunctionHandle::Eval([dd, c](double x) { return c * dd(x); });
  };
  out = out.with_derivative_generator(gen, f.smoothness_order());
  if (f.has_breakpoints())
    out = out.with_breakpoints([base](double lo, double hi, std::size_t b) {
      return base.breakpoints(lo, hi, b);
    });
  return out;
}

FunctionHandle fn_sum(const FunctionHandle& f, const FunctionHandle& g,
                      double a, double b) {
  FunctionHandle lhs = f, rhs = g;
  const int smooth =
      (f.smoothness_order() == FunctionHandle::kSmoothInfinity)
          ? g.smoothness_order()
          : (g.smoothness_order() == FunctionHandle::kSmoothInfinity
                 ? f.smoothness_order()
                 : std::min(f.smoothness_order(), g.smoothness_order()));
  FunctionHandle out(
      f.label() + "+" + g.label(),
      [lhs, rhs, a, b](double x) { return a * lhs(x) + b * rhs(x); }, smooth);
  auto gen = [lhs, rhs, a, b](int order) -> std::optional<FunctionHandle::Eval> {
    const auto* df = lhs.exact_derivative(order);
    const auto* dg = rhs.exact_derivative(order);
    if (!df || !dg) return std::nullopt;
    auto dfv = *df;
    auto dgv = *dg;
    return FunctionHandle::Eval(
        [dfv, dgv, a, b](double x) { return a * dfv(x) + b * dgv(x); });
  };
  out = out.with_derivative_generator(gen, smooth);
  if (f.has_breakpoints() || g.has_breakpoints()) {
    out = out.with_breakpoints(
        [lhs, rhs](double lo, double hi, std::size_t budget) {
          std::vector<double> e = lhs.breakpoints(lo, hi, budget);
          std::vector<double> e2 = rhs.breakpoints(lo, hi, budget);
          e.insert(e.end(), e2.begin(), e2.end());
          std::sort(e.begin(), e.end());
          e.erase(std::unique(e.begin(), e.end()), e.end());
          return e;
        });
  }
  return out;
}

FunctionHandle fn_product(const FunctionHandle& f, const FunctionHandle& g) {
  FunctionHandle lhs = f, rhs = g;
  FunctionHandle out("(" + f.label() + ")*(" + g.label() + ")",
                     [lhs, rhs](double x) { return lhs(x) * rhs(x); }, 0);
  if (f.has_breakpoints() || g.has_breakpoints()) {
    out = out.with_breakpoints(
        [lhs, rhs](double lo, double hi, std::size_t budget) {
          std::vector<double> e = lhs.breakpoints(lo, hi, budget);
          std::vector<double> e2 = rhs.breakpoints(lo, hi, budget);
          e.insert(e.end(), e2.begin(), e2.end());
          std::sort(e.begin(), e.end());
          e.erase(std::unique(e.begin(), e.end()), e.end());
          return e;
        });
  }
  return out;
}

FunctionHandle fn_from(std::string label, FunctionHandle::Eval eval,
                       int smoothness) {
  return FunctionHandle(std::move(label), std::move(eval), smoothness);
}

}  // namespace hpf
