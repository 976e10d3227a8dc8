#include "hpf/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace hpf {
namespace quad {

namespace {

// 15-point Kronrod nodes with the embedded 7-point Gauss rule (QUADPACK dqk15
// constants).
const double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
const double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
const double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double lo, hi, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel evaluate_panel(const std::function<double(double)>& f, double lo,
                     double hi, const std::string& label) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  auto sample = [&](double x) {
    const double v = f(x);
    if (!std::isfinite(v)) throw NonFiniteSample(label, x);
    return v;
  };
  const double fc = sample(center);
  double resg = fc * kWg[3];
  double resk = fc * kWgk[7];
  double resabs = std::fabs(resk);
  double fv1[7], fv2[7];
  for (int j = 0; j < 7; ++j) {
    const double absc = half * kXgk[j];
    fv1[j] = sample(center - absc);
    fv2[j] = sample(center + absc);
    const double fsum = fv1[j] + fv2[j];
    if (j % 2 == 1) resg += kWg[j / 2] * fsum;
    resk += kWgk[j] * fsum;
    resabs += kWgk[j] * (std::fabs(fv1[j]) + std::fabs(fv2[j]));
  }
  const double mean = resk * 0.5;
  double resasc = kWgk[7] * std::fabs(fc - mean);
  for (int j = 0; j < 7; ++j)
    resasc += kWgk[j] *
              (std::fabs(fv1[j] - mean) + std::fabs(fv2[j] - mean));
  resasc *= half;
  resabs *= half;
  double err = std::fabs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double eps50 = 50.0 * std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / eps50)
    err = std::max(err, eps50 * resabs);
  return {lo, hi, resk * half, err};
}

}  // namespace

std::pair<double, double> kronrod15(const std::function<double(double)>& f,
                                    double lo, double hi) {
  const Panel p = evaluate_panel(f, lo, hi, "integrand");
  return {p.value, p.error};
}

QuadResult integrate_kernel(const std::function<double(double)>& f, double lo,
                            double hi, const std::vector<double>& inner_edges,
                            QuadConfig cfg, const std::string& label) {
  if (!(lo > 0.0) || !(hi >= lo))
    throw DomainError("integrate: need 0 < lo <= hi, got [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
  if (lo == hi) return {0.0, 0.0, 0, true};

  std::vector<double> edges;
  edges.push_back(lo);
  for (double e : inner_edges)
    if (e > lo && e < hi) edges.push_back(e);
  edges.push_back(hi);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::priority_queue<Panel> panels;
  double total = 0.0, total_err = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    Panel p = evaluate_panel(f, edges[i], edges[i + 1], label);
    total += p.value;
    total_err += p.error;
    panels.push(p);
  }

  int splits = 0;
  auto tolerance = [&] {
    return std::max(cfg.abs_tol, cfg.rel_tol * std::fabs(total));
  };
  while (total_err > tolerance() && splits < cfg.max_subdivisions) {
    Panel worst = panels.top();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (mid <= worst.lo || mid >= worst.hi) break;  // panel at double limit
    panels.pop();
    Panel left = evaluate_panel(f, worst.lo, mid, label);
    Panel right = evaluate_panel(f, mid, worst.hi, label);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
    ++splits;
  }

  // Recompute the totals from the surviving panels in position order; the
  // incremental updates above accumulate cancellation over many splits.
  std::vector<Panel> flat;
  flat.reserve(panels.size());
  while (!panels.empty()) {
    flat.push_back(panels.top());
    panels.pop();
  }
  std::sort(flat.begin(), flat.end(),
            [](const Panel& a, const Panel& b) { return a.lo < b.lo; });
  total = 0.0;
  total_err = 0.0;
  for (const Panel& p : flat) {
    total += p.value;
    total_err += p.error;
  }

  QuadResult out;
  out.value = total;
  out.abs_error_estimate = total_err;
  out.subdivisions = splits;
  out.converged = total_err <= tolerance();
  if (!out.converged && splits >= cfg.max_subdivisions)
    throw MaxSubdivisions("integrate(" + label + "): error " +
                          std::to_string(total_err) + " above tolerance after " +
                          std::to_string(splits) + " subdivisions");
  return out;
}

QuadResult integrate(const FunctionHandle& f, double lo, double hi,
                     QuadConfig cfg) {
  std::vector<double> edges;
  if (f.has_breakpoints()) edges = f.breakpoints(lo, hi, cfg.breakpoint_budget);
  return integrate_kernel([&f](double x) { return f(x); }, lo, hi, edges, cfg,
                          f.label());
}

namespace {

// Estimate of how many structural breakpoints the handle would emit inside
// [lo, hi]; used to stop the improper schedule before a piece becomes
// unresolvable within the budget.
std::size_t breakpoint_count(const FunctionHandle& f, double lo, double hi,
                             std::size_t budget) {
  if (!f.has_breakpoints()) return 0;
  return f.breakpoints(lo, hi, budget + 1).size();
}

}  // namespace

ImproperVerdict improper_integral(const FunctionHandle& f, QuadConfig cfg,
                                  double hi) {
  if (!(hi > 0.0)) throw DomainError("improper_integral: hi must be positive");

  ImproperVerdict out;
  QuadConfig piece_cfg = cfg;
  piece_cfg.abs_tol = std::min(cfg.abs_tol, 1e-12);
  piece_cfg.rel_tol = std::min(cfg.rel_tol, 1e-12);

  int n_lo = cfg.improper_n_lo;
  while (std::ldexp(1.0, -n_lo) >= hi) ++n_lo;  // first eps strictly below hi

  std::vector<double> increments;  // d_n = integral over [eps_{n+1}, eps_n]
  double eps = std::ldexp(1.0, -n_lo);
  double partial = integrate(f, eps, hi, piece_cfg).value;
  out.epsilon_trace.emplace_back(eps, partial);

  const int ratio_window = 6;
  for (int n = n_lo; n < cfg.improper_n_hi; ++n) {
    const double next_eps = std::ldexp(1.0, -(n + 1));
    if (breakpoint_count(f, next_eps, eps, 1 << 16) > (1u << 16)) break;
    const double d = integrate(f, next_eps, eps, piece_cfg).value;
    increments.push_back(d);
    partial += d;
    eps = next_eps;
    out.epsilon_trace.emplace_back(eps, partial);

    if (increments.size() < static_cast<std::size_t>(ratio_window)) continue;

    // Inspect the last `ratio_window` increments.
    bool all_small = true;
    for (int i = 0; i < ratio_window; ++i) {
      const double di = increments[increments.size() - 1 - i];
      if (std::fabs(di) > 0.25 * cfg.abs_tol) all_small = false;
    }
    if (all_small) {
      out.kind = ImproperKind::Convergent;
      out.value = partial;
      out.abs_error_estimate = 2.0 * cfg.abs_tol;
      return out;
    }

    std::vector<double> ratios;
    for (int i = ratio_window - 1; i >= 1; --i) {
      const double a = increments[increments.size() - 1 - i];
      const double b = increments[increments.size() - i];
      if (a == 0.0) {
        ratios.clear();
        break;
      }
      ratios.push_back(b / a);
    }
    if (ratios.empty()) continue;
    double rbar = 0.0;
    double rmin = ratios.front(), rmax = ratios.front();
    for (double r : ratios) {
      rbar += r;
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
    }
    rbar /= static_cast<double>(ratios.size());
    const double spread = rmax - rmin;
    const double d_last = increments.back();

    if (spread < 0.2 && std::fabs(rbar) < 0.97 && rbar > -0.97) {
      // Geometric pattern: extrapolate the remaining mass.
      const double remaining = d_last * rbar / (1.0 - rbar);
      const double err = std::fabs(remaining) * (spread + 0.05) /
                             std::max(1e-3, 1.0 - std::fabs(rbar)) +
                         1e-14 * std::fabs(partial);
      if (err <= std::max(cfg.abs_tol,
                          cfg.rel_tol * std::fabs(partial + remaining)) ||
          n == cfg.improper_n_hi - 1) {
        out.kind = ImproperKind::Convergent;
        out.value = partial + remaining;
        out.abs_error_estimate = err;
        return out;
      }
      continue;  // pattern is geometric but not settled: refine further
    }

    bool monotone_same_sign = true;
    for (int i = 0; i < ratio_window; ++i) {
      const double di = increments[increments.size() - 1 - i];
      if (di * d_last <= 0.0) monotone_same_sign = false;
    }
    if (monotone_same_sign && (rbar >= 0.97 || std::fabs(partial) > cfg.divergence_bound)) {
      // Non-decaying one-signed increments: the extrapolated trace passes any
      // bound, so the limit does not exist as a finite number.
      out.kind = d_last > 0 ? ImproperKind::DivergentPlus
                            : ImproperKind::DivergentMinus;
      return out;
    }
  }

  // Schedule exhausted without a stable pattern. One last attempt: if the
  // remaining increments are negligible, accept the partial sum.
  if (!increments.empty() &&
      std::fabs(increments.back()) <= std::max(cfg.abs_tol, 1e-12)) {
    out.kind = ImproperKind::Convergent;
    out.value = partial;
    out.abs_error_estimate =
        std::fabs(increments.back()) * static_cast<double>(cfg.improper_n_hi);
    return out;
  }
  out.kind = ImproperKind::Oscillatory;
  return out;
}

L1Verdict l1_classify(const FunctionHandle& f, QuadConfig cfg) {
  const ImproperVerdict v = improper_integral(fn_abs(f), cfg);
  switch (v.kind) {
    case ImproperKind::Convergent:
      return L1Verdict::L1;
    case ImproperKind::DivergentPlus:
      return L1Verdict::NotL1;
    default:
      return L1Verdict::Unknown;
  }
}

const char* to_string(ImproperKind k) {
  switch (k) {
    case ImproperKind::Convergent:
      return "convergent";
    case ImproperKind::DivergentPlus:
      return "divergent+";
    case ImproperKind::DivergentMinus:
      return "divergent-";
    default:
      return "oscillatory/unknown";
  }
}

const char* to_string(L1Verdict v) {
  switch (v) {
    case L1Verdict::L1:
      return "L1";
    case L1Verdict::NotL1:
      return "NotL1";
    default:
      return "Unknown";
  }
}

}  // namespace quad
}  // namespace hpf
