#include "hpf/antiderivative.hpp"

#include <cmath>
#include <random>

namespace hpf {

AnchoredAntiderivative::AnchoredAntiderivative(double anchor,
                                               ConstantFunctional constant,
                                               quad::QuadConfig cfg)
    : anchor_(anchor), constant_(std::move(constant)), cfg_(cfg) {
  if (!(anchor > 0.0))
    throw DomainError("AnchoredAntiderivative: anchor must be positive");
}

AnchoredAntiderivative AnchoredAntiderivative::lebesgue_from_zero(
    double anchor, quad::QuadConfig cfg) {
  return AnchoredAntiderivative(
      anchor,
      [cfg, anchor](const FunctionHandle& g) {
        quad::ImproperVerdict v = quad::improper_integral(g, cfg, anchor);
        if (!v.convergent())
          throw PreconditionFailed(
              "lebesgue_from_zero: input is not integrable near 0 (" +
              std::string(quad::to_string(v.kind)) + ")");
        return v.value;
      },
      cfg);
}

AnchoredAntiderivative AnchoredAntiderivative::with_constant(
    double anchor, double c, quad::QuadConfig cfg) {
  return AnchoredAntiderivative(
      anchor, [c](const FunctionHandle&) { return c; }, cfg);
}

double AnchoredAntiderivative::evaluate(const FunctionHandle& g,
                                        double x) const {
  const double c = constant_(g);
  if (x == anchor_) return c;
  if (x > anchor_) return quad::integrate(g, anchor_, x, cfg_).value + c;
  return -quad::integrate(g, x, anchor_, cfg_).value + c;
}

FunctionHandle AnchoredAntiderivative::apply(const FunctionHandle& g) const {
  const double c = constant_(g);  // evaluated once per application
  const double x0 = anchor_;
  const quad::QuadConfig cfg = cfg_;
  FunctionHandle base = g;
  return FunctionHandle(
      "P[" + g.label() + "]",
      [base, c, x0, cfg](double x) {
        if (x == x0) return c;
        if (x > x0) return quad::integrate(base, x0, x, cfg).value + c;
        return -quad::integrate(base, x, x0, cfg).value + c;
      },
      1);
}

namespace {

double finite_difference(const FunctionHandle& F, double x, double h) {
  return (F(x + h) - F(x - h)) / (2.0 * h);
}

}  // namespace

AxiomReport verify_extension_axioms(const AnchoredAntiderivative& P,
                                    const std::vector<FunctionHandle>& fs,
                                    std::uint64_t seed, quad::QuadConfig cfg) {
  AxiomReport rep;
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  };
  const double sample_xs[4] = {0.1, 0.35, 0.7, 1.0};

  // (III) linearity on random pairs and scalars
  {
    AxiomCheck check;
    check.name = "linearity";
    check.bound = 1e-8;
    double worst = 0.0;
    if (!fs.empty()) {
      for (int trial = 0; trial < 4; ++trial) {
        const auto& f = fs[rng() % fs.size()];
        const auto& g = fs[rng() % fs.size()];
        const double a = uniform(-2.0, 2.0);
        const double b = uniform(-2.0, 2.0);
        FunctionHandle combo = fn_sum(f, g, a, b);
        for (double x : sample_xs) {
          const double lhs = P.evaluate(combo, x);
          const double rhs = a * P.evaluate(f, x) + b * P.evaluate(g, x);
          const double scale = 1.0 + std::fabs(lhs) + std::fabs(rhs);
          worst = std::max(worst, std::fabs(lhs - rhs) / scale);
        }
      }
    }
    check.measured = worst;
    check.pass = worst <= check.bound;
    rep.checks.push_back(check);
  }

  // (IV) agreement with the Lebesgue integral from 0 on L1 inputs
  {
    AxiomCheck check;
    check.name = "lebesgue_agreement";
    check.bound = 1e-7;
    double worst = 0.0;
    int tested = 0;
    for (const auto& f : fs) {
      if (quad::l1_classify(f, cfg) != quad::L1Verdict::L1) continue;
      ++tested;
      for (double x : sample_xs) {
        quad::ImproperVerdict v = quad::improper_integral(f, cfg, x);
        if (!v.convergent()) continue;
        worst = std::max(worst, std::fabs(P.evaluate(f, x) - v.value));
      }
    }
    check.measured = worst;
    check.pass = worst <= check.bound;
    check.note = std::to_string(tested) + " input(s) classified L1";
    rep.checks.push_back(check);
  }

  // (V) eventual positivity near 0 for strictly positive inputs
  {
    AxiomCheck check;
    check.name = "eventual_positivity";
    check.bound = 0.0;
    bool all_ok = true;
    int tested = 0;
    for (const auto& f : fs) {
      bool positive = true;
      for (int k = 1; k <= 24; ++k)
        if (f(std::ldexp(1.0, -k)) <= 0.0) positive = false;
      if (!positive) continue;
      ++tested;
      // P f must be positive from some probe scale on down.
      bool positive_onward = false;
      for (int start = 1; start <= 12 && !positive_onward; ++start) {
        positive_onward = true;
        for (int k = start; k <= 20; ++k)
          if (P.evaluate(f, std::ldexp(1.0, -k)) <= 0.0) {
            positive_onward = false;
            break;
          }
      }
      if (!positive_onward) all_ok = false;
    }
    check.measured = all_ok ? 0.0 : 1.0;
    check.pass = all_ok;
    check.note = std::to_string(tested) + " strictly positive input(s)";
    rep.checks.push_back(check);
  }

  // (P f)' = f by central differences on the produced handle
  {
    AxiomCheck check;
    check.name = "derivative_identity";
    check.bound = 1e-5;
    double worst = 0.0;
    for (const auto& f : fs) {
      FunctionHandle F = P.apply(f);
      for (int trial = 0; trial < 3; ++trial) {
        const double x = uniform(0.05, 0.95);
        const double h = 1e-4;
        const double fd = finite_difference(F, x, h);
        const double scale = 1.0 + std::fabs(f(x));
        worst = std::max(worst, std::fabs(fd - f(x)) / scale);
      }
    }
    check.measured = worst;
    check.pass = worst <= check.bound;
    rep.checks.push_back(check);
  }

  return rep;
}

}  // namespace hpf
