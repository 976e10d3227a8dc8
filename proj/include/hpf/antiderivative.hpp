#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hpf/function.hpp"
#include "hpf/quadrature.hpp"

namespace hpf {

/* Any inverse of differentiation that respects germs at the base point is an
   anchored integral plus a constant functional:

     (P g)(x) = int_{x0}^{x} g + c(g).

   The anchor may sit anywhere in the function's domain; c is an arbitrary
   functional of the input. The canonical choice for integrable inputs is the
   Lebesgue antiderivative from 0, realized here byletting c(g) be the
   improper integral of g over (0, x0]. */
class AnchoredAntiderivative {
 public:
  using ConstantFunctional = std::function<double(const FunctionHandle&)>;

  AnchoredAntiderivative(double anchor, ConstantFunctional constant,
                         quad::QuadConfig cfg = {});

  // c(g) = lim_{eps->0} int_eps^{x0} g, so (P g)(x) = int_0^x g on L1 inputs.
  // Applying it to a non-integrable input throws PreconditionFailed.
  static AnchoredAntiderivative lebesgue_from_zero(double anchor = 1.0,
                                                   quad::QuadConfig cfg = {});

  // Anchored integral with a fixed constant, independent of the input.
  static AnchoredAntiderivative with_constant(double anchor, double c,
                                              quad::QuadConfig cfg = {});

  FunctionHandle apply(const FunctionHandle& g) const;
  double evaluate(const FunctionHandle& g, double x) const;

  double anchor() const { return anchor_; }
  double constant_for(const FunctionHandle& g) const { return constant_(g); }
  const quad::QuadConfig& config() const { return cfg_; }

 private:
  double anchor_;
  ConstantFunctional constant_;
  quad::QuadConfig cfg_;
};

struct AxiomCheck {
  std::string name;
  bool pass = false;
  double measured = 0.0;  // residual / discrepancy for the check
  double bound = 0.0;
  std::string note;
};

struct AxiomReport {
  std::vector<AxiomCheck> checks;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

/* Runtime check of the extension axioms on a list of inputs:
   linearity on random pairs and scalars, agreement with the Lebesgue
   integral from 0 on inputs that classify as L1, eventual positivity near 0
   for strictly positive inputs, and (P f)' = f by finite differences.
   Failures are report entries, not errors. */
AxiomReport verify_extension_axioms(const AnchoredAntiderivative& P,
                                    const std::vector<FunctionHandle>& fs,
                                    std::uint64_t seed = 1,
                                    quad::QuadConfig cfg = {});

}  // namespace hpf
