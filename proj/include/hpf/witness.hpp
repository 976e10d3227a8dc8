#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hpf/function.hpp"
#include "hpf/quadrature.hpp"

namespace hpf {
namespace witness {

struct WitnessOptions {
  // Levels materialized at construction; deeper structure is added lazily
  // when tau/theta is queried below the covered range.
  int depth = 12;
  double level_hi = 0.5;   // threshold for the upper level set
  double level_lo = 0.25;  // threshold for the lower level set
  double floor = 1e-9;     // hard floor for level search and theta caching
  std::size_t max_levels = 1000000;
  quad::QuadConfig quad;
};

struct WeightSpec {
  double p = 2.0;  // exponent in [1, inf]; use infinity() for p = inf
  FunctionHandle w;
  static double infinity() { return std::numeric_limits<double>::infinity(); }
};

// Both integrability criteria attached to a weighted witness: the statement
// form uses exponent -1/(p-1), the construction uses -p/(p-1). Both are
// computed and reported; the construction's exponent gates the build.
struct WeightCriterion {
  double q = 0.0;  // p/(p-1)
  quad::ImproperKind construction_exponent = quad::ImproperKind::Oscillatory;
  quad::ImproperKind statement_exponent = quad::ImproperKind::Oscillatory;
};

// A nonnegative function tau with divergent integral at 0, together with the
// structure that produced it. Copyable handle onto shared immutable state;
// the level-set variant grows its structure lazily under an internal lock,
// with results independent of query order.
class WitnessBundle {
 public:
  enum class Source { Function, WeightLp, WeightLinf, WeightL1 };

  double tau(double x) const;
  FunctionHandle tau_handle() const;

  // The gluing factor h with tau = h * f (level-set construction only;
  // value 0/1 semantics with smooth bands). For weighted sources the witness
  // is a closed formula and profile_value returns 1.
  double profile_value(double x) const;
  bool has_profile() const;
  GluingProfile profile_snapshot() const;

  // Materialized core intervals [b_j, c_j], descending, and band widths.
  std::vector<std::pair<double, double>> core_intervals() const;
  std::vector<double> epsilons() const;

  double theta(double x) const;  // int_x^1 tau
  double mass_between(double lo, double hi) const;
  std::vector<std::pair<double, double>> divergence_trace(int n_lo,
                                                          int n_hi) const;

  // int over [lo, hi] of (f_+ - tau), on the sign-normalized function
  // (level-set construction only).
  double excess_mass(double lo, double hi) const;

  Source source() const;
  bool sign_flipped() const;
  double coverage_floor() const;
  bool truncated() const;
  std::optional<WeightCriterion> weight_criterion() const;
  std::string describe() const;

  struct Impl;
  explicit WitnessBundle(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}

 private:
  std::shared_ptr<Impl> impl_;
};

/* Level-set witness from a non-integrable f. On the sign-normalized function
   g (g = f, or -f when only the negative part diverges) the construction
   walks down from 1, alternating between the level sets {g >= level_hi} and
   {g <= level_lo}: c_j is the largest point of the upper set below the
   previous core, b_j the largest point of the lower set below c_j. The
   gluing factor is 1 on each [b_j, c_j] and 0 between cores except for
   smooth bands of width eps_j chosen strictly inside the paper bound of
   half the neighboring gap and, additionally, inside the window where g
   stays positive, so that tau = h g >= 0 holds at the bands too.
   If at some level the lower set is empty all the way down to the floor,
   g stays above level_lo there and the witness continues as tau = g on the
   whole remaining interval (monotone case, e.g. 1/x). */
WitnessBundle build_tau_from_function(const FunctionHandle& f,
                                      WitnessOptions opts = {});

/* Weighted witness per exponent class:
   p = inf : tau = 1/w, valid iff 1/w is non-integrable.
   1<p<inf: tau(x) = w(x)^(-q) / int_x^1 w^(-q) on (0,1/2], q = p/(p-1),
            extended as the constant tau(1/2) on [1/2,1] (the raw formula
            leaves L^p_w near x = 1; the constant extension keeps divergence
            at 0 and restores membership).
   p = 1  : level sets A_k = {w in [1/k^2,1/(k+1)^2)} for a weight vanishing
            at 0 (w normalized to <= 1), tau = sum chi_{A_k}/m(A_k) with
            smooth edges; at most 40 sets are realized.
   Throws CriterionFails when the corresponding integral test rejects w. */
WitnessBundle build_tau_from_weight(const WeightSpec& spec,
                                    WitnessOptions opts = {});

struct HolderReport {
  double p = 0.0, q = 0.0;
  double lhs = 0.0;          // int tau
  double rhs = 0.0;          // (int (w tau)^p)^(1/p) * (int w^-q)^(1/q)
  double int_wtau_p = 0.0;
  double int_w_negq = 0.0;
  bool holds = false;
};

// Numerical check of int tau <= ||w tau||_p * ||w^-1||_q on [eps, 1],
// for the convergent branch int_0^1 w^(-q) < inf.
HolderReport holder_check(const WeightSpec& spec, const FunctionHandle& tau,
                          double eps = 1e-6, quad::QuadConfig cfg = {});

struct PartitionSequence {
  std::vector<double> alphas;  // alpha_0 = 1 > alpha_1 > ... > alpha_K
  WitnessBundle tau_ref;
  std::size_t depth() const { return alphas.empty() ? 0 : alphas.size() - 1; }
};

// alpha_k solves theta(alpha_k) = k by bisection, |theta - k| < tol; the
// tau-mass over [alpha_{k+1}, alpha_k] is 1 by construction. Throws
// RangeExhausted (carrying the realizable count) if theta cannot reach K
// above the numerically covered range.
PartitionSequence build_partition(const WitnessBundle& bundle, int K,
                                  double tol = 1e-9);

// Largest K reachable by build_partition for this bundle.
int max_realizable_depth(const WitnessBundle& bundle);

}  // namespace witness
}  // namespace hpf
