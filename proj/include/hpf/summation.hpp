#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "hpf/antiderivative.hpp"
#include "hpf/witness.hpp"

namespace hpf {
namespace summation {

// Element of {0,1}^N as a finite prefix plus a tail rule, so every sequence
// is finitely describable. Text form: "0110" (eventually zero) or
// "0110[01]*" (prefix then periodic pattern).
class BinarySeq {
 public:
  enum class TailKind { Zero, Periodic };

  BinarySeq() = default;
  BinarySeq(std::vector<int> prefix, TailKind kind = TailKind::Zero,
            std::vector<int> pattern = {});

  static BinarySeq parse(const std::string& text);
  std::string format() const;

  int bit(std::size_t i) const;
  std::size_t prefix_size() const { return prefix_.size(); }
  TailKind tail_kind() const { return tail_; }
  const std::vector<int>& pattern() const { return pattern_; }

  // Exact decision on the tail rules; *from receives the first index from
  // which the two sequences coincide (when they are eventually equal).
  bool eventually_equal(const BinarySeq& other, std::size_t* from = nullptr) const;

  static BinarySeq random(std::mt19937_64& rng, std::size_t prefix_len,
                          bool allow_periodic_tail = false);

 private:
  std::vector<int> prefix_;
  TailKind tail_ = TailKind::Zero;
  std::vector<int> pattern_;
};

// (x_0, x_0+x_1, ...) truncated to N terms of the plain prefix-sum.
std::vector<double> standard_sum(const BinarySeq& a, std::size_t N);

/* Mask for the open set O_a = union of the gaps (alpha_{n+1}, alpha_n) with
   a_n = 0: the profile is 1 on the complement and zeroed on each such gap,
   with transition bands shrunk both geometrically (2^-n-3) and by the max of
   tau on the gap, so the total tau-mass leaked into the bands stays below
   1/2. */
GluingProfile zero_set_mask(const BinarySeq& a,
                            const witness::PartitionSequence& part,
                            std::size_t N);

struct SummationTrace {
  std::vector<double> x_values;   // x_0 .. x_N
  std::vector<double> s_terms;    // S_n = x_{n+1}, n = 0 .. N-1
  double constant_estimate = 0.0; // S - standard sum, averaged
  double mask_leak = 0.0;         // int |chi tau - tau h| over [alpha_N, 1]
};

/* The explicit interface from an antiderivative to a summation operator.
   With tau, the unit-mass partition alpha_k, and the mask h,

     x_k = -( [P(tau h)](alpha_k) + int over [alpha_N, alpha_k] of
              (chi_{O_a^c} tau - tau h) ),

   truncated at alpha_N instead of 0 (the dropped mass near 0 shifts every
   term by one constant, which a summation operator absorbs). Orientation is
   fixed so that consecutive differences reproduce the bits:
   x_{n+1} - x_n = a_n. S is then S_n = x_{n+1}, which satisfies
   S = standard_sum + c with c = x_0. */
SummationTrace interface_sum(const BinarySeq& a,
                             const witness::PartitionSequence& part,
                             const AnchoredAntiderivative& P, std::size_t N,
                             quad::QuadConfig cfg = {});

// The antiderivative the pipeline uses by default: anchored at the
// truncation point alpha_N with constant 0, so the operator's output depends
// only on data below the anchor and eventually-equal inputs give eventually
// equal outputs.
AnchoredAntiderivative default_interface_antiderivative(
    const witness::PartitionSequence& part, std::size_t N,
    quad::QuadConfig cfg = {});

// S - standard_sum, termwise.
std::vector<double> s_star(const std::vector<double>& s_terms,
                           const BinarySeq& a);

struct ConstantReport {
  double value = 0.0;      // the common value of S*
  double deviation = 0.0;  // max |S*_n - value|
};

// The unique constant of S*; throws NotConstant when the terms spread more
// than tol (a broken summation operator).
ConstantReport s_dblstar(const std::vector<double>& s_terms,
                         const BinarySeq& a, double tol = 1e-6);

struct EventualAgreement {
  bool eventually_equal = false;
  std::size_t agree_from = 0;  // first index with agreement to the window end
  double max_tail_gap = 0.0;
};

// Builds both traces with the same P and reports whether the outputs agree
// from some index on (within tol) inside the realized window.
EventualAgreement verify_based_at_infinity(const BinarySeq& a,
                                           const BinarySeq& a2,
                                           const witness::PartitionSequence& part,
                                           const AnchoredAntiderivative& P,
                                           std::size_t N, double tol = 1e-6,
                                           quad::QuadConfig cfg = {});

// Corpus files: one sequence per line in the parse/format syntax;
// '#' starts a comment line.
std::vector<BinarySeq> load_corpus(std::istream& in);
void save_corpus(std::ostream& out, const std::vector<BinarySeq>& seqs);

}  // namespace summation
}  // namespace hpf
