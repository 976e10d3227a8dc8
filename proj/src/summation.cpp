#include "hpf/summation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

namespace hpf {
namespace summation {

BinarySeq::BinarySeq(std::vector<int> prefix, TailKind kind,
                     std::vector<int> pattern)
    : prefix_(std::move(prefix)), tail_(kind), pattern_(std::move(pattern)) {
  for (int b : prefix_)
    if (b != 0 && b != 1) throw DomainError("BinarySeq: bits must be 0/1");
  if (tail_ == TailKind::Periodic) {
    if (pattern_.empty())
      throw DomainError("BinarySeq: periodic tail needs a pattern");
    for (int b : pattern_)
      if (b != 0 && b != 1) throw DomainError("BinarySeq: bits must be 0/1");
  }
}

BinarySeq BinarySeq::parse(const std::string& text) {
  std::vector<int> prefix, pattern;
  std::size_t i = 0;
  while (i < text.size() && (text[i] == '0' || text[i] == '1'))
    prefix.push_back(text[i++] - '0');
  if (i == text.size()) return BinarySeq(std::move(prefix));
  if (text[i] != '[')
    throw DomainError("BinarySeq::parse: unexpected '" +
                      std::string(1, text[i]) + "'");
  ++i;
  while (i < text.size() && (text[i] == '0' || text[i] == '1'))
    pattern.push_back(text[i++] - '0');
  if (i + 1 >= text.size() || text[i] != ']' || text[i + 1] != '*')
    throw DomainError("BinarySeq::parse: expected ']*' tail");
  if (i + 2 != text.size())
    throw DomainError("BinarySeq::parse: trailing input");
  const bool all_zero =
      std::all_of(pattern.begin(), pattern.end(), [](int b) { return b == 0; });
  if (all_zero) return BinarySeq(std::move(prefix));
  return BinarySeq(std::move(prefix), TailKind::Periodic, std::move(pattern));
}

std::string BinarySeq::format() const {
  std::string out;
  for (int b : prefix_) out += static_cast<char>('0' + b);
  if (tail_ == TailKind::Periodic) {
    out += '[';
    for (int b : pattern_) out += static_cast<char>('0' + b);
    out += "]*";
  }
  return out;
}

int BinarySeq::bit(std::size_t i) const {
  if (i < prefix_.size()) return prefix_[i];
  if (tail_ == TailKind::Zero) return 0;
  return pattern_[(i - prefix_.size()) % pattern_.size()];
}

bool BinarySeq::eventually_equal(const BinarySeq& other,
                                 std::size_t* from) const {
  const std::size_t start =
      std::max(prefix_.size(), other.prefix_.size());
  const std::size_t p1 = tail_ == TailKind::Periodic ? pattern_.size() : 1;
  const std::size_t p2 =
      other.tail_ == TailKind::Periodic ? other.pattern_.size() : 1;
  const std::size_t cycle = std::lcm(p1, p2);
  for (std::size_t i = start; i < start + cycle; ++i)
    if (bit(i) != other.bit(i)) return false;
  // walk back to the first index of agreement
  std::size_t first = start;
  while (first > 0 && bit(first - 1) == other.bit(first - 1)) --first;
  if (from) *from = first;
  return true;
}

BinarySeq BinarySeq::random(std::mt19937_64& rng, std::size_t prefix_len,
                            bool allow_periodic_tail) {
  std::vector<int> prefix(prefix_len);
  for (auto& b : prefix) b = static_cast<int>(rng() & 1u);
  if (allow_periodic_tail && (rng() & 1u)) {
    std::vector<int> pattern(1 + (rng() % 4));
    bool any = false;
    for (auto& b : pattern) {
      b = static_cast<int>(rng() & 1u);
      any = any || b;
    }
    if (any)
      return BinarySeq(std::move(prefix), TailKind::Periodic,
                       std::move(pattern));
  }
  return BinarySeq(std::move(prefix));
}

std::vector<double> standard_sum(const BinarySeq& a, std::size_t N) {
  if (N < 1) throw DomainError("standard_sum: N must be >= 1");
  std::vector<double> out;
  out.reserve(N);
  double acc = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    acc += a.bit(i);
    out.push_back(acc);
  }
  return out;
}

GluingProfile zero_set_mask(const BinarySeq& a,
                            const witness::PartitionSequence& part,
                            std::size_t N) {
  if (N > part.depth())
    throw PartitionTooShallow("mask needs " + std::to_string(N) +
                              " gaps, partition has " +
                              std::to_string(part.depth()));
  const auto& alphas = part.alphas;
  const witness::WitnessBundle& bundle = part.tau_ref;

  // Zeroed gaps ascending in x (deep gaps have large n).
  struct ZeroGap {
    double lo, hi, eps;
  };
  std::vector<ZeroGap> zeros;
  for (std::size_t n = N; n-- > 0;) {
    if (a.bit(n) != 0) continue;
    const double lo = alphas[n + 1], hi = alphas[n];
    double tau_max = 0.0;
    for (int i = 0; i <= 64; ++i) {
      const double x = lo * std::pow(hi / lo, i / 64.0);
      tau_max = std::max(tau_max, bundle.tau(x));
    }
    tau_max *= 1.2;  // sampled maximum, with headroom for missed peaks
    const double eps =
        std::min(0.25 * (hi - lo),
                 std::ldexp(1.0, -static_cast<int>(n) - 3) /
                     (2.0 * std::max(tau_max, 1e-12)));
    zeros.push_back({lo, hi, eps});
  }

  // The mask is 1 everywhere except those gaps: cores stitch the complement.
  std::vector<GluingProfile::Core> cores;
  GluingProfile::Core cur;
  cur.lo = 0.0;
  cur.lo_width = 0.0;
  for (const ZeroGap& z : zeros) {
    cur.hi = z.lo;
    cur.hi_width = z.eps;
    cores.push_back(cur);
    cur = GluingProfile::Core{};
    cur.lo = z.hi;
    cur.lo_width = z.eps;
  }
  cur.hi = 1.0;
  cur.hi_width = 0.0;
  cores.push_back(cur);
  return GluingProfile(std::move(cores));
}

AnchoredAntiderivative default_interface_antiderivative(
    const witness::PartitionSequence& part, std::size_t N,
    quad::QuadConfig cfg) {
  if (N > part.depth())
    throw PartitionTooShallow("anchor needs alpha_" + std::to_string(N));
  return AnchoredAntiderivative::with_constant(part.alphas[N], 0.0, cfg);
}

SummationTrace interface_sum(const BinarySeq& a,
                             const witness::PartitionSequence& part,
                             const AnchoredAntiderivative& P, std::size_t N,
                             quad::QuadConfig cfg) {
  if (N < 1) throw DomainError("interface_sum: N must be >= 1");
  if (N > part.depth())
    throw PartitionTooShallow("trace depth " + std::to_string(N) +
                              " exceeds partition depth " +
                              std::to_string(part.depth()));
  const auto& alphas = part.alphas;
  const witness::WitnessBundle& bundle = part.tau_ref;

  GluingProfile mask = zero_set_mask(a, part, N);
  FunctionHandle masked = modulate(bundle.tau_handle(), mask);
  FunctionHandle masked_anti = P.apply(masked);

  // Per-gap leak of tau h into the bands of the zeroed gaps; the integrand
  // chi tau - tau h vanishes identically on gaps with a_n = 1.
  std::vector<double> band_leak(N, 0.0);
  double leak_total = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    if (a.bit(n) != 0) continue;
    band_leak[n] =
        quad::integrate(masked, alphas[n + 1], alphas[n], cfg).value;
    leak_total += band_leak[n];
  }

  SummationTrace trace;
  trace.mask_leak = leak_total;
  trace.x_values.resize(N + 1);
  // suffix sums of the band leaks: correction integral over [alpha_N, alpha_k]
  double suffix = 0.0;
  std::vector<double> corr(N + 1, 0.0);
  for (std::size_t n = N; n-- > 0;) {
    suffix += band_leak[n];
    corr[n] = suffix;
  }
  for (std::size_t k = 0; k <= N; ++k)
    trace.x_values[k] = -(masked_anti(alphas[k]) - corr[k]);

  trace.s_terms.assign(trace.x_values.begin() + 1, trace.x_values.end());
  const std::vector<double> sigma = standard_sum(a, N);
  double acc = 0.0;
  for (std::size_t n = 0; n < N; ++n) acc += trace.s_terms[n] - sigma[n];
  trace.constant_estimate = acc / static_cast<double>(N);
  return trace;
}

std::vector<double> s_star(const std::vector<double>& s_terms,
                           const BinarySeq& a) {
  const std::vector<double> sigma = standard_sum(a, s_terms.size());
  std::vector<double> out(s_terms.size());
  for (std::size_t n = 0; n < s_terms.size(); ++n)
    out[n] = s_terms[n] - sigma[n];
  return out;
}

ConstantReport s_dblstar(const std::vector<double>& s_terms,
                         const BinarySeq& a, double tol) {
  if (s_terms.empty()) throw DomainError("s_dblstar: empty trace");
  const std::vector<double> star = s_star(s_terms, a);
  double mean = 0.0;
  for (double v : star) mean += v;
  mean /= static_cast<double>(star.size());
  double dev = 0.0;
  for (double v : star) dev = std::max(dev, std::fabs(v - mean));
  if (dev > tol)
    throw NotConstant("S* spreads by " + std::to_string(dev) +
                          "; not a summation operator",
                      dev);
  return {mean, dev};
}

EventualAgreement verify_based_at_infinity(const BinarySeq& a,
                                           const BinarySeq& a2,
                                           const witness::PartitionSequence& part,
                                           const AnchoredAntiderivative& P,
                                           std::size_t N, double tol,
                                           quad::QuadConfig cfg) {
  const SummationTrace t1 = interface_sum(a, part, P, N, cfg);
  const SummationTrace t2 = interface_sum(a2, part, P, N, cfg);
  EventualAgreement out;
  std::size_t first = N;
  for (std::size_t n = N; n-- > 0;) {
    const double gap = std::fabs(t1.s_terms[n] - t2.s_terms[n]);
    if (gap <= tol)
      first = n;
    else
      break;
  }
  out.agree_from = first;
  out.eventually_equal = first < N;
  for (std::size_t n = first; n < N; ++n)
    out.max_tail_gap = std::max(
        out.max_tail_gap, std::fabs(t1.s_terms[n] - t2.s_terms[n]));
  return out;
}

std::vector<BinarySeq> load_corpus(std::istream& in) {
  std::vector<BinarySeq> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    out.push_back(BinarySeq::parse(line.substr(first, last - first + 1)));
  }
  return out;
}

void save_corpus(std::ostream& out, const std::vector<BinarySeq>& seqs) {
  for (const auto& s : seqs) out << s.format() << "\n";
}

}  // namespace summation
}  // namespace hpf
