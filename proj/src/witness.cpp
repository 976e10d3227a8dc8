#include "hpf/witness.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace hpf {
namespace witness {

namespace {

constexpr double kTinyGap = 1e-15;

// Cumulative integral from `top` downward, cached at dyadic knots
// top * 2^-i and extended on demand. Thread-safe; values depend only on x.
class PrefixCache {
 public:
  PrefixCache(std::function<double(double)> integrand,
              std::function<std::vector<double>(double, double)> edges,
              double top, quad::QuadConfig cfg)
      : integrand_(std::move(integrand)),
        edges_(std::move(edges)),
        top_(top),
        cfg_(cfg) {
    prefix_.push_back(0.0);  // mass above t_0 = top is zero
  }

  // int_x^top of the integrand, x in (0, top].
  double mass_from_top(double x) const {
    if (x >= top_) return 0.0;
    const int idx =
        static_cast<int>(std::floor(std::log2(top_ / x) + 1e-12));
    std::lock_guard<std::mutex> lock(mutex_);
    while (static_cast<int>(prefix_.size()) <= idx) {
      const int i = static_cast<int>(prefix_.size()) - 1;
      const double hi = std::ldexp(top_, -i);
      const double lo = std::ldexp(top_, -(i + 1));
      prefix_.push_back(prefix_.back() + piece(lo, hi));
    }
    const double knot = std::ldexp(top_, -idx);
    double out = prefix_[idx];
    if (x < knot) out += piece(x, knot);
    return out;
  }

 private:
  double piece(double lo, double hi) const {
    if (hi - lo < kTinyGap * hi) return 0.0;
    return quad::integrate_kernel(integrand_, lo, hi,
                                  edges_ ? edges_(lo, hi)
                                         : std::vector<double>{},
                                  cfg_, "prefix piece")
        .value;
  }

  std::function<double(double)> integrand_;
  std::function<std::vector<double>(double, double)> edges_;
  double top_;
  quad::QuadConfig cfg_;
  mutable std::mutex mutex_;
  mutable std::vector<double> prefix_;
};

// ---------------------------------------------------------------------------
// Descending search for level-set points.

struct Crossing {
  double x;        // the located boundary point
  double span_lo;  // single-sign window around it (margins for bands)
  double span_hi;
};

// Largest x in [lo_limit, hi_limit] with g(x) >= thr (ge) or <= thr (!ge),
// restricted to one window that is expected to contain at most one monotone
// crossing per sampled cell. Returns the refined crossing or nullopt.
std::optional<double> scan_window(const std::function<double(double)>& g,
                                  double lo_limit, double hi_limit, double thr,
                                  bool ge, int samples) {
  if (!(hi_limit > lo_limit)) return std::nullopt;
  auto ok = [&](double v) { return ge ? v >= thr : v <= thr; };
  double prev_x = hi_limit;
  double prev_v = g(hi_limit);
  if (ok(prev_v)) return hi_limit;
  for (int i = 1; i <= samples; ++i) {
    const double x =
        hi_limit + (lo_limit - hi_limit) * (static_cast<double>(i) / samples);
    const double v = g(x);
    if (ok(v)) {
      // bisect the bracket [x, prev_x] for the upper boundary of the set
      double a = x, b = prev_x;  // ok(a), !ok(b)
      for (int it = 0; it < 80 && (b - a) > kTinyGap * b; ++it) {
        const double mid = 0.5 * (a + b);
        (ok(g(mid)) ? a : b) = mid;
      }
      return a;
    }
    prev_x = x;
    prev_v = v;
  }
  (void)prev_v;
  return std::nullopt;
}

// Enumerates descending windows below `from`: the gaps between consecutive
// structural breakpoints when the handle has them (oscillation arches),
// otherwise geometric chunks. Each window is handed to scan_window.
class DescendingWindows {
 public:
  DescendingWindows(const FunctionHandle& f, double from, double floor)
      : f_(f), cursor_(from), floor_(floor) {}

  // Next window [lo, hi] descending; false when the floor is reached.
  bool next(double* lo, double* hi) {
    while (true) {
      if (cursor_ <= floor_) return false;
      if (!buffer_.empty()) {
        const double edge = buffer_.back();
        buffer_.pop_back();
        if (edge < cursor_ - kTinyGap && edge > floor_) {
          *lo = edge;
          *hi = cursor_;
          cursor_ = edge;
          return true;
        }
        continue;
      }
      // Refill: breakpoints in a chunk below the cursor, or a plain chunk.
      const double chunk_lo = std::max(floor_, cursor_ * (1.0 - kGamma));
      if (f_.has_breakpoints()) {
        std::vector<double> pts = f_.breakpoints(chunk_lo, cursor_, 1 << 18);
        std::sort(pts.begin(), pts.end());  // ascending; we pop from back
        if (!pts.empty()) {
          buffer_ = std::move(pts);
          continue;
        }
      }
      if (chunk_lo >= cursor_ - kTinyGap) return false;
      *lo = chunk_lo;
      *hi = cursor_;
      cursor_ = chunk_lo;
      return true;
    }
  }

 private:
  static constexpr double kGamma = 0.25;
  const FunctionHandle& f_;
  double cursor_;
  double floor_;
  std::vector<double> buffer_;  // ascending edges not yet consumed
};

std::optional<Crossing> find_level_point(
    const std::function<double(double)>& g, const FunctionHandle& f_structure,
    double from, double floor, double thr, bool ge) {
  DescendingWindows windows(f_structure, from, floor);
  double lo, hi;
  while (windows.next(&lo, &hi)) {
    if (auto x = scan_window(g, lo, hi, thr, ge, 48))
      return Crossing{*x, lo, hi};
  }
  return std::nullopt;
}

// Largest x in [lo_limit, from) where g is <= 0; used to cap band widths so
// gluing bands stay inside the window where g is positive. Returns lo_limit
// when no sign change is detected.
double positivity_floor(const std::function<double(double)>& g, double from,
                        double lo_limit) {
  const int samples = 96;
  double prev = from;
  for (int i = 1; i <= samples; ++i) {
    const double x =
        from + (lo_limit - from) * (static_cast<double>(i) / samples);
    if (g(x) <= 0.0) {
      double a = x, b = prev;  // g(a) <= 0 < g(b) expected
      for (int it = 0; it < 60 && (b - a) > kTinyGap * b; ++it) {
        const double mid = 0.5 * (a + b);
        (g(mid) <= 0.0 ? a : b) = mid;
      }
      return b;
    }
    prev = x;
  }
  return lo_limit;
}

}  // namespace

// ---------------------------------------------------------------------------

struct WitnessBundle::Impl {
  virtual ~Impl() = default;
  virtual double tau(double x) const = 0;
  virtual double profile(double /*x*/) const { return 1.0; }
  virtual bool has_profile() const { return false; }
  virtual double theta(double x) const = 0;
  virtual Source source() const = 0;
  virtual bool flipped() const { return false; }
  virtual double floor_covered() const = 0;
  virtual bool is_truncated() const { return false; }
  virtual std::vector<std::pair<double, double>> cores() const { return {}; }
  virtual std::vector<double> eps_list() const { return {}; }
  virtual GluingProfile snapshot() const {
    return GluingProfile::constant_one();
  }
  virtual double excess(double, double) const {
    throw Error("excess mass is defined for level-set witnesses only");
  }
  virtual std::optional<WeightCriterion> criterion() const {
    return std::nullopt;
  }
  virtual std::vector<double> structure_edges(double lo, double hi,
                                              std::size_t budget) const = 0;
  virtual std::string describe() const = 0;
};

double WitnessBundle::tau(double x) const { return impl_->tau(x); }
double WitnessBundle::profile_value(double x) const { return impl_->profile(x); }
bool WitnessBundle::has_profile() const { return impl_->has_profile(); }
double WitnessBundle::theta(double x) const { return impl_->theta(x); }
double WitnessBundle::mass_between(double lo, double hi) const {
  return impl_->theta(lo) - impl_->theta(hi);
}
WitnessBundle::Source WitnessBundle::source() const { return impl_->source(); }
bool WitnessBundle::sign_flipped() const { return impl_->flipped(); }
double WitnessBundle::coverage_floor() const { return impl_->floor_covered(); }
bool WitnessBundle::truncated() const { return impl_->is_truncated(); }
std::vector<std::pair<double, double>> WitnessBundle::core_intervals() const {
  return impl_->cores();
}
std::vector<double> WitnessBundle::epsilons() const { return impl_->eps_list(); }
GluingProfile WitnessBundle::profile_snapshot() const {
  return impl_->snapshot();
}
double WitnessBundle::excess_mass(double lo, double hi) const {
  return impl_->excess(lo, hi);
}
std::optional<WeightCriterion> WitnessBundle::weight_criterion() const {
  return impl_->criterion();
}
std::string WitnessBundle::describe() const { return impl_->describe(); }

std::vector<std::pair<double, double>> WitnessBundle::divergence_trace(
    int n_lo, int n_hi) const {
  std::vector<std::pair<double, double>> out;
  for (int n = n_lo; n <= n_hi; ++n) {
    const double eps = std::ldexp(1.0, -n);
    out.emplace_back(eps, impl_->theta(eps));
  }
  return out;
}

FunctionHandle WitnessBundle::tau_handle() const {
  auto impl = impl_;
  FunctionHandle h("tau[" + impl->describe() + "]",
                   [impl](double x) { return impl->tau(x); }, 0);
  return h.with_breakpoints(
      [impl](double lo, double hi, std::size_t budget) {
        return impl->structure_edges(lo, hi, budget);
      });
}

// ---------------------------------------------------------------------------
// Level-set witness (construction walking down the level sets of g).

namespace {

struct Level {
  double c = 0.0;        // upper-set point: g(c) = level_hi, largest in range
  double b = 0.0;        // lower-set point below c: g(b) = level_lo
  double span_lo = 0.0;  // single-sign window around the core
  double span_hi = 0.0;
  double eps = 0.0;      // band width below b (and above the next c); set
                         // when the next level (or truncation) is known
};

struct Piece {
  double lo, hi;
  double mass;       // tau mass on [lo, hi]
  double cum_above;  // tau mass on [hi, 1]
  enum Kind : unsigned char { Zero, Core, RiseBand, FallBand, TailCore } kind;
};

class LevelSetImpl final : public WitnessBundle::Impl {
 public:
  LevelSetImpl(FunctionHandle f, int side, WitnessOptions opts)
      : f_(std::move(f)), side_(side), opts_(opts) {
    g_ = [this](double x) { return side_ * f_(x); };
    build_first_level();
    for (int j = 1; j < opts_.depth; ++j)
      if (!extend_one_level()) break;
  }

  double tau(double x) const override {
    std::lock_guard<std::mutex> lock(mutex_);
    ensure_covered(x);
    return profile_locked(x) * g_(x);
  }

  double profile(double x) const override {
    std::lock_guard<std::mutex> lock(mutex_);
    ensure_covered(x);
    return profile_locked(x);
  }
  bool has_profile() const override { return true; }

  double theta(double x) const override {
    std::lock_guard<std::mutex> lock(mutex_);
    ensure_covered(x);
    return theta_locked(x);
  }

  WitnessBundle::Source source() const override {
    return WitnessBundle::Source::Function;
  }
  bool flipped() const override { return side_ < 0; }

  double floor_covered() const override {
    std::lock_guard<std::mutex> lock(mutex_);
    return mass_floor_;
  }
  bool is_truncated() const override {
    std::lock_guard<std::mutex> lock(mutex_);
    return truncated_;
  }

  std::vector<std::pair<double, double>> cores() const override {
    std::lock_guard<std::mutex> lock(mutex_);
    std::vector<std::pair<double, double>> out;
    out.reserve(levels_.size());
    for (const Level& l : levels_) out.emplace_back(l.b, l.c);
    return out;
  }

  std::vector<double> eps_list() const override {
    std::lock_guard<std::mutex> lock(mutex_);
    std::vector<double> out;
    for (std::size_t j = 0; j + 1 < levels_.size(); ++j)
      out.push_back(levels_[j].eps);
    if (truncated_ && !levels_.empty()) out.push_back(levels_.back().eps);
    return out;
  }

  GluingProfile snapshot() const override {
    std::lock_guard<std::mutex> lock(mutex_);
    std::vector<GluingProfile::Core> cores;
    for (std::size_t j = 0; j < levels_.size(); ++j) {
      GluingProfile::Core core;
      core.lo = levels_[j].b;
      core.hi = levels_[j].c;
      core.hi_width = (j == 0) ? top_eps_ : levels_[j - 1].eps;
      core.lo_width = levels_[j].eps;  // 0 while the gap below is open
      cores.push_back(core);
    }
    if (tail_core_top_ > 0.0) {
      GluingProfile::Core tail;
      tail.lo = 0.0;
      tail.hi = tail_core_top_;
      tail.hi_width = levels_.empty() ? top_eps_ : levels_.back().eps;
      cores.push_back(tail);
    }
    return GluingProfile(std::move(cores));
  }

  double excess(double lo, double hi) const override {
    std::lock_guard<std::mutex> lock(mutex_);
    ensure_covered(lo);
    double total = 0.0;
    for (const Piece& p : pieces_) {
      const double a = std::max(lo, p.lo);
      const double b = std::min(hi, p.hi);
      if (b - a <= 0.0) continue;
      switch (p.kind) {
        case Piece::Core:
        case Piece::TailCore:
          break;  // tau == g == g_+ there
        case Piece::Zero: {
          auto gplus = [this](double x) { return std::max(g_(x), 0.0); };
          total += quad::integrate_kernel(gplus, a, b,
                                          f_.breakpoints(a, b, 1 << 16),
                                          opts_.quad, "excess zero piece")
                       .value;
          break;
        }
        case Piece::RiseBand:
        case Piece::FallBand: {
          auto leftover = [this](double x) {
            return (1.0 - profile_locked(x)) * g_(x);
          };
          total += quad::integrate_kernel(leftover, a, b, {}, opts_.quad,
                                          "excess band piece")
                       .value;
          break;
        }
      }
    }
    return total;
  }

  std::vector<double> structure_edges(double lo, double hi,
                                      std::size_t budget) const override {
    std::lock_guard<std::mutex> lock(mutex_);
    ensure_covered(lo);
    std::vector<double> out;
    for (const Piece& p : pieces_) {
      if (p.hi > lo && p.hi < hi) out.push_back(p.hi);
      if (out.size() > budget) break;
    }
    std::vector<double> fb = f_.breakpoints(lo, hi, budget);
    out.insert(out.end(), fb.begin(), fb.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  std::string describe() const override {
    return "levelset(" + f_.label() + (side_ < 0 ? ", flipped)" : ")");
  }

 private:
  // --- construction ---------------------------------------------------------

  void build_first_level() {
    auto c0 = find_level_point(g_, f_, 1.0, opts_.floor, opts_.level_hi, true);
    if (!c0)
      throw LevelSetNotFound(
          "upper level set empty down to the search floor", 0);
    Level l0;
    l0.c = c0->x;
    l0.span_lo = c0->span_lo;
    l0.span_hi = c0->span_hi;

    // Band above the first core, capped by where g stays positive.
    if (l0.c < 1.0 - kTinyGap) {
      double margin_above = l0.span_hi - l0.c;
      if (margin_above <= 0.0)
        margin_above = 1.0 - l0.c;  // span degenerate; fall back to the gap
      top_eps_ = 0.4 * std::min(1.0 - l0.c, margin_above);
    }

    auto b0 = find_level_point(g_, f_, l0.c, opts_.floor, opts_.level_lo,
                               false);
    if (!b0) {
      // Lower set empty below c0: g stays above level_lo, keep tau = g.
      tail_core_top_ = l0.c;
      push_top_pieces(l0.c);
      start_tail_core();
      return;
    }
    l0.b = b0->x;
    if (b0->span_lo < l0.span_lo) l0.span_lo = b0->span_lo;
    levels_.push_back(l0);  // visible to the profile before pieces integrate
    push_top_pieces(l0.c);
    push_piece(l0.b, l0.c, Piece::Core);
  }

  void push_top_pieces(double c0) {
    if (c0 >= 1.0 - kTinyGap) return;
    push_piece(c0 + top_eps_, 1.0, Piece::Zero);
    push_piece(c0, c0 + top_eps_, Piece::FallBand);
  }

  // Finds the next (c, b) pair below the last level and finalizes the band
  // width of the gap just above it. Returns false when the structure ended
  // (tail core or truncation).
  bool extend_one_level() {
    if (tail_core_top_ > 0.0 || truncated_) return false;
    if (levels_.size() >= opts_.max_levels) {
      truncate_below();
      return false;
    }
    Level& prev = levels_.back();
    auto c = find_level_point(g_, f_, prev.b, opts_.floor, opts_.level_hi,
                              true);
    if (!c) {
      truncate_below();
      return false;
    }
    // The crossing may sit at prev.b itself if g touches the threshold; the
    // gap must stay positive for the band geometry to make sense.
    if (prev.b - c->x < kTinyGap) {
      truncate_below();
      return false;
    }
    Level next;
    next.c = c->x;
    next.span_lo = c->span_lo;
    next.span_hi = c->span_hi;

    auto b = find_level_point(g_, f_, next.c, opts_.floor, opts_.level_lo,
                              false);
    if (!b) {
      // Lower set exhausted: tau = g from next.c down.
      tail_core_top_ = next.c;
      finalize_gap(prev, next.c, next.span_hi);
      const double eps = levels_.back().eps;
      push_piece(next.c + eps, prev.b - eps, Piece::Zero);
      push_piece(next.c, next.c + eps, Piece::FallBand);
      start_tail_core();
      return false;
    }
    next.b = b->x;
    if (b->span_lo < next.span_lo) next.span_lo = b->span_lo;

    finalize_gap(prev, next.c, next.span_hi);  // rise band below prev.b
    const double prev_b = prev.b;
    const double eps = prev.eps;
    levels_.push_back(next);  // profile must see the level before integrating;
                              // `prev` is dangling from here on
    push_piece(next.c + eps, prev_b - eps, Piece::Zero);
    push_piece(next.c, next.c + eps, Piece::FallBand);
    push_piece(next.b, next.c, Piece::Core);
    return true;
  }

  // Chooses eps for the gap below `lev` (its lower band) given the top of
  // the next core, then records the rise band and keeps pieces descending.
  void finalize_gap(Level& lev, double next_c, double next_span_hi) {
    const double gap = lev.b - next_c;
    const double core_width = lev.c - lev.b;
    double margin_below = lev.b - lev.span_lo;
    if (margin_below <= 0.0)
      margin_below = lev.b - positivity_floor(g_, lev.b, next_c);
    double margin_above = next_span_hi - next_c;
    if (margin_above <= 0.0 || next_span_hi <= next_c)
      margin_above = gap;
    lev.eps = 0.4 * std::min(std::min(core_width, gap),
                             std::min(margin_below, margin_above));
    lev.eps = std::max(lev.eps, kTinyGap);
    push_piece(lev.b - lev.eps, lev.b, Piece::RiseBand);
  }

  void truncate_below() {
    if (levels_.empty()) {
      truncated_ = true;
      return;
    }
    Level& last = levels_.back();
    const double core_width = last.c - last.b;
    double margin_below = last.b - last.span_lo;
    if (margin_below <= 0.0) margin_below = core_width;
    last.eps = 0.4 * std::min(core_width, margin_below);
    last.eps = std::max(last.eps, kTinyGap);
    push_piece(last.b - last.eps, last.b, Piece::RiseBand);
    truncated_ = true;
  }

  void start_tail_core() {
    // Pieces below tail_core_top_ are dyadic core slices appended on demand.
    tail_cursor_ = tail_core_top_;
    extend_tail_core(tail_core_top_ * 0.5);
  }

  // Appends a piece; pieces stay descending and contiguous from 1.
  void push_piece(double lo, double hi, Piece::Kind kind) {
    if (hi <= lo) return;
    Piece p;
    p.lo = lo;
    p.hi = hi;
    p.kind = kind;
    p.mass = (kind == Piece::Zero) ? 0.0 : piece_mass(lo, hi, kind);
    p.cum_above = pieces_.empty()
                      ? 0.0
                      : pieces_.back().cum_above + pieces_.back().mass;
    pieces_.push_back(p);
    if (kind != Piece::Zero && lo < mass_floor_) mass_floor_ = lo;
  }

  double piece_mass(double lo, double hi, Piece::Kind kind) const {
    auto integrand = [this, kind](double x) {
      return (kind == Piece::Core || kind == Piece::TailCore)
                 ? g_(x)
                 : profile_locked_raw(x) * g_(x);
    };
    return quad::integrate_kernel(integrand, lo, hi,
                                  f_.breakpoints(lo, hi, 1 << 16), opts_.quad,
                                  "witness piece")
        .value;
  }

  // --- lazy extension -------------------------------------------------------

  void ensure_covered(double x) const {
    auto* self = const_cast<LevelSetImpl*>(this);
    while (!pieces_.empty() && pieces_.back().lo > x) {
      if (tail_core_top_ > 0.0) {
        self->extend_tail_core(x);
      } else if (truncated_) {
        // Below the truncation the profile is 0: one growing zero piece.
        self->push_piece(std::min(x * 0.5, pieces_.back().lo * 0.5),
                         pieces_.back().lo, Piece::Zero);
      } else {
        if (!self->extend_one_level()) continue;  // state switched
      }
    }
  }

  void extend_tail_core(double x) {
    while (tail_cursor_ > x) {
      const double lo = std::max(x * 0.5, tail_cursor_ * 0.5);
      push_piece(lo, tail_cursor_, Piece::TailCore);
      tail_cursor_ = lo;
    }
  }

  // --- evaluation (mutex held) ----------------------------------------------

  double profile_locked(double x) const { return profile_locked_raw(x); }

  // Piecewise profile straight from the level structure.
  double profile_locked_raw(double x) const {
    if (tail_core_top_ > 0.0 && x <= tail_core_top_) return 1.0;
    // levels_ descend; find the first index with b <= x.
    std::size_t lo = 0, hi = levels_.size();
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (levels_[mid].b <= x)
        hi = mid;
      else
        lo = mid + 1;
    }
    // Candidates: that level (core / band above its c) and the level above
    // it (its rise band extends below its b).
    for (std::size_t idx : {hi, hi == 0 ? hi : hi - 1}) {
      if (idx >= levels_.size()) continue;
      const Level& l = levels_[idx];
      if (x >= l.b && x <= l.c) return 1.0;
      const double eps_above = (idx == 0) ? top_eps_ : levels_[idx - 1].eps;
      if (x > l.c && eps_above > 0.0 && x < l.c + eps_above)
        return smooth_step((l.c + eps_above - x) / eps_above);
      if (l.eps > 0.0 && x < l.b && x > l.b - l.eps)
        return smooth_step((x - (l.b - l.eps)) / l.eps);
    }
    if (tail_core_top_ > 0.0) {
      // band above the tail core top
      const double eps = levels_.empty() ? top_eps_ : levels_.back().eps;
      if (eps > 0.0 && x > tail_core_top_ && x < tail_core_top_ + eps)
        return smooth_step((tail_core_top_ + eps - x) / eps);
    }
    return 0.0;
  }

  double theta_locked(double x) const {
    if (x >= 1.0) return 0.0;
    // Binary search the piece containing x (pieces descending by hi).
    std::size_t lo = 0, hi = pieces_.size();
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (pieces_[mid].lo <= x)
        hi = mid;
      else
        lo = mid + 1;
    }
    if (lo >= pieces_.size()) {
      // below everything: all recorded mass plus nothing known
      const Piece& last = pieces_.back();
      return last.cum_above + last.mass;
    }
    const Piece& p = pieces_[lo];
    double out = p.cum_above;
    if (x < p.hi && p.kind != Piece::Zero) {
      auto integrand = [this, &p](double t) {
        return (p.kind == Piece::Core || p.kind == Piece::TailCore)
                   ? g_(t)
                   : profile_locked_raw(t) * g_(t);
      };
      out += quad::integrate_kernel(integrand, x, p.hi,
                                    f_.breakpoints(x, p.hi, 1 << 16),
                                    opts_.quad, "theta partial piece")
                 .value;
    }
    return out;
  }

  FunctionHandle f_;
  int side_;
  WitnessOptions opts_;
  std::function<double(double)> g_;

  mutable std::mutex mutex_;
  std::vector<Level> levels_;
  std::vector<Piece> pieces_;  // descending, contiguous from 1
  double top_eps_ = 0.0;
  double tail_core_top_ = 0.0;  // > 0 once the tail-core regime starts
  double tail_cursor_ = 0.0;
  double mass_floor_ = 1.0;  // lowest point carrying tau mass so far
  bool truncated_ = false;
};

}  // namespace

WitnessBundle build_tau_from_function(const FunctionHandle& f,
                                      WitnessOptions opts) {
  quad::QuadConfig cls = opts.quad;
  const quad::ImproperVerdict pos =
      quad::improper_integral(fn_pos_part(f), cls);
  int side = 0;
  if (pos.kind == quad::ImproperKind::DivergentPlus) {
    side = +1;
  } else {
    const quad::ImproperVerdict neg =
        quad::improper_integral(fn_pos_part(fn_negate(f)), cls);
    if (neg.kind == quad::ImproperKind::DivergentPlus)
      side = -1;
    else
      throw NotDivergentPositive(
          "neither positive nor negative part of " + f.label() +
          " has a divergent integral (f+: " + quad::to_string(pos.kind) +
          ", f-: " + quad::to_string(neg.kind) + ")");
  }
  FunctionHandle g = side > 0 ? f : fn_negate(f);
  auto impl = std::make_shared<LevelSetImpl>(g, 1, opts);
  // side is recorded on the bundle; the internal construction always works
  // on the sign-normalized function.
  struct Tagged final : WitnessBundle::Impl {
    std::shared_ptr<LevelSetImpl> inner;
    int side;
    double tau(double x) const override { return inner->tau(x); }
    double profile(double x) const override { return inner->profile(x); }
    bool has_profile() const override { return true; }
    double theta(double x) const override { return inner->theta(x); }
    WitnessBundle::Source source() const override { return inner->source(); }
    bool flipped() const override { return side < 0; }
    double floor_covered() const override { return inner->floor_covered(); }
    bool is_truncated() const override { return inner->is_truncated(); }
    std::vector<std::pair<double, double>> cores() const override {
      return inner->cores();
    }
    std::vector<double> eps_list() const override { return inner->eps_list(); }
    GluingProfile snapshot() const override { return inner->snapshot(); }
    double excess(double lo, double hi) const override {
      return inner->excess(lo, hi);
    }
    std::vector<double> structure_edges(double lo, double hi,
                                        std::size_t budget) const override {
      return inner->structure_edges(lo, hi, budget);
    }
    std::string describe() const override { return inner->describe(); }
  };
  auto tagged = std::make_shared<Tagged>();
  tagged->inner = impl;
  tagged->side = side;
  return WitnessBundle(tagged);
}

// ---------------------------------------------------------------------------
// Weighted witnesses.

namespace {

class LinfImpl final : public WitnessBundle::Impl {
 public:
  LinfImpl(FunctionHandle w, WitnessOptions opts)
      : w_(std::move(w)),
        opts_(opts),
        prefix_([this](double x) { return 1.0 / w_(x); },
                nullptr, 1.0, opts.quad) {}

  double tau(double x) const override { return 1.0 / w_(x); }
  double theta(double x) const override { return prefix_.mass_from_top(x); }
  WitnessBundle::Source source() const override {
    return WitnessBundle::Source::WeightLinf;
  }
  double floor_covered() const override { return 0.0; }
  std::vector<double> structure_edges(double lo, double hi,
                                      std::size_t budget) const override {
    return w_.breakpoints(lo, hi, budget);
  }
  std::optional<WeightCriterion> criterion() const override { return crit_; }
  std::string describe() const override { return "1/(" + w_.label() + ")"; }

  WeightCriterion crit_;

 private:
  FunctionHandle w_;
  WitnessOptions opts_;
  PrefixCache prefix_;
};

class LpImpl final : public WitnessBundle::Impl {
 public:
  LpImpl(FunctionHandle w, double p, WitnessOptions opts)
      : w_(std::move(w)),
        p_(p),
        q_(p / (p - 1.0)),
        opts_(opts),
        den_prefix_([this](double x) { return std::pow(w_(x), -q_); },
                    nullptr, 1.0, opts.quad) {
    tau_half_ = std::pow(w_(0.5), -q_) / denominator(0.5);
  }

  // tau = w^-q / int_x^1 w^-q on (0,1/2], constant above. Since
  // tau = -D'/D with D(x) = int_x^1 w^-q, theta integrates in closed form:
  // int_x^{1/2} tau = log D(x) - log D(1/2).
  double tau(double x) const override {
    if (x >= 0.5) return tau_half_;
    return std::pow(w_(x), -q_) / denominator(x);
  }

  double theta(double x) const override {
    if (x >= 0.5) return tau_half_ * (1.0 - x);
    return tau_half_ * 0.5 + std::log(denominator(x)) -
           std::log(denominator(0.5));
  }

  WitnessBundle::Source source() const override {
    return WitnessBundle::Source::WeightLp;
  }
  double floor_covered() const override { return 0.0; }
  std::vector<double> structure_edges(double lo, double hi,
                                      std::size_t budget) const override {
    std::vector<double> out = w_.breakpoints(lo, hi, budget);
    if (0.5 > lo && 0.5 < hi) out.push_back(0.5);
    std::sort(out.begin(), out.end());
    return out;
  }
  std::optional<WeightCriterion> criterion() const override { return crit_; }
  std::string describe() const override {
    return "Lp(" + w_.label() + ", p=" + std::to_string(p_) + ")";
  }

  WeightCriterion crit_;

 private:
  double denominator(double x) const { return den_prefix_.mass_from_top(x); }

  FunctionHandle w_;
  double p_, q_;
  WitnessOptions opts_;
  PrefixCache den_prefix_;
  double tau_half_ = 0.0;
};

class L1Impl final : public WitnessBundle::Impl {
 public:
  // Level sets of a (normalized) weight vanishing at 0. Requires w to be
  // monotone on the probed range so the sets are intervals.
  L1Impl(FunctionHandle w, WitnessOptions opts, int realized_max = 40)
      : w_(std::move(w)), opts_(opts) {
    double wmax = 0.0;
    for (int i = 0; i <= 64; ++i)
      wmax = std::max(wmax, w_(std::ldexp(1.0, -28.0 * i / 64.0)));
    scale_ = wmax > 1.0 ? wmax : 1.0;

    auto wn = [this](double x) { return w_(x) / scale_; };
    // boundaries x_k: wn(x_k) = 1/k^2, k = 1, 2, ...
    double upper = 1.0;
    for (int k = 1; k <= realized_max; ++k) {
      const double target = 1.0 / (static_cast<double>(k + 1) * (k + 1));
      double lo = opts_.floor, hi = upper;
      if (wn(hi) <= target) continue;  // whole range already below
      if (wn(lo) > target) break;      // weight does not reach this level
      for (int it = 0; it < 200 && (hi - lo) > kTinyGap * hi; ++it) {
        const double mid = std::sqrt(lo * hi);
        (wn(mid) > target ? hi : lo) = mid;
      }
      const double x_next = 0.5 * (lo + hi);
      sets_.push_back({x_next, upper});
      upper = x_next;
    }
    if (sets_.empty())
      throw CriterionFails("weight has no realizable level sets above floor");

    // Smooth edges strictly inside each set; normalization by the measure.
    cores_.reserve(sets_.size());
    for (std::size_t k = 0; k < sets_.size(); ++k) {
      const double len = sets_[k].second - sets_[k].first;
      const double eps = 0.2 * len;
      GluingProfile::Core core;
      core.lo = sets_[k].first + eps;
      core.hi = sets_[k].second - eps;
      core.lo_width = eps * 0.9;
      core.hi_width = eps * 0.9;
      cores_.push_back(core);
      measures_.push_back(len);
    }
    profile_ = GluingProfile(cores_);
    // cumulative masses from the top set down
    cum_.assign(sets_.size() + 1, 0.0);
    for (std::size_t k = 0; k < sets_.size(); ++k)
      cum_[k + 1] = cum_[k] + set_mass(k);
  }

  double tau(double x) const override {
    const auto k = set_index(x);
    if (!k) return 0.0;
    return profile_shape(*k, x) / measures_[*k];
  }

  double theta(double x) const override {
    if (x >= sets_.front().second) return 0.0;
    const auto k = set_index(x);
    std::size_t full_above;
    if (k) {
      full_above = *k;
    } else {  // below the deepest realized set
      full_above = sets_.size();
      return cum_[full_above];
    }
    double out = cum_[full_above];
    auto integrand = [this, kk = *k](double t) {
      return profile_shape(kk, t) / measures_[kk];
    };
    out += quad::integrate_kernel(integrand, x, sets_[*k].second, {},
                                  opts_.quad, "L1 witness partial")
               .value;
    return out;
  }

  WitnessBundle::Source source() const override {
    return WitnessBundle::Source::WeightL1;
  }
  double floor_covered() const override { return sets_.back().first; }
  bool is_truncated() const override { return true; }  // finitely many sets
  std::vector<std::pair<double, double>> cores() const override {
    std::vector<std::pair<double, double>> out;
    for (const auto& c : cores_) out.emplace_back(c.lo, c.hi);
    return out;
  }
  GluingProfile snapshot() const override { return profile_; }
  bool has_profile() const override { return true; }
  double profile(double x) const override { return profile_(x); }
  std::vector<double> structure_edges(double lo, double hi,
                                      std::size_t budget) const override {
    (void)budget;
    return profile_.edges(lo, hi);
  }
  std::optional<WeightCriterion> criterion() const override { return crit_; }
  std::string describe() const override {
    return "L1-levels(" + w_.label() + ")";
  }

  WeightCriterion crit_;

 private:
  std::optional<std::size_t> set_index(double x) const {
    for (std::size_t k = 0; k < sets_.size(); ++k)
      if (x >= sets_[k].first && x < sets_[k].second) return k;
    return std::nullopt;
  }
  double profile_shape(std::size_t k, double x) const {
    const auto& c = cores_[k];
    if (x >= c.lo && x <= c.hi) return 1.0;
    if (x < c.lo && c.lo_width > 0.0 && x > c.lo - c.lo_width)
      return smooth_step((x - (c.lo - c.lo_width)) / c.lo_width);
    if (x > c.hi && c.hi_width > 0.0 && x < c.hi + c.hi_width)
      return smooth_step((c.hi + c.hi_width - x) / c.hi_width);
    return 0.0;
  }
  double set_mass(std::size_t k) const {
    auto integrand = [this, k](double t) {
      return profile_shape(k, t) / measures_[k];
    };
    return quad::integrate_kernel(integrand, sets_[k].first, sets_[k].second,
                                  {}, opts_.quad, "L1 witness set")
        .value;
  }

  FunctionHandle w_;
  WitnessOptions opts_;
  double scale_ = 1.0;
  std::vector<std::pair<double, double>> sets_;  // descending [x_{k+1}, x_k]
  std::vector<GluingProfile::Core> cores_;
  std::vector<double> measures_;
  std::vector<double> cum_;
  GluingProfile profile_;
};

}  // namespace

WitnessBundle build_tau_from_weight(const WeightSpec& spec,
                                    WitnessOptions opts) {
  const double p = spec.p;
  if (std::isinf(p)) {
    FunctionHandle inv =
        fn_from("1/(" + spec.w.label() + ")",
                [w = spec.w](double x) { return 1.0 / w(x); });
    const quad::ImproperVerdict v = quad::improper_integral(inv, opts.quad);
    if (v.kind != quad::ImproperKind::DivergentPlus)
      throw CriterionFails(std::string("int 1/w is ") + quad::to_string(v.kind) +
                           "; L^inf_w contains no non-integrable element");
    auto impl = std::make_shared<LinfImpl>(spec.w, opts);
    impl->crit_.q = 1.0;
    impl->crit_.construction_exponent = v.kind;
    impl->crit_.statement_exponent = v.kind;
    return WitnessBundle(impl);
  }
  if (p > 1.0) {
    const double q = p / (p - 1.0);
    auto powered = [w = spec.w](double e) {
      return fn_from("w^(" + std::to_string(e) + ")",
                     [w, e](double x) { return std::pow(w(x), e); });
    };
    const quad::ImproperVerdict vq =
        quad::improper_integral(powered(-q), opts.quad);
    const quad::ImproperVerdict vs =
        quad::improper_integral(powered(-1.0 / (p - 1.0)), opts.quad);
    if (vq.kind != quad::ImproperKind::DivergentPlus)
      throw CriterionFails(std::string("int w^(-p/(p-1)) is ") +
                           quad::to_string(vq.kind) +
                           "; construction criterion rejects this weight");
    auto impl = std::make_shared<LpImpl>(spec.w, p, opts);
    impl->crit_.q = q;
    impl->crit_.construction_exponent = vq.kind;
    impl->crit_.statement_exponent = vs.kind;
    return WitnessBundle(impl);
  }
  if (p == 1.0) {
    // Criterion: w(0+) = 0, probed at the floor scale.
    const double w_small = spec.w(1e-10);
    const double w_one = spec.w(1.0);
    if (!(w_small < 1e-4 * std::max(1.0, w_one)))
      throw CriterionFails("w(0+) does not vanish (w(1e-10)=" +
                           std::to_string(w_small) + "); L^1_w equals L^1");
    auto impl = std::make_shared<L1Impl>(spec.w, opts);
    impl->crit_.q = 1.0;
    impl->crit_.construction_exponent = quad::ImproperKind::DivergentPlus;
    impl->crit_.statement_exponent = quad::ImproperKind::DivergentPlus;
    return WitnessBundle(impl);
  }
  throw DomainError("build_tau_from_weight: p must be in [1, inf]");
}

HolderReport holder_check(const WeightSpec& spec, const FunctionHandle& tau,
                          double eps, quad::QuadConfig cfg) {
  if (!(spec.p > 1.0) || std::isinf(spec.p))
    throw DomainError("holder_check: p must be in (1, inf)");
  HolderReport rep;
  rep.p = spec.p;
  rep.q = spec.p / (spec.p - 1.0);
  const FunctionHandle& w = spec.w;
  rep.lhs = quad::integrate(tau, eps, 1.0, cfg).value;
  auto wtau_p = [w, tau, p = spec.p](double x) {
    return std::pow(w(x) * tau(x), p);
  };
  auto w_negq = [w, q = rep.q](double x) { return std::pow(w(x), -q); };
  rep.int_wtau_p =
      quad::integrate_kernel(wtau_p, eps, 1.0, {}, cfg, "(w tau)^p").value;
  rep.int_w_negq =
      quad::integrate_kernel(w_negq, eps, 1.0, {}, cfg, "w^-q").value;
  rep.rhs = std::pow(rep.int_wtau_p, 1.0 / spec.p) *
            std::pow(rep.int_w_negq, 1.0 / rep.q);
  rep.holds = rep.lhs <= rep.rhs * (1.0 + 1e-9) + 1e-12;
  return rep;
}

PartitionSequence build_partition(const WitnessBundle& bundle, int K,
                                  double tol) {
  if (K < 0) throw DomainError("build_partition: negative depth");
  PartitionSequence part{{1.0}, bundle};
  for (int k = 1; k <= K; ++k) {
    const double target = static_cast<double>(k);
    double hi = part.alphas.back();  // theta(hi) = k-1 < target
    double lo = hi;
    // expand the bracket downward until theta(lo) >= target
    double prev_th = bundle.theta(hi);
    for (;;) {
      lo *= 0.5;
      if (lo < 1e-300)
        throw RangeExhausted("partition bracket underflow", k - 1);
      const double th = bundle.theta(lo);
      if (th >= target) break;
      // theta no longer grows below the structurally covered range
      if (bundle.truncated() && lo < bundle.coverage_floor() &&
          th <= prev_th + 1e-15)
        throw RangeExhausted(
            "theta reaches only " + std::to_string(th) +
                " above the covered range; requested k=" + std::to_string(k),
            k - 1);
      prev_th = th;
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = std::sqrt(lo * hi);  // geometric: scales span decades
      const double th = bundle.theta(mid);
      if (std::fabs(th - target) < tol) {
        lo = hi = mid;
        break;
      }
      (th > target ? lo : hi) = mid;
      if ((hi - lo) < 1e-18 * hi) break;
    }
    const double alpha = 0.5 * (lo + hi);
    if (std::fabs(bundle.theta(alpha) - target) > std::max(tol, 1e-7))
      throw RangeExhausted("bisection could not pin theta = " +
                               std::to_string(target),
                           k - 1);
    part.alphas.push_back(alpha);
  }
  return part;
}

int max_realizable_depth(const WitnessBundle& bundle) {
  const double floor = std::max(bundle.coverage_floor(), 1e-12);
  return static_cast<int>(std::floor(bundle.theta(floor)));
}

}  // namespace witness
}  // namespace hpf
