#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "isinglab/dynamics/simulate.hpp"

namespace isinglab {

// Run the dynamics inside `sites` only for `duration`; clock ticks that land
// elsewhere are drawn and discarded.
struct CensorEntry {
  std::vector<std::size_t> sites;
  double duration = 0;
  std::string label;
};

// Replace boundary values from this point of the schedule on. With
// `restore` set the listed sites go back to the original boundary values
// (the spins given in `values` are ignored).
struct BoundarySwap {
  std::vector<std::pair<Site, Spin>> values;
  std::string label;
  bool restore = false;
};

using ScheduleItem = std::variant<CensorEntry, BoundarySwap>;

class CensorSchedule {
 public:
  explicit CensorSchedule(RegionPtr region) : region_(std::move(region)) {}

  static CensorSchedule full(RegionPtr r, double duration) {
    CensorSchedule s(r);
    s.add(r->sites(), duration, "full");
    return s;
  }

  CensorSchedule& add(const std::vector<Site>& sub, double duration, std::string label = {}) {
    if (!(duration >= 0)) throw std::invalid_argument("censor entry duration must be nonnegative");
    CensorEntry e{{}, duration, std::move(label)};
    for (Site s : sub) {
      auto k = region_->index_of(s);
      if (!k) throw RegionMismatch("censor sub-region is not contained in the region");
      e.sites.push_back(*k);
    }
    std::sort(e.sites.begin(), e.sites.end());
    e.sites.erase(std::unique(e.sites.begin(), e.sites.end()), e.sites.end());
    items_.push_back(std::move(e));
    return *this;
  }

  CensorSchedule& add_indices(std::vector<std::size_t> sites, double duration, std::string label = {}) {
    if (!(duration >= 0)) throw std::invalid_argument("censor entry duration must be nonnegative");
    for (auto k : sites)
      if (k >= region_->size()) throw RegionMismatch("censor sub-region is not contained in the region");
    std::sort(sites.begin(), sites.end());
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
    items_.push_back(CensorEntry{std::move(sites), duration, std::move(label)});
    return *this;
  }

  CensorSchedule& swap_boundary(std::vector<std::pair<Site, Spin>> values, std::string label = {},
                                bool restore = false) {
    for (auto& [b, s] : values)
      if (!region_->boundary_index_of(b)) throw RegionMismatch("boundary swap site is not on the boundary");
    items_.push_back(BoundarySwap{std::move(values), std::move(label), restore});
    return *this;
  }

  const RegionPtr& region() const { return region_; }
  const std::vector<ScheduleItem>& items() const { return items_; }

  std::size_t entries() const {
    return static_cast<std::size_t>(std::count_if(items_.begin(), items_.end(), [](const auto& it) {
      return std::holds_alternative<CensorEntry>(it);
    }));
  }

  double total_duration() const {
    double t = 0;
    for (const auto& it : items_)
      if (auto e = std::get_if<CensorEntry>(&it)) t += e->duration;
    return t;
  }

 private:
  RegionPtr region_;
  std::vector<ScheduleItem> items_;
};

// Walks a schedule along one global clock. The entry in force at absolute
// time t is the first one whose end time is >= t.
class ScheduleCursor {
 public:
  ScheduleCursor(const CensorSchedule& s, const BoundaryCondition& bc, bool apply_swaps)
      : sched_(s), original_(bc), bc_(bc), apply_swaps_(apply_swaps), inside_(s.region()->size(), 0) {
    advance_to_entry();
  }

  // Moves forward to the entry containing time t. Returns false past the end.
  bool seek(double t) {
    while (current_ && t > end_) {
      ++pos_;
      advance_to_entry();
    }
    return current_ != nullptr;
  }

  bool inside(std::size_t k) const { return inside_[k] != 0; }
  const BoundaryCondition& boundary() const { return bc_; }
  bool boundary_changed() {
    bool c = changed_;
    changed_ = false;
    return c;
  }

 private:
  void advance_to_entry() {
    if (current_)
      for (auto k : current_->sites) inside_[k] = 0;
    current_ = nullptr;
    const auto& items = sched_.items();
    for (; pos_ < items.size(); ++pos_) {
      if (auto sw = std::get_if<BoundarySwap>(&items[pos_])) {
        if (apply_swaps_) {
          auto values = sw->values;
          if (sw->restore)
            for (auto& [b, v] : values) v = original_.at(b);
          bc_ = bc_.with_values(values, sw->label);
          changed_ = true;
        }
        continue;
      }
      current_ = &std::get<CensorEntry>(items[pos_]);
      end_ += current_->duration;
      for (auto k : current_->sites) inside_[k] = 1;
      return;
    }
  }

  const CensorSchedule& sched_;
  BoundaryCondition original_;
  BoundaryCondition bc_;
  bool apply_swaps_;
  std::vector<char> inside_;
  std::size_t pos_ = 0;
  const CensorEntry* current_ = nullptr;
  double end_ = 0;
  bool changed_ = false;
};

inline SpinConfiguration censored_simulate(const BoundaryCondition& bc, double beta,
                                           const CensorSchedule& schedule,
                                           const SpinConfiguration& sigma0, std::uint64_t seed,
                                           RateRule rule = RateRule::heat_bath,
                                           bool apply_swaps = true) {
  require_same_region(sigma0, bc);
  if (!same_region(schedule.region(), bc.region()))
    throw RegionMismatch("schedule and boundary condition live on different regions");
  SpinConfiguration state = sigma0;
  ScheduleCursor cursor(schedule, bc, apply_swaps);
  SiteUpdater upd(cursor.boundary(), beta, rule);
  EventClock clock(state.size(), seed);
  double t = 0;
  while (true) {
    ClockEvent ev = clock.next();
    t += ev.dt;
    if (!cursor.seek(t)) break;
    if (cursor.boundary_changed()) upd.set_boundary(cursor.boundary());
    if (cursor.inside(ev.site)) upd.apply(state.spins(), ev.site, ev.u);
  }
  return state;
}

// Extremal chains under a censored schedule, repeated back to back until
// they meet. Returns the meeting time or nullopt after max_repeats passes.
inline std::optional<double> censored_coupling_time(const BoundaryCondition& bc, double beta,
                                                    const CensorSchedule& schedule,
                                                    std::uint64_t seed, int max_repeats,
                                                    bool apply_swaps = true) {
  const auto& r = bc.region();
  std::vector<Spin> top(r->size(), 1), bot(r->size(), -1);
  std::size_t disagree = top.size();
  EventClock clock(top.size(), seed);
  double t0 = 0, t = 0;
  for (int rep = 0; rep < max_repeats; ++rep) {
    ScheduleCursor cursor(schedule, bc, apply_swaps);
    SiteUpdater upd(cursor.boundary(), beta, RateRule::heat_bath);
    while (true) {
      ClockEvent ev = clock.next();
      t += ev.dt;
      if (!cursor.seek(t - t0)) break;
      if (cursor.boundary_changed()) upd.set_boundary(cursor.boundary());
      std::size_t k = ev.site;
      if (!cursor.inside(k)) continue;
      bool was = top[k] != bot[k];
      top[k] = upd.heat_bath_value(top, k, ev.u);
      bot[k] = upd.heat_bath_value(bot, k, ev.u);
      disagree = disagree - was + (top[k] != bot[k]);
      if (disagree == 0) return t;
    }
    // the tick that overran this pass is dropped (the clock is memoryless)
    t0 += schedule.total_duration();
    t = t0;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Multi-scale schedule: L_n = 2^n - 1, kappa_N = sqrt(kappa N),
// R_n = L_n x ceil(kappa_N sqrt L_n), Q_n = L_n x ceil(kappa_N sqrt L_{n+1}).

enum class DeltaFlip { none, within, between };

inline std::string to_string(DeltaFlip f) {
  return f == DeltaFlip::none ? "none" : f == DeltaFlip::within ? "within" : "between";
}

struct RecursiveScheduleParams {
  int N = 0;
  double kappa = 1;
  std::optional<int> n_base;  // default: smallest n with L_n >= floor((ln L_N)^3)
  double t_base = 1;          // duration of one base-scale run
  double growth_c = 0.05;     // t_{n+1} = max(4, exp(c kappa_N^2)) t_n
  double s = 1;               // |Delta| = ceil(s alpha^2) with alpha = 2 sqrt2 kappa_N
  DeltaFlip flip = DeltaFlip::none;
};

struct ScaleInfo {
  int n;
  int L;
  int r_height;
  int q_height;
  double t_r;  // duration of one R_n run
};

struct RecursiveSchedule {
  RegionPtr region;
  int n_base = 0;
  double kappa_N = 0;
  std::vector<ScaleInfo> scales;  // n_base..N
  int delta_length = 0;
  CensorSchedule schedule;
};

inline int scale_length(int n) { return (1 << n) - 1; }

inline int base_scale(int N) {
  const int LN = scale_length(N);
  const double lg = std::log(static_cast<double>(LN));
  const long target = static_cast<long>(std::floor(lg * lg * lg));
  int n = 1;
  while (scale_length(n) < target) ++n;
  return n;
}

namespace detail {

struct Rect {
  int x0, y0, w, h;  // lower-left site, width, height
  std::vector<Site> sites() const {
    std::vector<Site> s;
    for (int y = y0; y < y0 + h; ++y)
      for (int x = x0; x < x0 + w; ++x) s.push_back({x, y});
    return s;
  }
};

struct Step {
  std::vector<Rect> rects;
  double duration;
  std::string label;
  std::optional<bool> delta_on;  // set: a Delta flip marker instead of a run
};

class ScheduleBuilder {
 public:
  ScheduleBuilder(const RecursiveScheduleParams& p, double kappa_N, int n0)
      : p_(p), kN_(kappa_N), n0_(n0) {}

  int r_height(int n) const { return static_cast<int>(std::ceil(kN_ * std::sqrt(scale_length(n)))); }
  int q_height(int n) const { return static_cast<int>(std::ceil(kN_ * std::sqrt(scale_length(n + 1)))); }
  double factor() const { return std::max(1.0, std::exp(p_.growth_c * kN_ * kN_) / 2.0 - 1.0); }

  std::vector<Step> emit_r(int n, int x0, int y0, bool on_south_boundary, int delta_len) const {
    std::vector<Step> out;
    if (n == n0_) {
      out.push_back({{Rect{x0, y0, scale_length(n), r_height(n)}}, p_.t_base, "R" + std::to_string(n), std::nullopt});
      return out;
    }
    const int m = n - 1, Lm = scale_length(m);
    auto centr = emit_q(m, x0 + (Lm + 1) / 2, y0);
    auto left = emit_q(m, x0, y0);
    auto right = emit_q(m, x0 + Lm + 1, y0);
    const bool flip = p_.flip != DeltaFlip::none && on_south_boundary && delta_len > 0;
    if (flip && p_.flip == DeltaFlip::within) out.push_back({{}, 0, "delta-on", true});
    for (auto& s : centr) {
      s.duration *= factor();
      s.label = "centr/" + s.label;
      out.push_back(std::move(s));
    }
    if (flip) out.push_back({{}, 0, p_.flip == DeltaFlip::within ? "delta-off" : "delta-on",
                             p_.flip != DeltaFlip::within});
    for (std::size_t i = 0; i < left.size(); ++i) {
      Step s = left[i];
      s.rects.insert(s.rects.end(), right[i].rects.begin(), right[i].rects.end());
      s.label = "sides/" + s.label;
      out.push_back(std::move(s));
    }
    if (flip && p_.flip == DeltaFlip::between) out.push_back({{}, 0, "delta-off", false});
    return out;
  }

  // Q_n as its top translate of R_n (A) followed by the bottom one (B).
  std::vector<Step> emit_q(int n, int x0, int y0) const {
    auto a = emit_r(n, x0, y0 + q_height(n) - r_height(n), false, 0);
    auto b = emit_r(n, x0, y0, false, 0);
    for (auto& s : a) s.label = "A/" + s.label;
    for (auto& s : b) s.label = "B/" + s.label;
    a.insert(a.end(), b.begin(), b.end());
    return a;
  }

 private:
  const RecursiveScheduleParams& p_;
  double kN_;
  int n0_;
};

}  // namespace detail

inline RecursiveSchedule recursive_schedule(const RecursiveScheduleParams& p) {
  if (p.N < 1 || p.N > 20) throw std::invalid_argument("N must lie in 1..20");
  if (!(p.kappa > 0) || !(p.t_base > 0) || !(p.s > 0) || !(p.growth_c >= 0))
    throw std::invalid_argument("schedule parameters must be positive");
  const int n0 = p.n_base.value_or(base_scale(p.N));
  if (n0 < 1) throw std::invalid_argument("base scale must be at least 1");
  if (p.N < n0) throw std::invalid_argument("N is below the base scale N0 = " + std::to_string(n0));
  const double kN = std::sqrt(p.kappa * p.N);
  detail::ScheduleBuilder b(p, kN, n0);
  const int LN = scale_length(p.N);
  auto region = LatticeRegion::box(LN, b.r_height(p.N));

  const double alpha = 2.0 * std::sqrt(2.0) * kN;
  const int dlen = std::min(LN, static_cast<int>(std::ceil(p.s * alpha * alpha)));

  RecursiveSchedule out{region, n0, kN, {}, dlen, CensorSchedule(region)};
  double t = p.t_base;
  for (int n = n0; n <= p.N; ++n) {
    out.scales.push_back({n, scale_length(n), b.r_height(n), b.q_height(n), t});
    t = (b.factor() + 1.0) * 2.0 * t;
  }

  // Delta: South boundary sites centred on the middle column of R_N.
  const int mid = (LN + 1) / 2;
  std::vector<std::pair<Site, Spin>> delta;
  for (int x = mid - dlen / 2; x < mid - dlen / 2 + dlen; ++x) delta.push_back({Site{x, 0}, Spin{-1}});

  for (auto& s : b.emit_r(p.N, 1, 1, true, dlen)) {
    if (s.delta_on) {
      out.schedule.swap_boundary(delta, s.label, !*s.delta_on);
      continue;
    }
    std::vector<Site> sites;
    for (const auto& r : s.rects) {
      auto v = r.sites();
      sites.insert(sites.end(), v.begin(), v.end());
    }
    out.schedule.add(sites, s.duration, s.label);
  }
  return out;
}

}  // namespace isinglab
