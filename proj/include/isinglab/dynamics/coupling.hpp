#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>

#include "isinglab/dynamics/simulate.hpp"

namespace isinglab {

struct CouplingOptions {
  std::optional<SpinConfiguration> top_start;     // default all-plus
  std::optional<SpinConfiguration> bottom_start;  // default all-minus
  bool stop_when_coupled = false;
};

struct CouplingRun {
  SpinConfiguration top;
  SpinConfiguration bottom;
  bool coupled = false;
  std::optional<double> tau_couple;
  std::uint64_t events = 0;
  // Events after which bottom <= top failed at the updated site. Order can
  // only break where a spin changed, so checking that site is a full check.
  std::uint64_t order_violations = 0;
};

// Two heat-bath chains driven by one event stream.
inline CouplingRun grand_coupling(const BoundaryCondition& bc, double beta, double t_end,
                                  std::uint64_t seed, const CouplingOptions& opt = {},
                                  RateRule rule = RateRule::heat_bath) {
  if (rule != RateRule::heat_bath)
    throw std::invalid_argument("grand coupling is monotone only for the heat-bath rule");
  const auto& r = bc.region();
  CouplingRun run{opt.top_start.value_or(SpinConfiguration::uniform(r, 1)),
                  opt.bottom_start.value_or(SpinConfiguration::uniform(r, -1)), false, std::nullopt, 0, 0};
  require_same_region(run.top, bc);
  require_same_region(run.bottom, bc);
  auto& top = run.top.spins();
  auto& bot = run.bottom.spins();
  std::size_t disagree = 0;
  for (std::size_t k = 0; k < top.size(); ++k) disagree += top[k] != bot[k];
  if (disagree == 0) {
    run.coupled = true;
    run.tau_couple = 0.0;
    if (opt.stop_when_coupled) return run;
  }
  SiteUpdater upd(bc, beta, RateRule::heat_bath);
  EventClock clock(top.size(), seed);
  double t = 0;
  while (true) {
    ClockEvent ev = clock.next();
    t += ev.dt;
    if (t > t_end) break;
    std::size_t k = ev.site;
    bool was = top[k] != bot[k];
    top[k] = upd.heat_bath_value(top, k, ev.u);
    bot[k] = upd.heat_bath_value(bot, k, ev.u);
    bool now = top[k] != bot[k];
    if (bot[k] > top[k]) ++run.order_violations;
    disagree = disagree - was + now;
    ++run.events;
    if (disagree == 0 && !run.coupled) {
      run.coupled = true;
      run.tau_couple = t;
      if (opt.stop_when_coupled) break;
    }
  }
  return run;
}

// Number of clock ticks until the extremal chains meet, or nullopt if they
// have not met after max_events ticks. Waiting times are not drawn: they are
// independent of the jump chain, so the coupling time is Gamma(events, |region|).
inline std::optional<std::uint64_t> coupling_events(const BoundaryCondition& bc, double beta,
                                                    std::uint64_t max_events, std::uint64_t seed) {
  const auto& r = bc.region();
  std::vector<Spin> top(r->size(), 1), bot(r->size(), -1);
  std::size_t disagree = top.size();
  SiteUpdater upd(bc, beta, RateRule::heat_bath);
  EventClock clock(top.size(), seed);
  for (std::uint64_t m = 1; m <= max_events; ++m) {
    ClockEvent ev = clock.next_jump();
    std::size_t k = ev.site;
    bool was = top[k] != bot[k];
    top[k] = upd.heat_bath_value(top, k, ev.u);
    bot[k] = upd.heat_bath_value(bot, k, ev.u);
    disagree = disagree - was + (top[k] != bot[k]);
    if (disagree == 0) return m;
  }
  return std::nullopt;
}

// Standard normal by Box-Muller (one of the pair is discarded).
template <class G>
double standard_normal(G& g) {
  double u1 = 1.0 - uniform01(g), u2 = uniform01(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

// Gamma(shape, 1) by Marsaglia-Tsang; small integer shapes by summing exponentials.
template <class G>
double sample_gamma(G& g, double shape) {
  if (shape < 1) throw std::invalid_argument("gamma shape below 1 unsupported");
  if (shape < 16 && shape == std::floor(shape)) {
    double s = 0;
    for (int i = 0; i < static_cast<int>(shape); ++i) s -= std::log1p(-uniform01(g));
    return s;
  }
  const double d = shape - 1.0 / 3.0, c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x = standard_normal(g), v = 1 + c * x;
    if (v <= 0) continue;
    v = v * v * v;
    double u = uniform01(g);
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

struct CftpOptions {
  std::uint64_t initial_events = 0;  // 0: eight ticks per site
  std::uint64_t max_events = std::uint64_t{1} << 30;
};

struct CftpOutcome {
  std::optional<SpinConfiguration> sample;  // empty when the cap was hit
  std::uint64_t events = 0;                 // length of the last epoch
  int epochs = 0;
  bool coalesced() const { return sample.has_value(); }
};

// Randomness of the tick at "time" -k (k >= 1) of a backward run. Regenerated
// from (seed, k) so every epoch sees the same ticks.
struct BackwardTick {
  std::size_t site;
  double u;
};

inline BackwardTick backward_tick(std::uint64_t seed, std::uint64_t k, std::size_t n) {
  struct Gen {
    std::uint64_t key, ctr;
    std::uint64_t operator()() { return counter_word(key, ctr++); }
  } g{seed, k * 8};
  std::size_t site = static_cast<std::size_t>(uniform_below(g, n));
  return {site, to_unit(counter_word(seed, k * 8 + 7))};
}

// Monotone coupling from the past for the random-scan heat-bath chain (the
// jump chain of the uniformized dynamics). Epoch lengths double.
inline CftpOutcome cftp_sample(const BoundaryCondition& bc, double beta, std::uint64_t seed,
                               const CftpOptions& opt = {}) {
  const auto& r = bc.region();
  const std::size_t n = r->size();
  SiteUpdater upd(bc, beta, RateRule::heat_bath);
  CftpOutcome out;
  std::uint64_t m = opt.initial_events ? opt.initial_events : 8 * n;
  std::vector<Spin> top(n), bot(n);
  while (m <= opt.max_events) {
    ++out.epochs;
    out.events = m;
    std::fill(top.begin(), top.end(), Spin{1});
    std::fill(bot.begin(), bot.end(), Spin{-1});
    for (std::uint64_t k = m; k >= 1; --k) {
      BackwardTick tick = backward_tick(seed, k, n);
      top[tick.site] = upd.heat_bath_value(top, tick.site, tick.u);
      bot[tick.site] = upd.heat_bath_value(bot, tick.site, tick.u);
    }
    if (top == bot) {
      out.sample = SpinConfiguration(r, top);
      return out;
    }
    m *= 2;
  }
  return out;
}

}  // namespace isinglab
