#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "isinglab/core/boundary.hpp"
#include "isinglab/core/configuration.hpp"
#include "isinglab/core/hamiltonian.hpp"
#include "isinglab/dynamics/rates.hpp"
#include "isinglab/dynamics/rng.hpp"

namespace isinglab {

// One tick of the global clock: the waiting time since the previous tick,
// the site it lands on and the uniform that drives the update.
struct ClockEvent {
  double dt;
  std::size_t site;
  double u;
};

// Uniformized clock: rate |region|, uniform site per tick. Equivalent in
// law to independent rate-one clocks at every site.
class EventClock {
 public:
  EventClock(std::size_t sites, std::uint64_t seed) : n_(sites), rng_(seed) {}
  ClockEvent next() {
    double dt = -std::log1p(-uniform01(rng_)) / static_cast<double>(n_);
    std::size_t k = static_cast<std::size_t>(uniform_below(rng_, n_));
    double u = uniform01(rng_);
    return {dt, k, u};
  }
  // Site and uniform only; used when waiting times are not needed.
  ClockEvent next_jump() {
    std::size_t k = static_cast<std::size_t>(uniform_below(rng_, n_));
    return {0.0, k, uniform01(rng_)};
  }
  Xoshiro256& engine() { return rng_; }

 private:
  std::size_t n_;
  Xoshiro256 rng_;
};

// Single-site update rules acting on raw spin vectors.
class SiteUpdater {
 public:
  SiteUpdater(const BoundaryCondition& bc, double beta, RateRule rule)
      : region_(bc.region().get()), tau_(&bc.values()), rule_(rule), hb_(beta), metro_(beta) {}

  void set_boundary(const BoundaryCondition& bc) { tau_ = &bc.values(); }

  // Returns true if the spin changed.
  bool apply(std::vector<Spin>& s, std::size_t k, double u) const {
    int h = local_field(*region_, s, *tau_, k);
    Spin old = s[k];
    if (rule_ == RateRule::heat_bath) {
      s[k] = u < hb_(h) ? Spin{1} : Spin{-1};
    } else if (u < metro_(2 * s[k] * h)) {
      s[k] = static_cast<Spin>(-s[k]);
    }
    return s[k] != old;
  }

  Spin heat_bath_value(const std::vector<Spin>& s, std::size_t k, double u) const {
    return u < hb_(local_field(*region_, s, *tau_, k)) ? Spin{1} : Spin{-1};
  }

 private:
  const LatticeRegion* region_;
  const std::vector<Spin>* tau_;
  RateRule rule_;
  HeatBathTable hb_;
  MetropolisTable metro_;
};

struct SimulationResult {
  SpinConfiguration state;
  std::uint64_t events = 0;
};

inline SimulationResult simulate_counted(const BoundaryCondition& bc, double beta, RateRule rule,
                                         const SpinConfiguration& sigma0, double t_end,
                                         std::uint64_t seed) {
  require_same_region(sigma0, bc);
  if (!(t_end >= 0)) throw std::invalid_argument("t_end must be nonnegative");
  SimulationResult res{sigma0, 0};
  SiteUpdater upd(bc, beta, rule);
  EventClock clock(sigma0.size(), seed);
  double t = 0;
  while (true) {
    ClockEvent ev = clock.next();
    t += ev.dt;
    if (t > t_end) break;
    upd.apply(res.state.spins(), ev.site, ev.u);
    ++res.events;
  }
  return res;
}

inline SpinConfiguration simulate(const BoundaryCondition& bc, double beta, RateRule rule,
                                  const SpinConfiguration& sigma0, double t_end, std::uint64_t seed) {
  return simulate_counted(bc, beta, rule, sigma0, t_end, seed).state;
}

}  // namespace isinglab
