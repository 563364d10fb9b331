#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "isinglab/dynamics/coupling.hpp"
#include "isinglab/dynamics/generator.hpp"
#include "isinglab/dynamics/packed.hpp"
#include "isinglab/harness/stats.hpp"

namespace isinglab {

// Dyadic grid with mantissas 1, 9/8, ..., 15/8: the smallest grid point >= t.
inline double dyadic_ceil(double t) {
  if (t <= 0) return 0;
  int e = 0;
  std::frexp(t, &e);  // t = f 2^e with f in [0.5, 1)
  double base = std::ldexp(1.0, e - 1);
  for (int m = 8; m <= 16; ++m) {
    double g = base * m / 8.0;
    if (g >= t) return g;
  }
  return 2 * base;
}

struct MixingOptions {
  std::uint64_t max_events = std::uint64_t{1} << 34;  // per replica
};

struct MixingEstimate {
  double t_hat = 0;
  double ci_low = 0;
  double ci_high = 0;
  double uncoupled_at_t_hat = 0;  // empirical P(tau > t_hat)
  std::size_t replicas = 0;
  std::size_t censored = 0;       // replicas that never coupled within budget
  std::vector<double> coupling_times;  // +inf for censored replicas
};

// Coupling time for one replica seed: jump count of the extremal heat-bath
// chains, converted to continuous time by a Gamma draw (waiting times are
// independent of the jump chain). +inf when the event cap is reached.
inline double coupling_time_for_seed(const BoundaryCondition& bc, double beta, std::uint64_t s,
                                     const MixingOptions& opt = {}) {
  auto m = coupling_events(bc, beta, opt.max_events, s);
  if (!m) return std::numeric_limits<double>::infinity();
  Xoshiro256 g(mix64(s ^ 0x5851F42D4C957F2Dull));
  return sample_gamma(g, static_cast<double>(*m)) / static_cast<double>(bc.region()->size());
}

inline double replica_coupling_time(const BoundaryCondition& bc, double beta, std::uint64_t seed,
                                    std::uint64_t i, const MixingOptions& opt = {}) {
  return coupling_time_for_seed(bc, beta, replica_seed(seed, i), opt);
}

// t_hat: smallest grid time at which at most a fraction eps of the replicas
// are still uncoupled. The interval maps the Wilson interval for the
// proportion eps back to order statistics of the coupling times.
inline MixingEstimate summarize_coupling_times(std::vector<double> times, double eps) {
  if (!(eps > 0 && eps < 1)) throw std::invalid_argument("epsilon must lie in (0,1)");
  MixingEstimate est;
  est.replicas = times.size();
  if (times.empty()) throw std::invalid_argument("no replicas");
  est.coupling_times = times;
  std::sort(times.begin(), times.end());
  const std::size_t R = times.size();
  for (double t : times) est.censored += std::isinf(t);
  const auto allowed = static_cast<std::size_t>(std::floor(eps * static_cast<double>(R) + 1e-12));
  if (est.censored > allowed) throw BudgetExhausted("replica budget exhausted before coupling");
  auto order_stat = [&](std::size_t rank) {  // rank in 1..R
    rank = std::clamp<std::size_t>(rank, 1, R);
    return times[rank - 1];
  };
  est.t_hat = dyadic_ceil(order_stat(R - allowed));
  std::size_t above = 0;
  for (double t : times) above += t > est.t_hat;
  est.uncoupled_at_t_hat = static_cast<double>(above) / static_cast<double>(R);
  auto [lo, hi] = wilson_interval(eps * static_cast<double>(R), static_cast<double>(R));
  auto rank_of = [&](double p) { return static_cast<std::size_t>(std::ceil((1 - p) * static_cast<double>(R))); };
  est.ci_low = dyadic_ceil(order_stat(rank_of(hi)));
  double h = order_stat(rank_of(lo));
  est.ci_high = std::isinf(h) ? h : dyadic_ceil(h);
  return est;
}

inline MixingEstimate estimate_mixing_time(const BoundaryCondition& bc, double beta, double eps,
                                           std::size_t replicas, std::uint64_t seed,
                                           const MixingOptions& opt = {}) {
  std::vector<double> t(replicas);
  for (std::size_t i = 0; i < replicas; ++i) t[i] = replica_coupling_time(bc, beta, seed, i, opt);
  return summarize_coupling_times(std::move(t), eps);
}

// ---------------------------------------------------------------------------
// Spin autocorrelation rho(t) = Var(E[s_0(t) | s(0)]) at the centre of an
// L x L box with plus boundary, s(0) drawn from the box Gibbs measure.

struct AutocorrPoint {
  double t;
  double rho;
  double stderr;
};

inline Site box_center(int L) { return {(L + 1) / 2, (L + 1) / 2}; }

// One replica: [s_0(0), a_0(t_1) b_0(t_1), ..., a_0(t_T) b_0(t_T)] where a and
// b are independent continuations of one exact plus-box sample.
inline std::vector<double> autocorrelation_replica(const BoundaryCondition& bc, double beta, std::size_t origin,
                                                   const std::vector<double>& time_grid, std::uint64_t rs) {
  auto start = cftp_sample(bc, beta, rs);
  if (!start.coalesced()) throw BudgetExhausted("CFTP epoch cap reached for the autocorrelation start");
  std::vector<double> out{static_cast<double>((*start.sample)[origin])};
  SpinConfiguration a = *start.sample, b = *start.sample;
  double prev = 0;
  for (std::size_t j = 0; j < time_grid.size(); ++j) {
    double dt = time_grid[j] - prev;
    a = simulate(bc, beta, RateRule::heat_bath, a, dt, mix64(rs + 2 * j + 1));
    b = simulate(bc, beta, RateRule::heat_bath, b, dt, mix64(rs + 2 * j + 2));
    prev = time_grid[j];
    out.push_back(static_cast<double>(a[origin] * b[origin]));
  }
  return out;
}

// rho(t_j) = E[a b](t_j) - m^2, with m^2 estimated without bias from distinct
// pairs of independent starts.
inline std::vector<AutocorrPoint> summarize_autocorrelation(const std::vector<std::vector<double>>& rows,
                                                            const std::vector<double>& time_grid) {
  const std::size_t R = rows.size();
  if (R < 2) throw std::invalid_argument("autocorrelation needs >= 2 replicas");
  double sum = 0, sumsq = 0;
  for (const auto& r : rows) {
    sum += r[0];
    sumsq += r[0] * r[0];
  }
  const double n = static_cast<double>(R);
  const double m2 = (sum * sum - sumsq) / (n * (n - 1));
  const double m = sum / n;
  const double var_m = (sumsq / n - m * m) / (n - 1);
  std::vector<AutocorrPoint> out;
  for (std::size_t j = 0; j < time_grid.size(); ++j) {
    std::vector<double> prod(R);
    for (std::size_t i = 0; i < R; ++i) prod[i] = rows[i][j + 1];
    auto [mean, se] = mean_and_stderr(prod);
    out.push_back({time_grid[j], mean - m2, std::sqrt(se * se + 4 * m * m * var_m)});
  }
  return out;
}

inline std::vector<AutocorrPoint> autocorrelation(int box_side, double beta, std::vector<double> time_grid,
                                                  std::size_t replicas, std::uint64_t seed) {
  if (box_side < 1 || replicas < 2) throw std::invalid_argument("autocorrelation needs a box and >= 2 replicas");
  std::sort(time_grid.begin(), time_grid.end());
  auto region = LatticeRegion::box(box_side, box_side);
  auto bc = BoundaryCondition::plus(region);
  const std::size_t origin = *region->index_of(box_center(box_side));
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < replicas; ++i)
    rows.push_back(autocorrelation_replica(bc, beta, origin, time_grid, replica_seed(seed, i)));
  return summarize_autocorrelation(rows, time_grid);
}

inline std::vector<AutocorrPoint> autocorrelation_exact(int box_side, double beta,
                                                        const std::vector<double>& time_grid) {
  auto region = LatticeRegion::box(box_side, box_side);
  auto bc = BoundaryCondition::plus(region);
  Generator gen(bc, beta, RateRule::heat_bath);
  const std::size_t origin = *region->index_of(box_center(box_side));
  std::vector<double> f(gen.states());
  for (std::uint64_t c = 0; c < gen.states(); ++c) f[c] = (c >> origin) & 1 ? 1.0 : -1.0;
  const auto& pi = gen.stationary();
  double m = 0;
  for (std::uint64_t c = 0; c < gen.states(); ++c) m += pi[c] * f[c];
  std::vector<AutocorrPoint> out;
  for (double t : time_grid) {
    auto g = evolve_function(gen, f, t);
    double s = 0;
    for (std::uint64_t c = 0; c < gen.states(); ++c) s += pi[c] * g[c] * g[c];
    out.push_back({t, s - m * m, 0.0});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Approximate infinite-volume phase boundary: equilibrate a box padded by
// `pad_factor` times the region's larger side under a uniform boundary of
// sign `phase` (exact CFTP) and read the spins on the region's boundary.

inline BoundaryCondition sample_phase_boundary(const RegionPtr& region, double beta, Spin phase,
                                               std::uint64_t seed, int pad_factor = 3) {
  const int side = std::max(region->xmax() - region->xmin() + 1, region->ymax() - region->ymin() + 1);
  const int pad = pad_factor * side;
  std::vector<Site> sites;
  for (int y = region->ymin() - pad; y <= region->ymax() + pad; ++y)
    for (int x = region->xmin() - pad; x <= region->xmax() + pad; ++x) sites.push_back({x, y});
  auto big = LatticeRegion::from_sites(std::move(sites));
  auto bbc = BoundaryCondition::uniform(big, phase);
  CftpOutcome out = PackedLattice::supports(bbc) ? packed_cftp(bbc, beta, seed) : cftp_sample(bbc, beta, seed);
  if (!out.coalesced()) throw BudgetExhausted("CFTP epoch cap reached while sampling a phase boundary");
  std::vector<Spin> v;
  for (Site b : region->boundary()) v.push_back(out.sample->at(b));
  return {region, std::move(v), std::string("phase-sampled(") + (phase > 0 ? "+" : "-") + ",pad=" +
                                    std::to_string(pad_factor) + ")"};
}

}  // namespace isinglab
