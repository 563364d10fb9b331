#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "isinglab/contour/geometry.hpp"
#include "isinglab/dynamics/packed.hpp"
#include "isinglab/harness/pool.hpp"

namespace isinglab {

// Rows kept on each side of the interface in the truncated strip.
inline int default_strip_cutoff(int ell) { return static_cast<int>(std::ceil(3 * std::sqrt(double(ell)))) + 3; }

// Exact interface samples on the truncated strip with the eta boundary.
struct InterfaceTask {
  double beta = 0.7;
  int ell = 16;
  int cutoff = 0;                   // 0: default_strip_cutoff(ell)
  std::uint64_t seed = 1;
  std::uint64_t initial_sweeps = 0;  // 0: ell^2, close to the typical coupling time
  std::uint64_t max_events = std::uint64_t{1} << 36;

  int rows() const { return cutoff > 0 ? cutoff : default_strip_cutoff(ell); }
  std::uint64_t first_epoch() const {
    return initial_sweeps > 0 ? initial_sweeps : static_cast<std::uint64_t>(ell) * static_cast<std::uint64_t>(ell);
  }
  std::string key() const {
    return "interface beta=" + format_double(beta) + " ell=" + std::to_string(ell) + " n=" + std::to_string(rows()) +
           " seed=" + std::to_string(seed) + " first=" + std::to_string(first_epoch()) +
           " cap=" + std::to_string(max_events);
  }
  std::uint64_t task_seed() const { return mix64(fnv1a(key())); }
};

// Column layout of an interface record.
enum InterfaceField : std::size_t {
  kCoalesced, kSweeps, kMinSE, kMaxSE, kMinSW, kMaxSW, kMidSE, kMidSW, kInterfaceFields
};

inline std::vector<double> interface_observables(const PackedLattice& lat, const BoundaryCondition& bc,
                                                 const InterfaceTask& task, std::uint64_t seed) {
  PackedCftpOptions o;
  o.initial_sweeps = task.first_epoch();
  o.max_events = task.max_events;
  auto out = packed_cftp(lat, seed, o);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> v(kInterfaceFields, nan);
  v[kCoalesced] = out.coalesced() ? 1 : 0;
  v[kSweeps] = static_cast<double>(out.events / lat.sites());
  if (!out.coalesced()) return v;
  const int mid = task.ell / 2;
  auto se = strip_interface(*out.sample, bc, SplitRule::se);
  auto sw = strip_interface(*out.sample, bc, SplitRule::sw);
  v[kMinSE] = se.min_level();
  v[kMaxSE] = se.max_level();
  v[kMinSW] = sw.min_level();
  v[kMaxSW] = sw.max_level();
  v[kMidSE] = height(se, mid).value_or(0);
  v[kMidSW] = height(sw, mid).value_or(0);
  return v;
}

inline PoolResult run_interface_task(const InterfaceTask& task, std::uint64_t replicas, const PoolOptions& opt = {}) {
  auto region = LatticeRegion::truncated_strip(task.ell, task.rows());
  auto bc = BoundaryCondition::half_plane_eta(region);
  PackedLattice lat(bc, task.beta);
  return run_replicas(task.key(), task.task_seed(), replicas,
                      [&](std::uint64_t, std::uint64_t seed) { return interface_observables(lat, bc, task, seed); },
                      opt);
}

}  // namespace isinglab
