#pragma once

#include <stdexcept>

#include "isinglab/core/boundary.hpp"
#include "isinglab/core/configuration.hpp"

namespace isinglab {

inline void require_same_region(const SpinConfiguration& sigma, const BoundaryCondition& bc) {
  if (!same_region(sigma.region(), bc.region()))
    throw RegionMismatch("configuration and boundary condition live on different regions");
}

// Sum of the neighbouring spins of site k (boundary spins included).
inline int local_field(const LatticeRegion& r, const std::vector<Spin>& s, const std::vector<Spin>& tau,
                       std::size_t k) {
  int h = 0;
  for (auto d : kDirections) {
    std::int32_t n = r.neighbor(k, d);
    h += n >= 0 ? s[static_cast<std::size_t>(n)] : tau[static_cast<std::size_t>(-1 - n)];
  }
  return h;
}

// H = -sum_{x~y in region} s_x s_y - sum_{x in region, y on boundary} s_x tau_y
inline double energy(const SpinConfiguration& sigma, const BoundaryCondition& bc) {
  require_same_region(sigma, bc);
  const auto& r = *sigma.region();
  const auto& s = sigma.spins();
  long e = 0;
  for (std::size_t k = 0; k < r.size(); ++k)
    for (auto d : kDirections) {
      std::int32_t n = r.neighbor(k, d);
      if (n >= 0) {
        // count each interior bond once, from its south/west end
        if (d == Direction::north || d == Direction::east) e -= s[k] * s[static_cast<std::size_t>(n)];
      } else {
        e -= s[k] * bc.at(static_cast<std::size_t>(-1 - n));
      }
    }
  return static_cast<double>(e);
}

// energy(sigma^k) - energy(sigma) = 2 s_k * (sum of neighbours).
inline double flip_cost(const SpinConfiguration& sigma, std::size_t k, const BoundaryCondition& bc) {
  require_same_region(sigma, bc);
  if (k >= sigma.size()) throw std::out_of_range("site index outside region");
  return 2.0 * sigma[k] * local_field(*sigma.region(), sigma.spins(), bc.values(), k);
}

inline double flip_cost(const SpinConfiguration& sigma, Site x, const BoundaryCondition& bc) {
  auto k = sigma.region()->index_of(x);
  if (!k) throw std::out_of_range("site outside region");
  return flip_cost(sigma, *k, bc);
}

}  // namespace isinglab
