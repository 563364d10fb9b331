#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "isinglab/randomline/graph.hpp"

namespace isinglab {

// Number of even subgraphs of `allowed` with k edges, k = 0..64.
inline std::vector<std::uint64_t> even_subgraph_counts(const DualGraph& g, EdgeMask allowed) {
  std::vector<std::uint64_t> c(65, 0);
  for_each_coset(0, g.cycle_basis(allowed), [&](EdgeMask B) { ++c[static_cast<std::size_t>(std::popcount(B))]; });
  return c;
}

inline double weight_polynomial(const std::vector<std::uint64_t>& counts, double beta) {
  double z = 0, w = std::exp(-2 * beta);
  for (std::size_t k = counts.size(); k-- > 0;) z = z * w + static_cast<double>(counts[k]);
  return z;
}

// Z(G) restricted to the edges in `allowed`: sum over closed families, i.e.
// over even subgraphs, of e^{-2 beta |gamma|}.
inline double partition_Z(const DualGraph& g, EdgeMask allowed, double beta) {
  return weight_polynomial(even_subgraph_counts(g, allowed), beta);
}
inline double partition_Z(const DualGraph& g, double beta) { return partition_Z(g, g.all(), beta); }

// E-compatible: every edge lies in E and the family is the decomposition of
// its own edge set.
inline bool is_compatible(const DualGraph& g, const ContourFamily& theta) {
  auto es = theta.edges();
  if (std::adjacent_find(es.begin(), es.end()) != es.end()) return false;
  if (!g.mask_of(es)) return false;
  return decompose(es, g.rule()) == theta;
}

// Z(G | theta) through the edge-boundary exclusion: closed families
// compatible with theta are exactly the even subgraphs avoiding Delta(theta).
inline double partition_Z_given(const DualGraph& g, const ContourFamily& theta, double beta) {
  if (!is_compatible(g, theta)) return 0;
  EdgeMask t = *g.mask_of(theta.edges());
  return partition_Z(g, g.all() & ~g.delta(t), beta);
}

// Literal definition: all closed families gamma with gamma u theta compatible.
inline double partition_Z_given_literal(const DualGraph& g, const ContourFamily& theta, double beta) {
  if (!is_compatible(g, theta)) return 0;
  EdgeMask t = *g.mask_of(theta.edges());
  EdgeMask free = g.all() & ~t;
  if (std::popcount(free) > 22) throw SizeCapExceeded("literal enumeration limited to 22 free edges");
  double z = 0;
  // all subsets of `free`
  for (EdgeMask B = free;; B = (B - 1) & free) {
    auto es = g.edges_of(B);
    if (odd_vertices(es).empty()) {
      auto gamma = decompose(es, g.rule());
      std::vector<Contour> both = gamma.contours;
      both.insert(both.end(), theta.contours.begin(), theta.contours.end());
      auto all = g.edges_of(B | t);
      if (decompose(all, g.rule()) == make_family(both)) z += std::exp(-2 * beta * static_cast<double>(es.size()));
    }
    if (B == 0) break;
  }
  return z;
}

inline double q_weight(const DualGraph& g, const ContourFamily& theta, double beta) {
  if (!is_compatible(g, theta)) return 0;
  return partition_Z_given(g, theta, beta) / partition_Z(g, beta) *
         std::exp(-2 * beta * static_cast<double>(theta.length()));
}

// Families of open contours with boundary A (closed contours excluded).
struct OpenFamily {
  ContourFamily family;
  EdgeMask mask;
};

inline std::vector<OpenFamily> open_families(const DualGraph& g, const std::vector<DualVertex>& A) {
  std::vector<OpenFamily> out;
  if (A.size() % 2) return out;
  auto B0 = g.particular(g.all(), A);
  if (!B0) return out;
  for_each_coset(*B0, g.cycle_basis(g.all()), [&](EdgeMask B) {
    auto f = decompose(g.edges_of(B), g.rule());
    if (f.closed().empty()) out.push_back({std::move(f), B});
  });
  return out;
}

// Left side of the random-line identity: sum of q over open families with boundary A.
inline double random_line_sum(const DualGraph& g, const std::vector<DualVertex>& A, double beta) {
  double z = partition_Z(g, beta), s = 0;
  for (const auto& f : open_families(g, A))
    s += partition_Z(g, g.all() & ~g.delta(f.mask), beta) / z *
         std::exp(-2 * beta * static_cast<double>(std::popcount(f.mask)));
  return s;
}

// Free-boundary Ising model on the vertices of G at inverse temperature
// beta_dual, enumerated exhaustively.
class DualIsing {
 public:
  static constexpr std::size_t kVertexCap = 22;

  DualIsing(const DualGraph& g, double beta_dual) : g_(&g) {
    const std::size_t n = g.vertices().size();
    if (n > kVertexCap) throw SizeCapExceeded("dual spin enumeration limited to 22 vertices");
    std::vector<std::pair<std::size_t, std::size_t>> bonds;
    for (const auto& e : g.edges()) bonds.push_back({*g.vertex_index(e.a), *g.vertex_index(e.b)});
    const std::uint64_t states = std::uint64_t{1} << n;
    w_.resize(states);
    double max_e = static_cast<double>(bonds.size());
    double z = 0;
    for (std::uint64_t s = 0; s < states; ++s) {
      int agree = 0;
      for (auto [a, b] : bonds) agree += ((s >> a) & 1) == ((s >> b) & 1) ? 1 : -1;
      w_[s] = std::exp(beta_dual * (agree - max_e));
      z += w_[s];
    }
    for (auto& x : w_) x /= z;
  }

  // E[prod_{x in A} sigma_x]
  double correlation(const std::vector<DualVertex>& A) const {
    std::uint64_t mask = 0;
    for (auto v : A) {
      auto k = g_->vertex_index(v);
      if (!k) throw std::invalid_argument("correlation point outside the graph");
      mask ^= std::uint64_t{1} << *k;
    }
    double c = 0;
    for (std::uint64_t s = 0; s < w_.size(); ++s) c += (std::popcount(~s & mask) % 2 ? -w_[s] : w_[s]);
    return c;
  }

 private:
  const DualGraph* g_;
  std::vector<double> w_;
};

}  // namespace isinglab
