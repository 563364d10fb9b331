#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "isinglab/contour/contours.hpp"
#include "isinglab/core/region.hpp"
#include "isinglab/dynamics/rng.hpp"

namespace isinglab {

using EdgeMask = std::uint64_t;

// Cycle rank limit for even-subgraph enumeration (2^24 subsets).
inline constexpr int kCycleRankCap = 24;

// A finite subgraph of the dual lattice, with at most 64 edges so that edge
// sets fit a mask. Bit k of a mask is edges()[k].
class DualGraph {
 public:
  DualGraph(std::vector<DualVertex> vertices, std::vector<DualEdge> edges, SplitRule rule = SplitRule::se)
      : vertices_(std::move(vertices)), edges_(std::move(edges)), rule_(rule) {
    std::sort(vertices_.begin(), vertices_.end());
    vertices_.erase(std::unique(vertices_.begin(), vertices_.end()), vertices_.end());
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    if (edges_.size() > 64) throw SizeCapExceeded("dual graph limited to 64 edges");
    for (std::size_t v = 0; v < vertices_.size(); ++v) vindex_[vertices_[v]] = v;
    for (std::size_t k = 0; k < edges_.size(); ++k) {
      const auto& e = edges_[k];
      if (!adjacent(e.a, e.b)) throw std::invalid_argument("dual edge joins non-adjacent vertices");
      if (!vindex_.count(e.a) || !vindex_.count(e.b)) throw std::invalid_argument("dual edge leaves the vertex set");
      eindex_[e] = k;
    }
  }

  // (Lambda*, E*) of a region.
  static DualGraph of_region(const LatticeRegion& r, SplitRule rule = SplitRule::se) {
    return {r.dual_vertices(), r.dual_edges(), rule};
  }

  // All vertices {0..w-1} x {0..h-1} with every nearest-neighbour edge.
  static DualGraph grid(int w, int h, SplitRule rule = SplitRule::se) {
    std::vector<DualVertex> v;
    std::vector<DualEdge> e;
    for (int j = 0; j < h; ++j)
      for (int i = 0; i < w; ++i) {
        v.push_back({i, j});
        if (i + 1 < w) e.push_back(DualEdge::between({i, j}, {i + 1, j}));
        if (j + 1 < h) e.push_back(DualEdge::between({i, j}, {i, j + 1}));
      }
    return {std::move(v), std::move(e), rule};
  }

  // Random subgraph of a w x h grid keeping each edge with probability p.
  static DualGraph random_grid_subgraph(int w, int h, double p, std::uint64_t seed, SplitRule rule = SplitRule::se) {
    auto g = grid(w, h, rule);
    Xoshiro256 rng(seed);
    std::vector<DualEdge> keep;
    for (const auto& e : g.edges())
      if (uniform01(rng) < p) keep.push_back(e);
    return {g.vertices(), std::move(keep), rule};
  }

  const std::vector<DualVertex>& vertices() const { return vertices_; }
  const std::vector<DualEdge>& edges() const { return edges_; }
  SplitRule rule() const { return rule_; }
  EdgeMask all() const { return edges_.size() == 64 ? ~EdgeMask{0} : (EdgeMask{1} << edges_.size()) - 1; }

  std::optional<std::size_t> vertex_index(DualVertex v) const {
    auto it = vindex_.find(v);
    return it == vindex_.end() ? std::nullopt : std::optional(it->second);
  }
  std::optional<std::size_t> edge_index(const DualEdge& e) const {
    auto it = eindex_.find(e);
    return it == eindex_.end() ? std::nullopt : std::optional(it->second);
  }

  // Mask of an edge list; nullopt if some edge is not in the graph.
  std::optional<EdgeMask> mask_of(const std::vector<DualEdge>& es) const {
    EdgeMask m = 0;
    for (const auto& e : es) {
      auto k = edge_index(e);
      if (!k) return std::nullopt;
      m |= EdgeMask{1} << *k;
    }
    return m;
  }

  std::vector<DualEdge> edges_of(EdgeMask m) const {
    std::vector<DualEdge> out;
    for (; m; m &= m - 1) out.push_back(edges_[static_cast<std::size_t>(std::countr_zero(m))]);
    return out;
  }

  // Delta(e): e with the rule partner of e at each endpoint (when present in E).
  EdgeMask edge_delta(std::size_t k) const {
    EdgeMask m = EdgeMask{1} << k;
    const auto& e = edges_[k];
    for (auto [a, b] : {std::pair{e.a, e.b}, std::pair{e.b, e.a}}) {
      Direction q = rule_partner(rule_, direction_between(a, b));
      if (auto j = edge_index(DualEdge::between(a, step(a, q)))) m |= EdgeMask{1} << *j;
    }
    return m;
  }
  EdgeMask delta(EdgeMask B) const {
    EdgeMask m = 0;
    for (; B; B &= B - 1) m |= edge_delta(static_cast<std::size_t>(std::countr_zero(B)));
    return m;
  }

  // Odd-degree vertices of an edge set, as a sorted list.
  std::vector<DualVertex> boundary(EdgeMask B) const { return odd_vertices(edges_of(B)); }

  // Fundamental cycles of the subgraph with edge set `allowed`.
  std::vector<EdgeMask> cycle_basis(EdgeMask allowed) const {
    std::vector<std::size_t> parent(vertices_.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    EdgeMask tree = 0;
    std::vector<std::size_t> chords;
    for (EdgeMask m = allowed; m; m &= m - 1) {
      auto k = static_cast<std::size_t>(std::countr_zero(m));
      auto a = find(*vertex_index(edges_[k].a)), b = find(*vertex_index(edges_[k].b));
      if (a == b) {
        chords.push_back(k);
      } else {
        parent[a] = b;
        tree |= EdgeMask{1} << k;
      }
    }
    std::vector<EdgeMask> basis;
    for (auto k : chords) basis.push_back(tree_path(tree, edges_[k].a, edges_[k].b) | (EdgeMask{1} << k));
    return basis;
  }

  // Some B within `allowed` with boundary exactly A, if one exists.
  std::optional<EdgeMask> particular(EdgeMask allowed, const std::vector<DualVertex>& A) const {
    std::vector<DualVertex> a = A;
    std::sort(a.begin(), a.end());
    // spanning forest of allowed edges
    auto basis_free = forest(allowed);
    EdgeMask B = 0;
    std::vector<bool> used(a.size(), false);
    for (std::size_t s = 0; s < a.size(); ++s) {
      if (used[s]) continue;
      bool paired = false;
      for (std::size_t t = s + 1; t < a.size() && !paired; ++t) {
        if (used[t]) continue;
        if (auto p = forest_path(basis_free, a[s], a[t])) {
          B ^= *p;
          used[s] = used[t] = paired = true;
        }
      }
      if (!paired) return std::nullopt;
    }
    return B;
  }

  std::string describe() const {
    return "dual_graph(V=" + std::to_string(vertices_.size()) + ",E=" + std::to_string(edges_.size()) +
           ",rule=" + to_string(rule_) + ")";
  }

 private:
  EdgeMask forest(EdgeMask allowed) const {
    std::vector<std::size_t> parent(vertices_.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    EdgeMask tree = 0;
    for (EdgeMask m = allowed; m; m &= m - 1) {
      auto k = static_cast<std::size_t>(std::countr_zero(m));
      auto a = find(*vertex_index(edges_[k].a)), b = find(*vertex_index(edges_[k].b));
      if (a != b) {
        parent[a] = b;
        tree |= EdgeMask{1} << k;
      }
    }
    return tree;
  }

  // Path between two vertices inside a forest (edge mask), by DFS.
  std::optional<EdgeMask> forest_path(EdgeMask tree, DualVertex from, DualVertex to) const {
    if (from == to) return EdgeMask{0};
    std::map<DualVertex, std::pair<DualVertex, std::size_t>> prev;
    std::vector<DualVertex> stack{from};
    prev[from] = {from, 64};
    while (!stack.empty()) {
      DualVertex v = stack.back();
      stack.pop_back();
      for (auto d : kDirections) {
        DualVertex w = step(v, d);
        auto k = edge_index(DualEdge::between(v, w));
        if (!k || !((tree >> *k) & 1) || prev.count(w)) continue;
        prev[w] = {v, *k};
        if (w == to) {
          EdgeMask m = 0;
          for (DualVertex x = to; x != from; x = prev[x].first) m |= EdgeMask{1} << prev[x].second;
          return m;
        }
        stack.push_back(w);
      }
    }
    return std::nullopt;
  }

  EdgeMask tree_path(EdgeMask tree, DualVertex a, DualVertex b) const { return *forest_path(tree, a, b); }

  std::vector<DualVertex> vertices_;
  std::vector<DualEdge> edges_;
  SplitRule rule_;
  std::map<DualVertex, std::size_t> vindex_;
  std::map<DualEdge, std::size_t> eindex_;
};

// Calls f(B) for every B = B0 xor (span of basis), in Gray-code order.
template <class F>
void for_each_coset(EdgeMask B0, const std::vector<EdgeMask>& basis, F&& f) {
  if (basis.size() > static_cast<std::size_t>(kCycleRankCap))
    throw SizeCapExceeded("cycle rank " + std::to_string(basis.size()) + " exceeds the enumeration cap");
  EdgeMask B = B0;
  f(B);
  const std::uint64_t n = std::uint64_t{1} << basis.size();
  for (std::uint64_t g = 1; g < n; ++g) {
    B ^= basis[static_cast<std::size_t>(std::countr_zero(g))];
    f(B);
  }
}

}  // namespace isinglab
