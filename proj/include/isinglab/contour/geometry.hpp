#pragma once

#include <algorithm>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "isinglab/contour/contours.hpp"

namespace isinglab {

// Dual levels: vertex {i, j} sits at height j + 1/2, so H*_h is level j = h.

// Highest level of lambda in dual column i (x = i + 1/2).
inline std::optional<int> height(const Contour& lambda, int column) {
  std::optional<int> h;
  for (auto v : lambda.walk)
    if (v.i == column) h = h ? std::max(*h, v.j) : v.j;
  return h;
}

// max |j - j'| over pairs of points with columns in [lo, hi] at most m apart.
inline int gain(const std::vector<DualVertex>& points, int lo, int hi, int m) {
  if (m < 0) throw std::invalid_argument("gain distance must be nonnegative");
  std::map<int, std::pair<int, int>> span;  // column -> (min j, max j)
  for (auto p : points) {
    if (p.i < lo || p.i > hi) continue;
    auto [it, fresh] = span.try_emplace(p.i, p.j, p.j);
    if (!fresh) {
      it->second.first = std::min(it->second.first, p.j);
      it->second.second = std::max(it->second.second, p.j);
    }
  }
  int best = 0;
  for (auto a = span.begin(); a != span.end(); ++a)
    for (auto b = a; b != span.end() && b->first - a->first <= m; ++b) {
      best = std::max(best, a->second.second - b->second.first);
      best = std::max(best, b->second.second - a->second.first);
    }
  return best;
}

inline int gain(const Contour& lambda, int lo, int hi, int m) { return gain(lambda.walk, lo, hi, m); }

inline int gradient(const Contour& lambda, int lo, int hi) { return gain(lambda, lo, hi, 0); }

inline bool reaches_level(const Contour& lambda, int h) { return lambda.max_level() >= h; }

// Strictly above H*_level at every vertex.
inline bool stays_above(const Contour& lambda, int level) { return lambda.min_level() > level; }

// Vertical reflection y -> 1 - y of the strip acts on dual levels as j -> -j.
inline Contour reflect_vertical(Contour c) {
  for (auto& v : c.walk) v.j = -v.j;
  return canonical(std::move(c));
}

// The open contour of a family whose endpoints are {u, v}.
inline std::optional<Contour> open_contour_between(const ContourFamily& f, DualVertex u, DualVertex v) {
  auto key = std::minmax(u, v);
  for (const auto* c : f.open())
    if (c->walk.front() == key.first && c->walk.back() == key.second) return *c;
  return std::nullopt;
}

// Endpoints of the interface in a strip with the eta boundary condition.
inline std::pair<DualVertex, DualVertex> strip_endpoints(const LatticeRegion& strip) {
  return {{0, 0}, {strip.width(), 0}};
}

// The strip interface under a splitting rule: the open contour from the
// west to the east end.
inline Contour strip_interface(const SpinConfiguration& sigma, const BoundaryCondition& bc, SplitRule rule) {
  auto [u, v] = strip_endpoints(*bc.region());
  auto c = open_contour_between(decompose(disagreement_duals(sigma, bc), rule), u, v);
  if (!c) throw CompatibilityError("no open contour joins the strip ends");
  return *c;
}

enum class Extremal { top, bottom };

namespace detail {

// Primal sites to the left and right of a dual step from v in direction d.
inline Site left_of(DualVertex v, Direction d) {
  return {(2 * v.i + 1 + dx(d) - dy(d)) / 2, (2 * v.j + 1 + dy(d) + dx(d)) / 2};
}
inline Site right_of(DualVertex v, Direction d) {
  return {(2 * v.i + 1 + dx(d) + dy(d)) / 2, (2 * v.j + 1 + dy(d) - dx(d)) / 2};
}
inline Direction turn_left(Direction d) { return static_cast<Direction>((static_cast<int>(d) + 3) % 4); }
inline Direction turn_right(Direction d) { return static_cast<Direction>((static_cast<int>(d) + 1) % 4); }

}  // namespace detail

// Boundary of the upper (top) or lower (bottom) component of the strip
// minus Gamma, traced from the west end to the east end. The upper
// component is everything reachable from the boundary sites with y > 0
// without crossing Gamma; the walk keeps it on its left and turns left
// whenever it can (mirror image for the bottom).
inline Contour gamma_extremal(const LatticeRegion& strip, const std::vector<DualEdge>& gamma, Extremal which) {
  std::set<DualEdge> G(gamma.begin(), gamma.end());
  const bool top = which == Extremal::top;
  std::set<Site> comp;
  std::vector<Site> stack;
  for (auto b : strip.boundary())
    if ((b.y > 0) == top) {
      comp.insert(b);
      stack.push_back(b);
    }
  while (!stack.empty()) {
    Site p = stack.back();
    stack.pop_back();
    for (auto d : kDirections) {
      Site q = step(p, d);
      if (comp.count(q) || !strip.contains(q)) continue;
      if (G.count(dual_of(p, q))) continue;
      comp.insert(q);
      stack.push_back(q);
    }
  }
  auto [u, v] = strip_endpoints(strip);
  auto usable = [&](DualVertex a, Direction d) {
    DualVertex b = step(a, d);
    if (!G.count(DualEdge::between(a, b))) return false;
    Site inside = top ? detail::left_of(a, d) : detail::right_of(a, d);
    Site outside = top ? detail::right_of(a, d) : detail::left_of(a, d);
    return comp.count(inside) && !comp.count(outside);
  };
  Contour path;
  path.walk.push_back(u);
  DualVertex cur = u;
  Direction heading = Direction::east;
  std::set<DualEdge> used;
  for (std::size_t guard = 0; cur != v; ++guard) {
    if (guard > 4 * G.size() + 4) throw CompatibilityError("Gamma does not span the strip");
    std::array<Direction, 3> order = top ? std::array{detail::turn_left(heading), heading, detail::turn_right(heading)}
                                         : std::array{detail::turn_right(heading), heading, detail::turn_left(heading)};
    bool moved = false;
    for (auto d : order) {
      if (!usable(cur, d)) continue;
      DualEdge e = DualEdge::between(cur, step(cur, d));
      if (used.count(e)) continue;
      used.insert(e);
      cur = step(cur, d);
      heading = d;
      path.walk.push_back(cur);
      moved = true;
      break;
    }
    if (!moved) throw CompatibilityError("Gamma does not span the strip");
  }
  return path;
}

inline Contour gamma_extremal(const LatticeRegion& strip, const Contour& se, const Contour& sw, Extremal which) {
  auto g = se.edges();
  auto h = sw.edges();
  g.insert(g.end(), h.begin(), h.end());
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return gamma_extremal(strip, g, which);
}

// Box W x H under (-,+,Delta): the corners x = {0, H} and y = {W, H} and the
// ends u, v of Delta = [from, to] on the South side.
struct SplitCorners {
  DualVertex x, y, u, v;
};

inline SplitCorners split_corners(const LatticeRegion& box, int from, int to) {
  return {{0, box.height()}, {box.width(), box.height()}, {from - 1, 0}, {to, 0}};
}

// Two open contours joining x with u and y with v, the first inside the left
// half of the box and the second inside the right half.
inline bool confined_split(const ContourFamily& family, const LatticeRegion& box, const SplitCorners& k) {
  auto left = open_contour_between(family, k.x, k.u);
  auto right = open_contour_between(family, k.y, k.v);
  if (!left || !right) return false;
  const int w1 = box.width() + 1;  // twice the x of the vertical centre line
  for (auto p : left->walk)
    if (2 * p.i + 1 > w1) return false;
  for (auto p : right->walk)
    if (2 * p.i + 1 < w1) return false;
  return true;
}

}  // namespace isinglab
