#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "isinglab/core/boundary.hpp"
#include "isinglab/core/configuration.hpp"
#include "isinglab/core/errors.hpp"

namespace isinglab {

// Dual edges whose primal edge joins disagreeing spins (boundary spins
// included; free boundary sites never disagree). Sorted, no duplicates.
inline std::vector<DualEdge> disagreement_duals(const SpinConfiguration& sigma, const BoundaryCondition& bc) {
  if (!same_region(sigma.region(), bc.region())) throw RegionMismatch("configuration and bc on different regions");
  const auto& r = *sigma.region();
  std::vector<DualEdge> out;
  for (std::size_t k = 0; k < r.size(); ++k)
    for (auto d : kDirections) {
      std::int32_t n = r.neighbor(k, d);
      Site p = r.sites()[k];
      if (n >= 0) {
        if ((d == Direction::north || d == Direction::east) && sigma[k] != sigma[static_cast<std::size_t>(n)])
          out.push_back(dual_of(p, step(p, d)));
      } else {
        Spin t = bc.at(static_cast<std::size_t>(-1 - n));
        if (t != 0 && t != sigma[k]) out.push_back(dual_of(p, step(p, d)));
      }
    }
  std::sort(out.begin(), out.end());
  return out;
}

// Vertices of odd degree in an edge set.
inline std::vector<DualVertex> odd_vertices(const std::vector<DualEdge>& edges) {
  std::map<DualVertex, int> deg;
  for (const auto& e : edges) {
    ++deg[e.a];
    ++deg[e.b];
  }
  std::vector<DualVertex> out;
  for (auto [v, d] : deg)
    if (d % 2) out.push_back(v);
  return out;
}

// V(tau): the endpoints every disagreement set must have under this bc.
inline std::vector<DualVertex> endpoint_set(const BoundaryCondition& bc) {
  return odd_vertices(disagreement_duals(SpinConfiguration::uniform(bc.region(), 1), bc));
}

enum class SplitRule { se, sw };

inline std::string to_string(SplitRule r) { return r == SplitRule::se ? "SE" : "SW"; }

// Port paired with `p` at a degree-4 vertex:
//   SE: N-E and S-W;  SW: N-W and S-E.
constexpr Direction rule_partner(SplitRule rule, Direction p) {
  if (rule == SplitRule::se) {
    switch (p) {
      case Direction::north: return Direction::east;
      case Direction::east: return Direction::north;
      case Direction::south: return Direction::west;
      case Direction::west: return Direction::south;
    }
  }
  switch (p) {
    case Direction::north: return Direction::west;
    case Direction::west: return Direction::north;
    case Direction::south: return Direction::east;
    case Direction::east: return Direction::south;
  }
  return p;
}

// Port that continues a line entering a vertex through `p`, given the set of
// ports present there. Degree 2: the other port. Degree 3 and 4: the rule
// partner if present; otherwise the line ends here.
inline std::optional<Direction> continue_port(SplitRule rule, std::uint8_t ports, Direction p) {
  const int deg = std::popcount(static_cast<unsigned>(ports));
  if (deg == 2) {
    std::uint8_t rest = ports & static_cast<std::uint8_t>(~(1u << static_cast<int>(p)));
    return static_cast<Direction>(std::countr_zero(static_cast<unsigned>(rest)));
  }
  if (deg >= 3) {
    Direction q = rule_partner(rule, p);
    if (ports & (1u << static_cast<int>(q))) return q;
  }
  return std::nullopt;
}

// An edge-disjoint line of the dual lattice stored as its vertex walk.
// Closed contours do not repeat the first vertex at the end.
struct Contour {
  std::vector<DualVertex> walk;
  bool closed = false;

  std::size_t length() const { return closed ? walk.size() : walk.size() - 1; }

  std::vector<DualEdge> edges() const {
    std::vector<DualEdge> out;
    for (std::size_t i = 0; i + 1 < walk.size(); ++i) out.push_back(DualEdge::between(walk[i], walk[i + 1]));
    if (closed && walk.size() > 1) out.push_back(DualEdge::between(walk.back(), walk.front()));
    std::sort(out.begin(), out.end());
    return out;
  }

  std::array<DualVertex, 2> endpoints() const {
    if (closed) throw std::logic_error("closed contours have no endpoints");
    return {walk.front(), walk.back()};
  }

  int min_level() const {
    int m = walk.front().j;
    for (auto v : walk) m = std::min(m, v.j);
    return m;
  }
  int max_level() const {
    int m = walk.front().j;
    for (auto v : walk) m = std::max(m, v.j);
    return m;
  }

  friend auto operator<=>(const Contour& a, const Contour& b) {
    if (a.closed != b.closed) return a.closed <=> b.closed;
    return a.walk <=> b.walk;
  }
  friend bool operator==(const Contour&, const Contour&) = default;
};

// Canonical orientation: open contours run from the smaller endpoint; closed
// contours start at their smallest vertex, choosing among its occurrences and
// both orientations the lexicographically smallest walk.
inline Contour canonical(Contour c) {
  if (!c.closed) {
    if (c.walk.back() < c.walk.front()) std::reverse(c.walk.begin(), c.walk.end());
    return c;
  }
  const auto n = c.walk.size();
  const DualVertex vmin = *std::min_element(c.walk.begin(), c.walk.end());
  std::optional<std::vector<DualVertex>> best;
  for (int dir = 0; dir < 2; ++dir) {
    std::vector<DualVertex> w = c.walk;
    if (dir) std::reverse(w.begin(), w.end());
    for (std::size_t s = 0; s < n; ++s) {
      if (w[s] != vmin) continue;
      std::vector<DualVertex> cand(w.begin() + static_cast<std::ptrdiff_t>(s), w.end());
      cand.insert(cand.end(), w.begin(), w.begin() + static_cast<std::ptrdiff_t>(s));
      if (!best || cand < *best) best = std::move(cand);
    }
  }
  c.walk = std::move(*best);
  return c;
}

struct ContourFamily {
  std::vector<Contour> contours;  // canonical, sorted (open ones first)

  std::vector<const Contour*> open() const {
    std::vector<const Contour*> out;
    for (const auto& c : contours)
      if (!c.closed) out.push_back(&c);
    return out;
  }
  std::vector<const Contour*> closed() const {
    std::vector<const Contour*> out;
    for (const auto& c : contours)
      if (c.closed) out.push_back(&c);
    return out;
  }
  std::vector<DualEdge> edges() const {
    std::vector<DualEdge> out;
    for (const auto& c : contours) {
      auto e = c.edges();
      out.insert(out.end(), e.begin(), e.end());
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  std::size_t length() const {
    std::size_t n = 0;
    for (const auto& c : contours) n += c.length();
    return n;
  }
  // Union of the endpoints of the open contours.
  std::vector<DualVertex> boundary() const {
    std::vector<DualVertex> out;
    for (const auto& c : contours)
      if (!c.closed) {
        out.push_back(c.walk.front());
        out.push_back(c.walk.back());
      }
    std::sort(out.begin(), out.end());
    return out;
  }
  ContourFamily open_part() const {
    ContourFamily f;
    for (const auto& c : contours)
      if (!c.closed) f.contours.push_back(c);
    return f;
  }
  bool empty() const { return contours.empty(); }
  friend bool operator==(const ContourFamily&, const ContourFamily&) = default;
  friend auto operator<=>(const ContourFamily& a, const ContourFamily& b) { return a.contours <=> b.contours; }
};

inline ContourFamily make_family(std::vector<Contour> cs) {
  for (auto& c : cs) c = canonical(std::move(c));
  std::sort(cs.begin(), cs.end());
  return {std::move(cs)};
}

// Splits an edge set into edge-disjoint lines with the given rule.
inline ContourFamily decompose(const std::vector<DualEdge>& input, SplitRule rule) {
  std::vector<DualEdge> edges = input;
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    throw std::invalid_argument("edge set contains duplicates");
  std::unordered_map<DualVertex, std::uint8_t, DualVertexHash> ports;
  for (const auto& e : edges) {
    ports[e.a] |= static_cast<std::uint8_t>(1u << static_cast<int>(direction_between(e.a, e.b)));
    ports[e.b] |= static_cast<std::uint8_t>(1u << static_cast<int>(direction_between(e.b, e.a)));
  }
  std::set<DualEdge> unused(edges.begin(), edges.end());
  auto take = [&](DualVertex v, Direction p) {
    return unused.erase(DualEdge::between(v, step(v, p))) > 0;
  };
  // walk from v leaving through p until the line ends or closes
  auto trace = [&](DualVertex v, Direction p) {
    std::vector<DualVertex> walk{v};
    while (take(v, p)) {
      DualVertex w = step(v, p);
      auto q = continue_port(rule, ports[w], opposite(p));
      walk.push_back(w);
      if (!q) break;
      v = w;
      p = *q;
    }
    return walk;
  };

  std::vector<Contour> out;
  // open lines start at ports without a continuation
  std::vector<std::pair<DualVertex, Direction>> starts;
  for (auto [v, mask] : ports)
    for (auto d : kDirections)
      if ((mask >> static_cast<int>(d)) & 1 && !continue_port(rule, mask, d)) starts.push_back({v, d});
  std::sort(starts.begin(), starts.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : a.second < b.second;
  });
  for (auto [v, d] : starts) {
    if (!unused.count(DualEdge::between(v, step(v, d)))) continue;
    out.push_back({trace(v, d), false});
  }
  while (!unused.empty()) {
    DualEdge e = *unused.begin();
    auto walk = trace(e.a, direction_between(e.a, e.b));
    if (walk.back() != walk.front()) throw std::logic_error("closed line did not close");
    walk.pop_back();
    out.push_back({std::move(walk), true});
  }
  return make_family(std::move(out));
}

// Inverse of decompose(disagreement_duals(., bc)). For a boundary with no
// fixed spins the global sign is fixed by setting the first site to +1.
inline SpinConfiguration reconstruct(const BoundaryCondition& bc, const ContourFamily& family) {
  const auto& r = *bc.region();
  auto edges = family.edges();
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    throw CompatibilityError("contours are not edge-disjoint");
  // free boundary sites impose no endpoints; consistency is left to the flood below
  if (!bc.has_free_sites() && odd_vertices(edges) != endpoint_set(bc))
    throw CompatibilityError("family boundary differs from V(tau)");
  std::set<DualEdge> B(edges.begin(), edges.end());
  std::set<DualEdge> all(r.dual_edges().begin(), r.dual_edges().end());
  for (const auto& e : edges)
    if (!all.count(e)) throw CompatibilityError("contour edge outside the region's dual edge set");

  std::vector<Spin> s(r.size(), 0);
  std::queue<std::size_t> q;
  for (std::size_t k = 0; k < r.size(); ++k)
    for (auto d : kDirections) {
      std::int32_t n = r.neighbor(k, d);
      if (n >= 0) continue;
      Spin t = bc.at(static_cast<std::size_t>(-1 - n));
      if (t == 0) continue;
      Site p = r.sites()[k];
      Spin want = B.count(dual_of(p, step(p, d))) ? static_cast<Spin>(-t) : t;
      if (s[k] == 0) {
        s[k] = want;
        q.push(k);
      } else if (s[k] != want) {
        throw CompatibilityError("family is not the disagreement set of any configuration");
      }
    }
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (s[k] != 0) continue;
    if (q.empty() && k == 0) {
      s[0] = 1;
      q.push(0);
    }
  }
  auto flood = [&]() {
    while (!q.empty()) {
      std::size_t k = q.front();
      q.pop();
      Site p = r.sites()[k];
      for (auto d : kDirections) {
        std::int32_t n = r.neighbor(k, d);
        if (n < 0) continue;
        auto m = static_cast<std::size_t>(n);
        Spin want = B.count(dual_of(p, step(p, d))) ? static_cast<Spin>(-s[k]) : s[k];
        if (s[m] == 0) {
          s[m] = want;
          q.push(m);
        } else if (s[m] != want) {
          throw CompatibilityError("family is not the disagreement set of any configuration");
        }
      }
    }
  };
  flood();
  // components not reached from a fixed boundary site (free boundary)
  for (std::size_t k = 0; k < r.size(); ++k)
    if (s[k] == 0) {
      s[k] = 1;
      q.push(k);
      flood();
    }
  return {bc.region(), std::move(s)};
}

}  // namespace isinglab
