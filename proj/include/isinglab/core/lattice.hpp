#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <utility>

namespace isinglab {

// Spin values. A boundary site may also carry 0, meaning "free".
using Spin = std::int8_t;

struct Site {
  int x = 0;
  int y = 0;
  friend constexpr auto operator<=>(const Site&, const Site&) = default;
};

// Vertex of the dual lattice located at (i + 1/2, j + 1/2).
// The integer j is the level index: the horizontal line y = j + 1/2.
struct DualVertex {
  int i = 0;
  int j = 0;
  constexpr double x() const { return i + 0.5; }
  constexpr double y() const { return j + 0.5; }
  friend constexpr auto operator<=>(const DualVertex&, const DualVertex&) = default;
};

enum class Direction : std::uint8_t { north = 0, east = 1, south = 2, west = 3 };

inline constexpr std::array<Direction, 4> kDirections{Direction::north, Direction::east,
                                                      Direction::south, Direction::west};

constexpr Direction opposite(Direction d) {
  return static_cast<Direction>((static_cast<int>(d) + 2) & 3);
}

constexpr int dx(Direction d) {
  return d == Direction::east ? 1 : d == Direction::west ? -1 : 0;
}
constexpr int dy(Direction d) {
  return d == Direction::north ? 1 : d == Direction::south ? -1 : 0;
}

constexpr Site step(Site s, Direction d) { return {s.x + dx(d), s.y + dy(d)}; }
constexpr DualVertex step(DualVertex v, Direction d) { return {v.i + dx(d), v.j + dy(d)}; }

constexpr bool adjacent(Site a, Site b) {
  return std::abs(a.x - b.x) + std::abs(a.y - b.y) == 1;
}
constexpr bool adjacent(DualVertex a, DualVertex b) {
  return std::abs(a.i - b.i) + std::abs(a.j - b.j) == 1;
}

// Direction of the unit step a -> b.
inline Direction direction_between(DualVertex a, DualVertex b) {
  if (b.i == a.i + 1 && b.j == a.j) return Direction::east;
  if (b.i == a.i - 1 && b.j == a.j) return Direction::west;
  if (b.j == a.j + 1 && b.i == a.i) return Direction::north;
  if (b.j == a.j - 1 && b.i == a.i) return Direction::south;
  throw std::invalid_argument("dual vertices are not adjacent");
}

// Unit edge of the dual lattice, stored with a < b.
struct DualEdge {
  DualVertex a;
  DualVertex b;

  static DualEdge between(DualVertex p, DualVertex q) {
    if (!adjacent(p, q)) throw std::invalid_argument("dual vertices are not adjacent");
    return p < q ? DualEdge{p, q} : DualEdge{q, p};
  }
  bool horizontal() const { return a.j == b.j; }
  DualVertex other(DualVertex v) const { return v == a ? b : a; }
  friend constexpr auto operator<=>(const DualEdge&, const DualEdge&) = default;
};

// The dual edge crossing the primal edge {p, q}.
//   (x,y)-(x+1,y)  <->  {x,y-1}-{x,y}
//   (x,y)-(x,y+1)  <->  {x-1,y}-{x,y}
inline DualEdge dual_of(Site p, Site q) {
  if (!adjacent(p, q)) throw std::invalid_argument("sites are not adjacent");
  if (q < p) std::swap(p, q);  // now q is east or north of p
  if (p.y == q.y) return DualEdge{{p.x, p.y - 1}, {p.x, p.y}};
  return DualEdge{{p.x - 1, p.y}, {p.x, p.y}};
}

// The primal edge crossed by a dual edge, as (west, east) or (south, north).
inline std::pair<Site, Site> primal_of(const DualEdge& e) {
  if (e.horizontal()) return {Site{e.b.i, e.a.j}, Site{e.b.i, e.a.j + 1}};
  return {Site{e.a.i, e.b.j}, Site{e.a.i + 1, e.b.j}};
}

struct SiteHash {
  std::size_t operator()(const Site& s) const noexcept {
    auto k = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.x)) << 32) ^
             static_cast<std::uint32_t>(s.y);
    return std::hash<std::uint64_t>{}(k * 0x9E3779B97F4A7C15ull);
  }
};

struct DualVertexHash {
  std::size_t operator()(const DualVertex& v) const noexcept { return SiteHash{}(Site{v.i, v.j}); }
};

struct DualEdgeHash {
  std::size_t operator()(const DualEdge& e) const noexcept {
    return DualVertexHash{}(e.a) * 31 + (e.horizontal() ? 1 : 0);
  }
};

}  // namespace isinglab
