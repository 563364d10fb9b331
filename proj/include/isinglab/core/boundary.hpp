#pragma once

#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "isinglab/core/errors.hpp"
#include "isinglab/core/region.hpp"
#include "isinglab/dynamics/rng.hpp"

namespace isinglab {

enum class Side { north, east, south, west };

// Spin on each of the four sides, read in the order (N, E, S, W).
struct SideSpec {
  Spin north = 1, east = 1, south = 1, west = 1;

  Spin operator[](Side s) const {
    switch (s) {
      case Side::north: return north;
      case Side::east: return east;
      case Side::south: return south;
      case Side::west: return west;
    }
    return 0;
  }

  // Accepts "(-,-,+,-)", "--+-" or "-,-,+,-".
  static SideSpec parse(const std::string& text) {
    std::vector<Spin> v;
    for (char c : text) {
      if (c == '+') v.push_back(1);
      else if (c == '-') v.push_back(-1);
      else if (c == '0') v.push_back(0);
      else if (c != '(' && c != ')' && c != ',' && c != ' ')
        throw std::invalid_argument("bad side spec: " + text);
    }
    if (v.size() != 4) throw std::invalid_argument("side spec needs four signs: " + text);
    return {v[0], v[1], v[2], v[3]};
  }

  std::string str() const {
    auto c = [](Spin s) { return s > 0 ? '+' : s < 0 ? '-' : '0'; };
    return std::string{'(', c(north), ',', c(east), ',', c(south), ',', c(west), ')'};
  }
};

// Which side of the region's bounding box a boundary site sits on. Sites
// inside the bounding box (slit sites) have no side.
inline std::optional<Side> side_of(const LatticeRegion& r, Site b) {
  if (b.y > r.ymax()) return Side::north;
  if (b.y < r.ymin()) return Side::south;
  if (b.x < r.xmin()) return Side::west;
  if (b.x > r.xmax()) return Side::east;
  return std::nullopt;
}

// Assignment of a spin to every site of the outer boundary. A value of 0
// marks a free site: it contributes nothing to the energy.
class BoundaryCondition {
 public:
  BoundaryCondition(RegionPtr region, std::vector<Spin> values, std::string provenance)
      : region_(std::move(region)), values_(std::move(values)), provenance_(std::move(provenance)) {
    if (!region_) throw std::invalid_argument("boundary condition needs a region");
    if (values_.size() != region_->boundary().size())
      throw RegionMismatch("boundary values do not cover the region boundary");
  }

  static BoundaryCondition uniform(RegionPtr r, Spin s) {
    std::size_t n = r->boundary().size();
    return {std::move(r), std::vector<Spin>(n, s), s > 0 ? "all-plus" : "all-minus"};
  }
  static BoundaryCondition plus(RegionPtr r) { return uniform(std::move(r), 1); }
  static BoundaryCondition minus(RegionPtr r) { return uniform(std::move(r), -1); }

  static BoundaryCondition free(RegionPtr r) {
    std::size_t n = r->boundary().size();
    return {std::move(r), std::vector<Spin>(n, 0), "free"};
  }

  static BoundaryCondition sides(RegionPtr r, SideSpec spec) {
    std::vector<Spin> v;
    for (auto b : r->boundary()) {
      auto s = side_of(*r, b);
      if (!s) throw std::invalid_argument("side spec undefined for interior boundary sites");
      v.push_back(spec[*s]);
    }
    return {std::move(r), std::move(v), "sides" + spec.str()};
  }

  // Side spec with the sites of one side whose coordinate along that side
  // lies in [from, to] overridden by `value` (the interval Delta).
  static BoundaryCondition delta_interval(RegionPtr r, SideSpec spec, Side side, int from, int to,
                                          Spin value) {
    auto bc = sides(r, spec);
    for (std::size_t k = 0; k < r->boundary().size(); ++k) {
      Site b = r->boundary()[k];
      if (side_of(*r, b) != side) continue;
      int along = (side == Side::north || side == Side::south) ? b.x : b.y;
      if (along >= from && along <= to) bc.values_[k] = value;
    }
    bc.provenance_ += " delta[" + std::to_string(from) + "," + std::to_string(to) + "]=" +
                      (value > 0 ? "+" : "-");
    return bc;
  }

  // eta(x, y) = -1 for y > 0 and +1 for y <= 0.
  static BoundaryCondition half_plane_eta(RegionPtr r) {
    std::vector<Spin> v;
    for (auto b : r->boundary()) v.push_back(b.y > 0 ? Spin{-1} : Spin{1});
    return {std::move(r), std::move(v), "half-plane-eta"};
  }

  static BoundaryCondition bernoulli(RegionPtr r, double p_plus, std::uint64_t seed) {
    if (!(p_plus >= 0.0 && p_plus <= 1.0)) throw std::invalid_argument("p_plus must lie in [0,1]");
    Xoshiro256 rng(seed);
    std::vector<Spin> v;
    for (std::size_t k = 0; k < r->boundary().size(); ++k)
      v.push_back(uniform01(rng) < p_plus ? Spin{1} : Spin{-1});
    return {std::move(r), std::move(v),
            "bernoulli(p=" + std::to_string(p_plus) + ",seed=" + std::to_string(seed) + ")"};
  }

  static BoundaryCondition explicit_table(RegionPtr r, const std::map<Site, Spin>& table) {
    std::vector<Spin> v;
    for (auto b : r->boundary()) {
      auto it = table.find(b);
      if (it == table.end()) throw std::invalid_argument("explicit table misses a boundary site");
      v.push_back(it->second);
    }
    return {std::move(r), std::move(v), "explicit"};
  }

  const RegionPtr& region() const { return region_; }
  const std::vector<Spin>& values() const { return values_; }
  Spin at(std::size_t boundary_index) const { return values_[boundary_index]; }
  Spin at(Site b) const {
    auto k = region_->boundary_index_of(b);
    if (!k) throw std::out_of_range("site is not on the boundary");
    return values_[*k];
  }
  const std::string& provenance() const { return provenance_; }
  bool has_free_sites() const {
    for (auto s : values_)
      if (s == 0) return true;
    return false;
  }

  BoundaryCondition with_values(const std::vector<std::pair<Site, Spin>>& overrides,
                                std::string note) const {
    BoundaryCondition bc = *this;
    for (auto [b, s] : overrides) {
      auto k = region_->boundary_index_of(b);
      if (!k) throw std::out_of_range("override site is not on the boundary");
      bc.values_[*k] = s;
    }
    bc.provenance_ += " " + note;
    return bc;
  }

  bool operator==(const BoundaryCondition& o) const {
    return same_region(region_, o.region_) && values_ == o.values_;
  }

 private:
  RegionPtr region_;
  std::vector<Spin> values_;
  std::string provenance_;
};

}  // namespace isinglab
