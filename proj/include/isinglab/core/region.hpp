#pragma once

#include <algorithm>
#include <climits>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "isinglab/core/lattice.hpp"

namespace isinglab {

enum class RegionKind { box, truncated_strip, slit_strip, custom };

// A finite set of sites of Z^2 together with its outer vertex boundary,
// its dual edges E* (duals of primal edges touching the region) and dual
// vertices. Regions are immutable and shared through RegionPtr.
class LatticeRegion {
 public:
  // Sites {1..width} x {1..height}.
  static std::shared_ptr<const LatticeRegion> box(int width, int height) {
    if (width < 1 || height < 1) throw std::invalid_argument("box dimensions must be positive");
    std::vector<Site> s;
    for (int y = 1; y <= height; ++y)
      for (int x = 1; x <= width; ++x) s.push_back({x, y});
    auto r = build(std::move(s), RegionKind::box);
    r->width_ = width;
    r->height_ = height;
    return r;
  }

  // Sites {1..width} x {1-cutoff..cutoff}. The reflection y -> 1-y maps it to itself.
  static std::shared_ptr<const LatticeRegion> truncated_strip(int width, int cutoff) {
    if (width < 1 || cutoff < 1) throw std::invalid_argument("strip dimensions must be positive");
    std::vector<Site> s;
    for (int y = 1 - cutoff; y <= cutoff; ++y)
      for (int x = 1; x <= width; ++x) s.push_back({x, y});
    auto r = build(std::move(s), RegionKind::truncated_strip);
    r->width_ = width;
    r->height_ = 2 * cutoff;
    r->cutoff_ = cutoff;
    return r;
  }

  // Truncated strip with the two rows y in {0, 1} removed for x <= a and x >= b,
  // leaving an opening of columns a+1..b-1 between the upper and lower half.
  static std::shared_ptr<const LatticeRegion> slit_strip(int a, int b, int width, int cutoff) {
    if (!(0 <= a && a + 1 < b && b <= width + 1) || cutoff < 2)
      throw std::invalid_argument("slit strip needs 0 <= a < b-1 <= width and cutoff >= 2");
    std::vector<Site> s;
    for (int y = 1 - cutoff; y <= cutoff; ++y)
      for (int x = 1; x <= width; ++x) {
        bool slit = (y == 0 || y == 1) && (x <= a || x >= b);
        if (!slit) s.push_back({x, y});
      }
    auto r = build(std::move(s), RegionKind::slit_strip);
    r->width_ = width;
    r->height_ = 2 * cutoff;
    r->cutoff_ = cutoff;
    r->slit_a_ = a;
    r->slit_b_ = b;
    return r;
  }

  static std::shared_ptr<const LatticeRegion> from_sites(std::vector<Site> sites) {
    if (sites.empty()) throw std::invalid_argument("region must contain at least one site");
    return build(std::move(sites), RegionKind::custom);
  }

  RegionKind kind() const { return kind_; }
  int width() const { return width_; }
  int height() const { return height_; }
  int cutoff() const { return cutoff_; }
  int slit_a() const { return slit_a_; }
  int slit_b() const { return slit_b_; }

  std::size_t size() const { return sites_.size(); }
  // Sites in row-major order (y ascending, then x ascending).
  const std::vector<Site>& sites() const { return sites_; }
  // Outer vertex boundary, same ordering.
  const std::vector<Site>& boundary() const { return boundary_; }
  const std::vector<DualEdge>& dual_edges() const { return dual_edges_; }
  const std::vector<DualVertex>& dual_vertices() const { return dual_vertices_; }

  int xmin() const { return xmin_ + 1; }
  int xmax() const { return xmax_ - 1; }
  int ymin() const { return ymin_ + 1; }
  int ymax() const { return ymax_ - 1; }

  std::optional<std::size_t> index_of(Site s) const {
    int c = cell(s);
    if (c >= 0) return static_cast<std::size_t>(c);
    return std::nullopt;
  }
  std::optional<std::size_t> boundary_index_of(Site s) const {
    int c = cell(s);
    if (c < 0 && c != kNone) return static_cast<std::size_t>(-1 - c);
    return std::nullopt;
  }
  bool contains(Site s) const { return cell(s) >= 0; }

  // Neighbour of site k in direction d: a site index (>= 0) or, for a
  // boundary site b, the value -1 - b.
  std::int32_t neighbor(std::size_t k, Direction d) const {
    return neighbors_[4 * k + static_cast<int>(d)];
  }

  bool operator==(const LatticeRegion& other) const { return sites_ == other.sites_; }

  std::string describe() const {
    switch (kind_) {
      case RegionKind::box:
        return "box(" + std::to_string(width_) + "x" + std::to_string(height_) + ")";
      case RegionKind::truncated_strip:
        return "strip(ell=" + std::to_string(width_) + ",n=" + std::to_string(cutoff_) + ")";
      case RegionKind::slit_strip:
        return "slit_strip(a=" + std::to_string(slit_a_) + ",b=" + std::to_string(slit_b_) +
               ",ell=" + std::to_string(width_) + ",n=" + std::to_string(cutoff_) + ")";
      case RegionKind::custom:
        return "custom(" + std::to_string(sites_.size()) + " sites)";
    }
    return "region";
  }

 private:
  static constexpr int kNone = INT_MIN;

  static bool row_major(const Site& a, const Site& b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  }

  int cell(Site s) const {
    if (s.x < xmin_ || s.x > xmax_ || s.y < ymin_ || s.y > ymax_) return kNone;
    return grid_[static_cast<std::size_t>(s.y - ymin_) * gw_ + (s.x - xmin_)];
  }

  static std::shared_ptr<LatticeRegion> build(std::vector<Site> sites, RegionKind kind) {
    auto r = std::shared_ptr<LatticeRegion>(new LatticeRegion());
    std::sort(sites.begin(), sites.end(), row_major);
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
    r->kind_ = kind;
    r->sites_ = std::move(sites);

    int x0 = INT_MAX, x1 = INT_MIN, y0 = INT_MAX, y1 = INT_MIN;
    for (auto s : r->sites_) {
      x0 = std::min(x0, s.x);
      x1 = std::max(x1, s.x);
      y0 = std::min(y0, s.y);
      y1 = std::max(y1, s.y);
    }
    // the grid is padded by one so that boundary sites have cells too
    r->xmin_ = x0 - 1;
    r->xmax_ = x1 + 1;
    r->ymin_ = y0 - 1;
    r->ymax_ = y1 + 1;
    r->gw_ = static_cast<std::size_t>(r->xmax_ - r->xmin_ + 1);
    std::size_t gh = static_cast<std::size_t>(r->ymax_ - r->ymin_ + 1);
    r->grid_.assign(r->gw_ * gh, kNone);
    auto at = [&](Site s) -> int& {
      return r->grid_[static_cast<std::size_t>(s.y - r->ymin_) * r->gw_ + (s.x - r->xmin_)];
    };
    for (std::size_t k = 0; k < r->sites_.size(); ++k) at(r->sites_[k]) = static_cast<int>(k);

    std::vector<Site> bnd;
    for (auto s : r->sites_)
      for (auto d : kDirections) {
        Site t = step(s, d);
        if (at(t) == kNone) bnd.push_back(t);
      }
    std::sort(bnd.begin(), bnd.end(), row_major);
    bnd.erase(std::unique(bnd.begin(), bnd.end()), bnd.end());
    r->boundary_ = std::move(bnd);
    for (std::size_t b = 0; b < r->boundary_.size(); ++b) at(r->boundary_[b]) = -1 - static_cast<int>(b);

    r->neighbors_.resize(4 * r->sites_.size());
    std::set<DualEdge> edges;
    for (std::size_t k = 0; k < r->sites_.size(); ++k)
      for (auto d : kDirections) {
        Site t = step(r->sites_[k], d);
        r->neighbors_[4 * k + static_cast<int>(d)] = at(t);
        edges.insert(dual_of(r->sites_[k], t));
      }
    r->dual_edges_.assign(edges.begin(), edges.end());
    std::set<DualVertex> verts;
    for (const auto& e : r->dual_edges_) {
      verts.insert(e.a);
      verts.insert(e.b);
    }
    r->dual_vertices_.assign(verts.begin(), verts.end());
    return r;
  }

  LatticeRegion() = default;

  RegionKind kind_ = RegionKind::custom;
  int width_ = 0, height_ = 0, cutoff_ = 0, slit_a_ = 0, slit_b_ = 0;
  std::vector<Site> sites_;
  std::vector<Site> boundary_;
  std::vector<DualEdge> dual_edges_;
  std::vector<DualVertex> dual_vertices_;
  std::vector<std::int32_t> neighbors_;
  int xmin_ = 0, xmax_ = 0, ymin_ = 0, ymax_ = 0;
  std::size_t gw_ = 0;
  std::vector<int> grid_;
};

using RegionPtr = std::shared_ptr<const LatticeRegion>;

inline bool same_region(const RegionPtr& a, const RegionPtr& b) {
  return a == b || (a && b && *a == *b);
}

}  // namespace isinglab
