#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "isinglab/core/errors.hpp"
#include "isinglab/core/region.hpp"

namespace isinglab {

class SpinConfiguration {
 public:
  SpinConfiguration(RegionPtr region, std::vector<Spin> spins)
      : region_(std::move(region)), spins_(std::move(spins)) {
    if (spins_.size() != region_->size()) throw RegionMismatch("spin vector does not match region");
  }

  static SpinConfiguration uniform(RegionPtr r, Spin s) {
    std::size_t n = r->size();
    return {std::move(r), std::vector<Spin>(n, s)};
  }

  // Bit k of `code` set means site k is +1.
  static SpinConfiguration from_code(RegionPtr r, std::uint64_t code) {
    std::vector<Spin> s(r->size());
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = (code >> k) & 1 ? 1 : -1;
    return {std::move(r), std::move(s)};
  }

  std::uint64_t code() const {
    if (spins_.size() > 64) throw SizeCapExceeded("configuration code needs at most 64 sites");
    std::uint64_t c = 0;
    for (std::size_t k = 0; k < spins_.size(); ++k)
      if (spins_[k] > 0) c |= std::uint64_t{1} << k;
    return c;
  }

  const RegionPtr& region() const { return region_; }
  std::size_t size() const { return spins_.size(); }
  Spin operator[](std::size_t k) const { return spins_[k]; }
  Spin& operator[](std::size_t k) { return spins_[k]; }
  Spin at(Site s) const {
    auto k = region_->index_of(s);
    if (!k) throw std::out_of_range("site outside region");
    return spins_[*k];
  }
  const std::vector<Spin>& spins() const { return spins_; }
  std::vector<Spin>& spins() { return spins_; }

  SpinConfiguration flipped(std::size_t k) const {
    SpinConfiguration c = *this;
    c.spins_[k] = static_cast<Spin>(-c.spins_[k]);
    return c;
  }

  bool operator==(const SpinConfiguration& o) const {
    return same_region(region_, o.region_) && spins_ == o.spins_;
  }

  // Rows from top to bottom, '+' and '-'; cells outside the region as ' '.
  std::string render() const {
    std::string out;
    const auto& r = *region_;
    for (int y = r.ymax(); y >= r.ymin(); --y) {
      for (int x = r.xmin(); x <= r.xmax(); ++x) {
        auto k = r.index_of({x, y});
        out += k ? (spins_[*k] > 0 ? '+' : '-') : ' ';
      }
      out += '\n';
    }
    return out;
  }

 private:
  RegionPtr region_;
  std::vector<Spin> spins_;
};

// sigma <= eta pointwise.
inline bool stochastically_leq(const SpinConfiguration& sigma, const SpinConfiguration& eta) {
  if (!same_region(sigma.region(), eta.region())) throw RegionMismatch("configurations on different regions");
  for (std::size_t k = 0; k < sigma.size(); ++k)
    if (sigma[k] > eta[k]) return false;
  return true;
}

}  // namespace isinglab
