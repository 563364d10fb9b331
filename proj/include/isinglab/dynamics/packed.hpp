#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "isinglab/core/boundary.hpp"
#include "isinglab/core/configuration.hpp"
#include "isinglab/dynamics/coupling.hpp"
#include "isinglab/dynamics/rng.hpp"

namespace isinglab {

// Bit-packed heat-bath dynamics for regions at most 64 columns wide with
// +-1 boundary values. One row of the bounding box is one 64-bit word
// (bit b <-> column xmin + b); cells outside the region hold their fixed
// boundary value. A sweep updates the two checkerboard colours in turn.
//
// The systematic checkerboard heat-bath chain is pi-stationary (each colour
// update is a product of exact conditional resamplings) and monotone, so
// it supports coupling from the past on wide strips at a fraction of the
// cost of the random-scan chain.
class PackedLattice {
 public:
  using Rows = std::vector<std::uint64_t>;

  static bool supports(const BoundaryCondition& bc) {
    const auto& r = *bc.region();
    return r.xmax() - r.xmin() + 1 <= 64 && !bc.has_free_sites();
  }

  PackedLattice(const BoundaryCondition& bc, double beta) : region_(bc.region()) {
    if (!supports(bc)) throw std::invalid_argument("packed engine needs width <= 64 and no free sites");
    const auto& r = *region_;
    x0_ = r.xmin();
    y0_ = r.ymin();
    w_ = r.xmax() - x0_ + 1;
    h_ = r.ymax() - y0_ + 1;
    active_.assign(h_, 0);
    fixed_.assign(h_ + 2, 0);
    lwall_.assign(h_, 0);
    rwall_.assign(h_, 0);
    for (auto s : r.sites()) active_[s.y - y0_] |= bit(s.x - x0_);
    for (std::size_t b = 0; b < r.boundary().size(); ++b) {
      Site s = r.boundary()[b];
      if (bc.at(b) < 0) continue;
      int row = s.y - y0_;
      if (s.x < x0_) lwall_[row] = 1;
      else if (s.x > r.xmax()) rwall_[row] = std::uint64_t{1} << (w_ - 1);
      else fixed_[row + 1] |= bit(s.x - x0_);
    }
    for (int c = 0; c < 2; ++c) {
      lanes_[c].assign(h_, 0);
      for (int row = 0; row < h_; ++row)
        for (int b = 0; b < w_; ++b)
          if (((x0_ + b + y0_ + row) & 1) == c) lanes_[c][row] |= bit(b);
      for (int row = 0; row < h_; ++row) lanes_[c][row] &= active_[row];
    }
    // P(new spin = +) with k plus neighbours is 1/(1+exp(-2 beta (2k - 4))),
    // stored as a 64-bit fixed-point threshold.
    for (int k = 0; k <= 4; ++k) {
      long double p = 1.0L / (1.0L + std::exp(-2.0L * beta * (2 * k - 4)));
      long double scaled = std::ldexp(p, 64);
      thresh_[k] = scaled >= 18446744073709551615.0L ? ~std::uint64_t{0}
                                                     : static_cast<std::uint64_t>(scaled);
      int last_one = thresh_[k] ? 63 - std::countr_zero(thresh_[k]) : -1;
      for (int j = 0; j < kSerialBits; ++j) {
        serial_[j][k] = 0 - ((thresh_[k] >> (63 - j)) & 1);
        alive_[j][k] = j < last_one ? ~std::uint64_t{0} : 0;
      }
      tail_[k] = (thresh_[k] << kSerialBits) >> kSerialBits;
    }
  }

  const RegionPtr& region() const { return region_; }
  int rows() const { return h_; }
  std::size_t sites() const { return region_->size(); }

  Rows uniform(Spin s) const {
    Rows x(h_);
    for (int r = 0; r < h_; ++r) x[r] = (s > 0 ? active_[r] : 0) | (fixed_[r + 1] & ~active_[r]);
    return x;
  }

  Rows pack(const SpinConfiguration& c) const {
    Rows x = uniform(-1);
    for (std::size_t k = 0; k < c.size(); ++k)
      if (c[k] > 0) {
        Site s = region_->sites()[k];
        x[s.y - y0_] |= bit(s.x - x0_);
      }
    return x;
  }

  SpinConfiguration unpack(const Rows& x) const {
    std::vector<Spin> s(region_->size());
    for (std::size_t k = 0; k < s.size(); ++k) {
      Site p = region_->sites()[k];
      s[k] = (x[p.y - y0_] >> (p.x - x0_)) & 1 ? Spin{1} : Spin{-1};
    }
    return {region_, std::move(s)};
  }

  bool equal(const Rows& a, const Rows& b) const {
    for (int r = 0; r < h_; ++r)
      if ((a[r] ^ b[r]) & active_[r]) return false;
    return true;
  }

  std::size_t disagreements(const Rows& a, const Rows& b) const {
    std::size_t n = 0;
    for (int r = 0; r < h_; ++r) n += std::popcount((a[r] ^ b[r]) & active_[r]);
    return n;
  }

  // Update all sites of one colour in every chain of `chains`, using the
  // uniforms addressed by (key, sweep, colour, row).
  template <std::size_t N>
  void half_sweep(std::array<Rows*, N> chains, std::uint64_t key, std::uint64_t sweep, int color) const {
    const auto& lanes = lanes_[color];
    for (int r = 0; r < h_; ++r) {
      const std::uint64_t lane = lanes[r];
      if (!lane) continue;
      // lanes of each chain whose plus-neighbour count equals c
      std::array<std::array<std::uint64_t, 5>, N> eq;
      std::array<std::uint64_t, 5> need{};
      for (std::size_t i = 0; i < N; ++i) {
        const Rows& x = *chains[i];
        const std::uint64_t mid = x[r];
        const std::uint64_t up = r + 1 < h_ ? x[r + 1] : fixed_[h_ + 1];
        const std::uint64_t dn = r > 0 ? x[r - 1] : fixed_[0];
        const std::uint64_t lf = (mid << 1) | lwall_[r];
        const std::uint64_t rt = (mid >> 1) | rwall_[r];
        // bit-sliced sum of four bits: count = b0 + 2 b1 + 4 b2
        const std::uint64_t s1 = up ^ dn, c1 = up & dn;
        const std::uint64_t s2 = lf ^ rt, c2 = lf & rt;
        const std::uint64_t b0 = s1 ^ s2, c3 = s1 & s2;
        const std::uint64_t b1 = c1 ^ c2 ^ c3, b2 = c1 & c2;
        eq[i][0] = lane & ~(b0 | b1 | b2);
        eq[i][1] = lane & b0 & ~(b1 | b2);
        eq[i][2] = lane & b1 & ~b0;
        eq[i][3] = lane & b1 & b0;
        eq[i][4] = lane & b2;
        for (int c = 0; c < 5; ++c) need[c] |= eq[i][c];
      }
      const auto accept = draw_decisions(need, counter_word(key, (sweep * 2 + color) * h_ + r));
      for (std::size_t i = 0; i < N; ++i) {
        std::uint64_t plus = 0;
        for (int c = 0; c < 5; ++c) plus |= eq[i][c] & accept[c];
        Rows& x = *chains[i];
        x[r] = (x[r] & ~lane) | plus;
      }
    }
  }

  void sweep(Rows& x, std::uint64_t key, std::uint64_t s) const {
    half_sweep<1>({&x}, key, s, 0);
    half_sweep<1>({&x}, key, s, 1);
  }
  void sweep(Rows& top, Rows& bot, std::uint64_t key, std::uint64_t s) const {
    half_sweep<2>({&top, &bot}, key, s, 0);
    half_sweep<2>({&top, &bot}, key, s, 1);
  }

 private:
  static constexpr std::uint64_t bit(int b) { return std::uint64_t{1} << b; }

  // For every lane, one uniform U compared with the thresholds it needs.
  // The leading bits of U are revealed bit-serially for all lanes at once
  // (bit k of U at a lane is that lane's bit of word k); the few lanes
  // still tied with a threshold after kSerialBits bits get the rest of
  // their U from a per-lane word. On return accept[c] holds the lanes of
  // open[c] with U < threshold c.
  static constexpr int kSerialBits = 5;

  std::array<std::uint64_t, 5> draw_decisions(const std::array<std::uint64_t, 5>& need,
                                              std::uint64_t stream) const {
    const std::uint64_t seed = stream;
    // kept in scalars so they stay in registers
    std::uint64_t o0 = need[0], o1 = need[1], o2 = need[2], o3 = need[3], o4 = need[4];
    std::uint64_t a0 = 0, a1 = 0, a2 = 0, a3 = 0, a4 = 0;
    for (int k = 0; k < kSerialBits && (o0 | o1 | o2 | o3 | o4); ++k) {
      const std::uint64_t u = wyrand(stream), nu = ~u;
      const auto& tb = serial_[k];
      const auto& al = alive_[k];
      // tb[c] is all-ones where bit k of threshold c is set
      a0 |= o0 & nu & tb[0];
      a1 |= o1 & nu & tb[1];
      a2 |= o2 & nu & tb[2];
      a3 |= o3 & nu & tb[3];
      a4 |= o4 & nu & tb[4];
      o0 &= ~(u ^ tb[0]) & al[0];
      o1 &= ~(u ^ tb[1]) & al[1];
      o2 &= ~(u ^ tb[2]) & al[2];
      o3 &= ~(u ^ tb[3]) & al[3];
      o4 &= ~(u ^ tb[4]) & al[4];
    }
    std::array<std::uint64_t, 5> acc{a0, a1, a2, a3, a4};
    const std::array<std::uint64_t, 5> open{o0, o1, o2, o3, o4};
    std::uint64_t any = o0 | o1 | o2 | o3 | o4;
    while (any) {
      const int b = std::countr_zero(any);
      any &= any - 1;
      // bits kSerialBits.. of this lane's U, compared with the matching
      // bits of each threshold
      const std::uint64_t rest = mix64(seed ^ (0xD1B54A32D192ED03ull * (b + 1))) >> kSerialBits;
      for (int c = 0; c < 5; ++c)
        if ((open[c] >> b) & 1 && rest < tail_[c]) acc[c] |= bit(b);
    }
    return acc;
  }

  static std::uint64_t wyrand(std::uint64_t& state) {
    state += 0xA0761D6478BD642Full;
    unsigned __int128 m = static_cast<unsigned __int128>(state) * (state ^ 0xE7037ED1A0B428DBull);
    return static_cast<std::uint64_t>(m >> 64) ^ static_cast<std::uint64_t>(m);
  }

  RegionPtr region_;
  int x0_ = 0, y0_ = 0, w_ = 0, h_ = 0;
  std::vector<std::uint64_t> active_, fixed_, lwall_, rwall_;
  std::array<std::vector<std::uint64_t>, 2> lanes_;
  std::array<std::uint64_t, 5> thresh_{};
  std::array<std::array<std::uint64_t, 5>, kSerialBits> serial_{}, alive_{};
  std::array<std::uint64_t, 5> tail_{};
};

struct PackedCftpOptions {
  std::uint64_t initial_sweeps = 1;
  std::uint64_t max_events = std::uint64_t{1} << 30;  // sweeps x sites
};

// Coupling from the past for the checkerboard chain. Sweep s >= 1 is the
// sweep ending at time -s + 1; its uniforms depend only on (seed, s), so
// doubling epochs replay identical randomness.
inline CftpOutcome packed_cftp(const PackedLattice& lat, std::uint64_t seed,
                               const PackedCftpOptions& opt = {}) {
  CftpOutcome out;
  std::uint64_t m = std::max<std::uint64_t>(1, opt.initial_sweeps);
  while (m * lat.sites() <= opt.max_events) {
    ++out.epochs;
    out.events = m * lat.sites();
    auto top = lat.uniform(1), bot = lat.uniform(-1);
    for (std::uint64_t s = m; s >= 1; --s) lat.sweep(top, bot, seed, s);
    if (lat.equal(top, bot)) {
      out.sample = lat.unpack(top);
      return out;
    }
    m *= 2;
  }
  return out;
}

inline CftpOutcome packed_cftp(const BoundaryCondition& bc, double beta, std::uint64_t seed,
                               const PackedCftpOptions& opt = {}) {
  return packed_cftp(PackedLattice(bc, beta), seed, opt);
}

}  // namespace isinglab
