#pragma once

#include <array>
#include <cstdint>
#include <limits>

// Randomness used everywhere in the library. The standard distributions are
// not reproducible across library implementations, so the few we need are
// written out here; the bit generators follow the published reference code.

namespace isinglab {

// SplitMix64 finalizer: a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// Seed of replica r under a master seed. Stable by contract:
//   replica_seed(m, r) = mix64(m + golden * (r + 1)).
constexpr std::uint64_t replica_seed(std::uint64_t master, std::uint64_t replica) {
  return mix64(master + kGolden * (replica + 1));
}

// Counter-based stream: word number `counter` of the stream keyed by `key`.
// Used where the same random numbers must be regenerated on demand (CFTP).
constexpr std::uint64_t counter_word(std::uint64_t key, std::uint64_t counter) {
  return mix64(mix64(counter + key) ^ (key * kGolden + 0x632BE59BD9B4E019ull));
}

class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return mix64(state_ += kGolden); }

 private:
  std::uint64_t state_;
};

// xoshiro256** 1.0
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;
  explicit Xoshiro256(std::uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& w : s_) w = sm();
  }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> s_{};
};

// Uniform double in [0, 1) from the top 53 bits.
constexpr double to_unit(std::uint64_t w) { return static_cast<double>(w >> 11) * 0x1.0p-53; }

template <class G>
double uniform01(G& g) {
  return to_unit(g());
}

// Uniform integer in [0, n) by multiply-and-reject (Lemire).
template <class G>
std::uint64_t uniform_below(G& g, std::uint64_t n) {
  unsigned __int128 m = static_cast<unsigned __int128>(g()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(g()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace isinglab
