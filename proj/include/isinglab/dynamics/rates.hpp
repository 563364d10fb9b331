#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace isinglab {

enum class RateRule { heat_bath, metropolis };

inline std::string to_string(RateRule r) { return r == RateRule::heat_bath ? "heat-bath" : "metropolis"; }

inline RateRule parse_rule(const std::string& s) {
  if (s == "heat-bath" || s == "heat_bath" || s == "heatbath") return RateRule::heat_bath;
  if (s == "metropolis") return RateRule::metropolis;
  throw std::invalid_argument("unknown rate rule: " + s);
}

// Flip rate c(x, sigma) given the flip cost grad = H(sigma^x) - H(sigma).
inline double flip_rate(RateRule rule, double beta, double grad) {
  if (rule == RateRule::heat_bath) return 1.0 / (1.0 + std::exp(beta * grad));
  return grad <= 0 ? 1.0 : std::exp(-beta * grad);
}

// Heat-bath probability that the updated spin is +1, as a function of the
// neighbour sum h in [-4, 4]: 1 / (1 + exp(-2 beta h)).
struct HeatBathTable {
  explicit HeatBathTable(double beta) {
    for (int h = -4; h <= 4; ++h) p_plus[h + 4] = 1.0 / (1.0 + std::exp(-2.0 * beta * h));
  }
  double operator()(int h) const { return p_plus[h + 4]; }
  std::array<double, 9> p_plus{};
};

// Metropolis acceptance probability min(1, exp(-beta grad)) for grad in {-8,...,8} step 2
// (grad = 2 s h with h in [-4, 4]).
struct MetropolisTable {
  explicit MetropolisTable(double beta) {
    for (int g = -8; g <= 8; ++g) accept[g + 8] = g <= 0 ? 1.0 : std::exp(-beta * g);
  }
  double operator()(int grad) const { return accept[grad + 8]; }
  std::array<double, 17> accept{};
};

}  // namespace isinglab
