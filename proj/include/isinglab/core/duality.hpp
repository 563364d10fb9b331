#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

namespace isinglab {

// 1/2 ln(1 + sqrt 2)
inline const double beta_critical = 0.5 * std::log1p(std::numbers::sqrt2);

// tanh(beta*) = exp(-2 beta), i.e. beta* = atanh(exp(-2 beta)).
inline double dual_beta(double beta) {
  if (!(beta > 0)) throw std::invalid_argument("dual_beta needs beta > 0");
  return std::atanh(std::exp(-2.0 * beta));
}

// Axis surface tension tau_beta(0) = 2 beta + ln tanh beta.
inline double surface_tension_axis(double beta) {
  if (!(beta > beta_critical)) throw std::invalid_argument("surface tension needs beta > beta_c");
  return 2.0 * beta + std::log(std::tanh(beta));
}

// Bernoulli boundary threshold 1/2 (1 + tanh 4 beta).
inline double bernoulli_threshold(double beta) { return 0.5 * (1.0 + std::tanh(4.0 * beta)); }

struct ModelParams {
  double beta = 0;
  double beta_star = 0;
  double beta_c = beta_critical;
  std::optional<double> tau0;          // only above beta_c
  std::optional<double> kappa_fitted;  // empirical; there is no closed form

  static ModelParams at(double beta) {
    ModelParams p;
    p.beta = beta;
    p.beta_star = dual_beta(beta);
    if (beta > beta_critical) p.tau0 = surface_tension_axis(beta);
    return p;
  }
};

}  // namespace isinglab
