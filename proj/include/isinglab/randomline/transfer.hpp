#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "isinglab/core/duality.hpp"
#include "isinglab/core/errors.hpp"
#include "isinglab/harness/stats.hpp"

namespace isinglab {

enum class Transverse { periodic, free };

// Free-boundary Ising model at inverse temperature beta* on an infinite
// dual strip `width` rows wide, by transfer matrix along the strip. The
// eigen-decomposition is computed once; correlations at any separation
// follow from it.
class DualStrip {
 public:
  static constexpr int kWidthCap = 10;

  DualStrip(int width, double beta, Transverse sides = Transverse::periodic)
      : width_(width), beta_star_(dual_beta(beta)) {
    if (width < 1 || width > kWidthCap) throw SizeCapExceeded("dual strip width must lie in 1..10");
    const int n = 1 << width;
    auto spin = [](int s, int r) { return (s >> r) & 1 ? 1.0 : -1.0; };
    std::vector<double> col(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) {
      double v = 0;
      for (int r = 0; r + 1 < width; ++r) v += spin(s, r) * spin(s, r + 1);
      if (sides == Transverse::periodic && width > 2) v += spin(s, width - 1) * spin(s, 0);
      col[static_cast<std::size_t>(s)] = v;
    }
    Eigen::MatrixXd T(n, n);
    for (int s = 0; s < n; ++s)
      for (int t = 0; t < n; ++t) {
        double h = 0;
        for (int r = 0; r < width; ++r) h += spin(s, r) * spin(t, r);
        T(s, t) = std::exp(beta_star_ * (0.5 * col[static_cast<std::size_t>(s)] + h +
                                         0.5 * col[static_cast<std::size_t>(t)] - 2.0 * width));
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    if (es.info() != Eigen::Success) throw ConvergenceError("transfer matrix eigen-decomposition failed");
    lambda_ = es.eigenvalues();
    vectors_ = es.eigenvectors();
    row_ = width / 2;
    // amplitudes <0|S|k> for the spin in row `row_`
    const int top = n - 1;
    Eigen::VectorXd s(n);
    for (int st = 0; st < n; ++st) s(st) = spin(st, row_);
    Eigen::VectorXd v0 = vectors_.col(top);
    amp_ = vectors_.transpose() * s.cwiseProduct(v0);
  }

  int width() const { return width_; }

  // <sigma_u sigma_v> for u, v in the middle row, `separation` columns apart.
  double correlation(int separation) const {
    if (separation < 0) throw std::invalid_argument("separation must be nonnegative");
    const int n = static_cast<int>(lambda_.size());
    const double l0 = lambda_(n - 1);
    double c = 0;
    for (int k = 0; k < n; ++k) c += amp_(k) * amp_(k) * std::pow(lambda_(k) / l0, separation);
    return c;
  }

  // Slope of -ln <sigma_u sigma_v> against the separation, least squares on
  // [from, to].
  LinearFit decay_fit(int from, int to) const {
    std::vector<double> x, y;
    for (int d = from; d <= to; ++d) {
      x.push_back(d);
      y.push_back(-std::log(correlation(d)));
    }
    return ols_fit(x, y);
  }

 private:
  int width_;
  double beta_star_;
  int row_ = 0;
  Eigen::VectorXd lambda_;
  Eigen::MatrixXd vectors_;
  Eigen::VectorXd amp_;
};

inline double dual_strip_correlation(int width, int separation, double beta,
                                     Transverse sides = Transverse::periodic) {
  return DualStrip(width, beta, sides).correlation(separation);
}

// Decay rate of the dual two-point function along a width-`width` strip.
inline double dual_strip_decay_rate(int width, double beta, int from = 6, int to = 24,
                                    Transverse sides = Transverse::periodic) {
  return DualStrip(width, beta, sides).decay_fit(from, to).slope;
}

}  // namespace isinglab
