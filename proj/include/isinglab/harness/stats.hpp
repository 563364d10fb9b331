#pragma once

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace isinglab {

// Wilson score interval for k successes out of n (z = 1.96 by default).
inline std::pair<double, double> wilson_interval(double k, double n, double z = 1.959963984540054) {
  if (n <= 0) return {0.0, 1.0};
  const double p = k / n, z2 = z * z;
  const double denom = 1 + z2 / n;
  const double centre = (p + z2 / (2 * n)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

inline std::pair<double, double> mean_and_stderr(const std::vector<double>& x) {
  if (x.empty()) return {0.0, 0.0};
  double m = 0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  if (x.size() < 2) return {m, 0.0};
  double s = 0;
  for (double v : x) s += (v - m) * (v - m);
  s /= static_cast<double>(x.size() - 1);
  return {m, std::sqrt(s / static_cast<double>(x.size()))};
}

inline double binomial_stderr(double p, double n) { return n > 0 ? std::sqrt(p * (1 - p) / n) : 0.0; }

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  std::size_t points = 0;
};

// Ordinary least squares y = a + b x.
inline LinearFit ols_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit needs >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.points = x.size();
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

struct ChiSquare {
  double statistic = 0;
  double dof = 0;
  double p_value = 1;
};

// Goodness of fit of observed counts against expected probabilities. Cells
// with expected count below `min_expected` are pooled into one.
inline ChiSquare chi_square_gof(const std::vector<double>& observed, const std::vector<double>& probs,
                                double min_expected = 5.0) {
  double n = 0;
  for (double o : observed) n += o;
  ChiSquare r;
  double pool_o = 0, pool_e = 0;
  int cells = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    double e = n * probs[i];
    if (e < min_expected) {
      pool_o += observed[i];
      pool_e += e;
      continue;
    }
    r.statistic += (observed[i] - e) * (observed[i] - e) / e;
    ++cells;
  }
  if (pool_e > 0) {
    r.statistic += (pool_o - pool_e) * (pool_o - pool_e) / pool_e;
    ++cells;
  }
  r.dof = cells - 1;
  if (r.dof < 1) return r;
  r.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(r.dof), r.statistic));
  return r;
}

// Two-sample test of homogeneity for histograms a and b (same binning).
// Bins where the pooled count is below `min_count` are merged.
inline ChiSquare chi_square_two_sample(const std::vector<double>& a, const std::vector<double>& b,
                                       double min_count = 10.0) {
  double na = 0, nb = 0;
  for (double v : a) na += v;
  for (double v : b) nb += v;
  std::vector<std::pair<double, double>> bins;
  double ra = 0, rb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] + b[i] < min_count) {
      ra += a[i];
      rb += b[i];
    } else {
      bins.push_back({a[i], b[i]});
    }
  }
  if (ra + rb > 0) bins.push_back({ra, rb});
  ChiSquare r;
  const double n = na + nb;
  for (auto [x, y] : bins) {
    const double t = x + y;
    const double ea = t * na / n, eb = t * nb / n;
    if (ea > 0) r.statistic += (x - ea) * (x - ea) / ea;
    if (eb > 0) r.statistic += (y - eb) * (y - eb) / eb;
  }
  r.dof = static_cast<double>(bins.size()) - 1;
  if (r.dof < 1) return r;
  r.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(r.dof), r.statistic));
  return r;
}

}  // namespace isinglab
