#pragma once

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "isinglab/core/gibbs.hpp"
#include "isinglab/dynamics/rates.hpp"
#include "isinglab/dynamics/rng.hpp"

namespace isinglab {

inline constexpr std::size_t kGeneratorSiteCap = 16;

// Generator of the Glauber dynamics on the 2^n configurations of a region,
// indexed by configuration code. Only single-site flips have nonzero rate,
// so the matrix is stored as one rate per (state, site).
class Generator {
 public:
  Generator(const BoundaryCondition& bc, double beta, RateRule rule)
      : bc_(bc), beta_(beta), rule_(rule), pi_(gibbs_exact(bc, beta).probabilities()) {
    const auto& r = *bc.region();
    n_ = r.size();
    if (n_ > kGeneratorSiteCap)
      throw SizeCapExceeded("exact generator allows at most 16 sites, got " + std::to_string(n_));
    const std::uint64_t states = std::uint64_t{1} << n_;
    rates_.resize(states * n_);
    std::vector<Spin> s(n_);
    for (std::uint64_t c = 0; c < states; ++c) {
      for (std::size_t k = 0; k < n_; ++k) s[k] = (c >> k) & 1 ? 1 : -1;
      for (std::size_t k = 0; k < n_; ++k) {
        double grad = 2.0 * s[k] * local_field(r, s, bc.values(), k);
        rates_[c * n_ + k] = flip_rate(rule, beta, grad);
      }
    }
  }

  const BoundaryCondition& bc() const { return bc_; }
  double beta() const { return beta_; }
  RateRule rule() const { return rule_; }
  std::size_t sites() const { return n_; }
  std::uint64_t states() const { return std::uint64_t{1} << n_; }
  double rate(std::uint64_t state, std::size_t k) const { return rates_[state * n_ + k]; }
  const std::vector<double>& stationary() const { return pi_; }

  double exit_rate(std::uint64_t state, std::uint64_t mask = ~std::uint64_t{0}) const {
    double q = 0;
    for (std::size_t k = 0; k < n_; ++k)
      if ((mask >> k) & 1) q += rate(state, k);
    return q;
  }

  double max_exit_rate(std::uint64_t mask = ~std::uint64_t{0}) const {
    double q = 0;
    for (std::uint64_t c = 0; c < states(); ++c) q = std::max(q, exit_rate(c, mask));
    return q;
  }

  // Off-diagonal entries of row `state` as (target, rate), followed by the diagonal.
  std::vector<std::pair<std::uint64_t, double>> row(std::uint64_t state) const {
    std::vector<std::pair<std::uint64_t, double>> out;
    for (std::size_t k = 0; k < n_; ++k) out.push_back({state ^ (std::uint64_t{1} << k), rate(state, k)});
    out.push_back({state, -exit_rate(state)});
    return out;
  }

  // (L f)(s) = sum_k c(k, s) (f(s^k) - f(s)), only sites in `mask` active.
  std::vector<double> apply_function(const std::vector<double>& f, std::uint64_t mask = ~std::uint64_t{0}) const {
    std::vector<double> out(f.size(), 0.0);
    for (std::uint64_t c = 0; c < states(); ++c) {
      double acc = 0;
      for (std::size_t k = 0; k < n_; ++k)
        if ((mask >> k) & 1) acc += rate(c, k) * (f[c ^ (std::uint64_t{1} << k)] - f[c]);
      out[c] = acc;
    }
    return out;
  }

  // (mu L)(s) = sum_k mu(s^k) c(k, s^k) - mu(s) sum_k c(k, s).
  std::vector<double> apply_distribution(const std::vector<double>& mu,
                                         std::uint64_t mask = ~std::uint64_t{0}) const {
    std::vector<double> out(mu.size(), 0.0);
    for (std::uint64_t c = 0; c < states(); ++c) {
      double acc = 0;
      for (std::size_t k = 0; k < n_; ++k)
        if ((mask >> k) & 1) {
          std::uint64_t d = c ^ (std::uint64_t{1} << k);
          acc += mu[d] * rate(d, k) - mu[c] * rate(c, k);
        }
      out[c] = acc;
    }
    return out;
  }

  // Dirichlet form E(f, f) = 1/2 sum pi(s) c(k, s) (f(s^k) - f(s))^2.
  double dirichlet_form(const std::vector<double>& f) const {
    double e = 0;
    for (std::uint64_t c = 0; c < states(); ++c)
      for (std::size_t k = 0; k < n_; ++k) {
        double d = f[c ^ (std::uint64_t{1} << k)] - f[c];
        e += pi_[c] * rate(c, k) * d * d;
      }
    return 0.5 * e;
  }

  double variance(const std::vector<double>& f) const {
    double m = 0, m2 = 0;
    for (std::uint64_t c = 0; c < states(); ++c) {
      m += pi_[c] * f[c];
      m2 += pi_[c] * f[c] * f[c];
    }
    return m2 - m * m;
  }

  // Symmetrized operator S = D^{1/2} (-L) D^{-1/2}: diagonal = exit rate,
  // off-diagonal = -sqrt(c(k,s) c(k,s^k)).
  void apply_symmetric(const double* g, double* out) const {
    for (std::uint64_t c = 0; c < states(); ++c) {
      double acc = 0;
      for (std::size_t k = 0; k < n_; ++k) {
        std::uint64_t d = c ^ (std::uint64_t{1} << k);
        double a = rate(c, k);
        acc += a * g[c] - std::sqrt(a * rate(d, k)) * g[d];
      }
      out[c] = acc;
    }
  }

  Eigen::MatrixXd dense_symmetric() const {
    const auto m = static_cast<Eigen::Index>(states());
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m, m);
    for (std::uint64_t c = 0; c < states(); ++c)
      for (std::size_t k = 0; k < n_; ++k) {
        std::uint64_t d = c ^ (std::uint64_t{1} << k);
        s(c, c) += rate(c, k);
        s(c, d) -= std::sqrt(rate(c, k) * rate(d, k));
      }
    return s;
  }

 private:
  BoundaryCondition bc_;
  double beta_;
  RateRule rule_;
  std::size_t n_ = 0;
  std::vector<double> rates_;
  std::vector<double> pi_;
};

inline Generator exact_generator(const BoundaryCondition& bc, double beta, RateRule rule) {
  return Generator(bc, beta, rule);
}

struct SpectralOptions {
  std::size_t dense_limit = 512;  // state count up to which a dense solver is used
  std::size_t max_iterations = 600;
  double tolerance = 1e-11;       // residual ||S y - theta y||
  std::uint64_t seed = 12345;
  bool force_lanczos = false;
};

// Smallest nonzero eigenvalue of -L (the chain is irreducible, so 0 is simple).
inline double spectral_gap_exact(const Generator& gen, const SpectralOptions& opt = {}) {
  const std::uint64_t m = gen.states();
  if (m < 2) throw std::invalid_argument("spectral gap needs at least two states");
  if (m <= opt.dense_limit && !opt.force_lanczos) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gen.dense_symmetric(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed");
    return es.eigenvalues()(1);
  }

  // Lanczos with full reorthogonalization on the complement of sqrt(pi),
  // the eigenvector of eigenvalue 0.
  const auto M = static_cast<Eigen::Index>(m);
  Eigen::VectorXd null(M);
  for (Eigen::Index i = 0; i < M; ++i) null(i) = std::sqrt(gen.stationary()[static_cast<std::size_t>(i)]);
  null.normalize();

  const std::size_t kmax = std::min<std::size_t>(opt.max_iterations, m - 1);
  Eigen::MatrixXd V(M, static_cast<Eigen::Index>(kmax + 1));
  std::vector<double> alpha, betas;
  Xoshiro256 rng(opt.seed);
  Eigen::VectorXd v(M);
  for (Eigen::Index i = 0; i < M; ++i) v(i) = uniform01(rng) - 0.5;
  v -= null.dot(v) * null;
  v.normalize();
  V.col(0) = v;
  Eigen::VectorXd w(M);
  auto orthogonalize = [&](Eigen::VectorXd& x, Eigen::Index upto) {
    for (int pass = 0; pass < 2; ++pass) {
      x -= null.dot(x) * null;
      for (Eigen::Index j = 0; j <= upto; ++j) x -= V.col(j).dot(x) * V.col(j);
    }
  };
  for (std::size_t k = 0; k < kmax; ++k) {
    const auto K = static_cast<Eigen::Index>(k);
    gen.apply_symmetric(V.col(K).data(), w.data());
    double a = V.col(K).dot(w);
    alpha.push_back(a);
    orthogonalize(w, K);
    double b = w.norm();
    bool exhausted = b < 1e-14;
    bool check = exhausted || (k + 1) % 10 == 0 || k + 1 == kmax;
    if (check) {
      const auto d = static_cast<Eigen::Index>(alpha.size());
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(d, d);
      for (Eigen::Index i = 0; i < d; ++i) {
        T(i, i) = alpha[static_cast<std::size_t>(i)];
        if (i + 1 < d) T(i, i + 1) = T(i + 1, i) = betas[static_cast<std::size_t>(i)];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      double theta = es.eigenvalues()(0);
      double ritz_residual = std::abs(b * es.eigenvectors()(d - 1, 0));
      if (ritz_residual <= opt.tolerance || exhausted) {
        // explicit residual of the Ritz vector
        Eigen::VectorXd y = V.leftCols(d) * es.eigenvectors().col(0);
        Eigen::VectorXd sy(M);
        gen.apply_symmetric(y.data(), sy.data());
        double res = (sy - theta * y).norm() / y.norm();
        if (res <= std::max(opt.tolerance, 1e-9 * std::abs(theta)) * 10) return theta;
      }
    }
    if (exhausted) break;
    betas.push_back(b);
    V.col(K + 1) = w / b;
  }
  throw ConvergenceError("Lanczos did not converge for the spectral gap");
}

struct TvOptions {
  double tolerance = 1e-10;  // certified bound on the truncated Poisson tail
  std::uint64_t max_terms = 5'000'000;
  std::uint64_t site_mask = ~std::uint64_t{0};
};

namespace detail {

// Sum_k Pois(k; q t) x P^k with P = I + L/q, where `step` maps x to x L.
template <class Step>
std::vector<double> uniformized(const std::vector<double>& x0, double q, double t, const TvOptions& opt,
                                Step step) {
  const double lambda = q * t;
  if (lambda == 0) return x0;
  // smallest K with P(Poisson(lambda) > K) <= tolerance
  std::uint64_t K = static_cast<std::uint64_t>(lambda);
  while (boost::math::gamma_p(static_cast<double>(K + 1), lambda) > opt.tolerance) {
    K += 1 + static_cast<std::uint64_t>(std::sqrt(lambda + 1.0));
    if (K > opt.max_terms) throw BudgetExhausted("uniformized series needs more than max_terms terms");
  }
  std::vector<double> acc(x0.size(), 0.0), x = x0;
  for (std::uint64_t k = 0; k <= K; ++k) {
    double w = std::exp(-lambda + static_cast<double>(k) * std::log(lambda) - std::lgamma(k + 1.0));
    for (std::size_t i = 0; i < x.size(); ++i) acc[i] += w * x[i];
    if (k == K) break;
    auto lx = step(x);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += lx[i] / q;
  }
  return acc;
}

}  // namespace detail

inline std::vector<double> evolve_distribution(const Generator& gen, const std::vector<double>& mu0, double t,
                                               const TvOptions& opt = {}) {
  if (!(t >= 0)) throw std::invalid_argument("time must be nonnegative");
  double q = gen.max_exit_rate(opt.site_mask);
  if (q == 0) return mu0;
  return detail::uniformized(mu0, q, t, opt,
                             [&](const std::vector<double>& x) { return gen.apply_distribution(x, opt.site_mask); });
}

// (e^{tL} f)(s) = E_s f(sigma_t)
inline std::vector<double> evolve_function(const Generator& gen, const std::vector<double>& f, double t,
                                           const TvOptions& opt = {}) {
  if (!(t >= 0)) throw std::invalid_argument("time must be nonnegative");
  double q = gen.max_exit_rate(opt.site_mask);
  if (q == 0) return f;
  return detail::uniformized(f, q, t, opt,
                             [&](const std::vector<double>& x) { return gen.apply_function(x, opt.site_mask); });
}

inline double tv_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

inline std::vector<double> point_mass(const Generator& gen, std::uint64_t code) {
  std::vector<double> mu(gen.states(), 0.0);
  mu[code] = 1.0;
  return mu;
}

// || mu0 e^{tL} - pi ||_TV
inline double tv_exact(const Generator& gen, const std::vector<double>& mu0, double t, const TvOptions& opt = {}) {
  return tv_distance(evolve_distribution(gen, mu0, t, opt), gen.stationary());
}

// Smallest t (to relative precision `rel`) with max over the given starts
// of the TV distance <= eps.
inline double tv_mixing_time(const Generator& gen, double eps, const std::vector<std::uint64_t>& starts,
                             double rel = 1e-6) {
  auto worst = [&](double t) {
    double d = 0;
    for (auto s : starts) d = std::max(d, tv_exact(gen, point_mass(gen, s), t));
    return d;
  };
  if (worst(0) <= eps) return 0;
  double hi = 1;
  while (worst(hi) > eps) hi *= 2;
  double lo = hi / 2 < 1 ? 0 : hi / 2;
  while (hi - lo > rel * hi) {
    double mid = 0.5 * (lo + hi);
    (worst(mid) > eps ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace isinglab
