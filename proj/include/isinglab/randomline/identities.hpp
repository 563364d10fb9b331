#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "isinglab/core/duality.hpp"
#include "isinglab/core/format.hpp"
#include "isinglab/core/gibbs.hpp"
#include "isinglab/randomline/weights.hpp"

namespace isinglab {

// One machine-checked identity or inequality. For inequalities lhs <= rhs
// is expected and `gap` is lhs - rhs (nonpositive when it holds).
struct IdentityCheck {
  std::string name;
  std::string instance;
  double lhs = 0;
  double rhs = 0;
  double gap = 0;
  bool inequality = false;
  bool observational = false;
  double tolerance = 1e-10;

  bool passed() const {
    if (observational) return true;
    return inequality ? gap <= tolerance : std::abs(gap) <= tolerance;
  }
};

inline nlohmann::json to_json(const IdentityCheck& c) {
  return {{"check", c.name},   {"instance", c.instance}, {"lhs", c.lhs},
          {"rhs", c.rhs},      {"gap", c.gap},           {"kind", c.inequality ? "inequality" : "identity"},
          {"observational", c.observational},             {"passed", c.passed()}};
}

inline std::string jsonl(const std::vector<IdentityCheck>& cs) {
  std::string s;
  for (const auto& c : cs) s += to_json(c).dump() + "\n";
  return s;
}

inline std::string describe_points(const std::vector<DualVertex>& A) {
  std::string s = "{";
  for (std::size_t k = 0; k < A.size(); ++k)
    s += (k ? "," : "") + std::string("(") + std::to_string(A[k].i) + "," + std::to_string(A[k].j) + ")";
  return s + "}";
}

inline IdentityCheck equality(std::string name, std::string inst, double lhs, double rhs) {
  return {std::move(name), std::move(inst), lhs, rhs, lhs - rhs};
}
inline IdentityCheck bound(std::string name, std::string inst, double lhs, double rhs, bool observational = false) {
  IdentityCheck c{std::move(name), std::move(inst), lhs, rhs, lhs - rhs};
  c.inequality = true;
  c.observational = observational;
  return c;
}

// Sum of q over open families with boundary A against the dual spin correlation.
inline IdentityCheck correlation_identity_check(const DualGraph& g, const std::vector<DualVertex>& A, double beta,
                                                const DualIsing* dual = nullptr) {
  std::optional<DualIsing> own;
  if (!dual) dual = &own.emplace(g, dual_beta(beta));
  double lhs = random_line_sum(g, A, beta);
  double rhs = A.size() % 2 ? 0.0 : dual->correlation(A);
  return equality("random-line-correlation", g.describe() + " A=" + describe_points(A) + " beta=" + format_double(beta),
                  lhs, rhs);
}

// ---------------------------------------------------------------------------
// Contour law: Gibbs probability of the open part of the contour
// decomposition against q / <prod sigma over V(tau)>.

struct ContourLawReport {
  double max_gap = 0;          // against q / pi*(prod sigma)
  double max_gap_sum = 0;      // against q / sum q
  double gibbs_total = 0;
  double formula_total = 0;
  std::size_t families = 0;
  std::size_t unmatched = 0;   // families seen on only one side
};

inline ContourLawReport contour_law_check(const BoundaryCondition& bc, double beta, SplitRule rule = SplitRule::se) {
  const auto& region = bc.region();
  if (region->size() > 12) throw SizeCapExceeded("contour law check limited to 12 sites");
  if (bc.has_free_sites()) throw std::invalid_argument("contour law needs a fixed boundary condition");
  auto table = gibbs_exact(bc, beta);
  std::map<ContourFamily, double> gibbs;
  for (std::uint64_t c = 0; c < table.states(); ++c) {
    auto s = SpinConfiguration::from_code(region, c);
    gibbs[decompose(disagreement_duals(s, bc), rule).open_part()] += table[c];
  }
  auto g = DualGraph::of_region(*region, rule);
  auto V = endpoint_set(bc);
  double z = partition_Z(g, beta);
  std::map<ContourFamily, double> q;
  double qsum = 0;
  for (const auto& f : open_families(g, V)) {
    double w = partition_Z(g, g.all() & ~g.delta(f.mask), beta) / z *
               std::exp(-2 * beta * static_cast<double>(std::popcount(f.mask)));
    q[f.family] = w;
    qsum += w;
  }
  double corr = DualIsing(g, dual_beta(beta)).correlation(V);
  ContourLawReport rep;
  std::map<ContourFamily, int> keys;
  for (auto& [k, v] : gibbs) keys[k] |= 1;
  for (auto& [k, v] : q) keys[k] |= 2;
  for (auto& [k, side] : keys) {
    double p = gibbs.count(k) ? gibbs[k] : 0.0;
    double w = q.count(k) ? q[k] : 0.0;
    rep.max_gap = std::max(rep.max_gap, std::abs(w / corr - p));
    rep.max_gap_sum = std::max(rep.max_gap_sum, std::abs(w / qsum - p));
    rep.gibbs_total += p;
    rep.formula_total += w / corr;
    rep.unmatched += side != 3;
  }
  rep.families = keys.size();
  return rep;
}

// ---------------------------------------------------------------------------
// Single open contours between two points, with their weights.

struct WeightedContour {
  Contour contour;
  EdgeMask mask;
  double q;
};

inline std::vector<WeightedContour> single_contours(const DualGraph& g, DualVertex x, DualVertex y, double beta) {
  std::vector<WeightedContour> out;
  if (x == y) return out;
  double z = partition_Z(g, beta);
  for (auto& f : open_families(g, {x, y}))
    if (f.family.contours.size() == 1) {
      double w = partition_Z(g, g.all() & ~g.delta(f.mask), beta) / z *
                 std::exp(-2 * beta * static_cast<double>(std::popcount(f.mask)));
      out.push_back({f.family.contours.front(), f.mask, w});
    }
  return out;
}

// q_G(theta u lambda) = q_{G minus Delta(lambda)}(theta) q_G(lambda) whenever the
// union is compatible.
inline IdentityCheck factorization_check(const DualGraph& g, const ContourFamily& theta, const ContourFamily& lambda,
                                         double beta) {
  std::vector<Contour> both = theta.contours;
  both.insert(both.end(), lambda.contours.begin(), lambda.contours.end());
  auto uni = make_family(both);
  EdgeMask lm = *g.mask_of(lambda.edges());
  EdgeMask keep = g.all() & ~g.delta(lm);
  DualGraph sub(g.vertices(), g.edges_of(keep), g.rule());
  double lhs = q_weight(g, uni, beta);
  double rhs = q_weight(sub, theta, beta) * q_weight(g, lambda, beta);
  return equality("edge-boundary-factorization",
                  g.describe() + " |theta|=" + std::to_string(theta.length()) +
                      " |lambda|=" + std::to_string(lambda.length()) + " beta=" + format_double(beta),
                  lhs, rhs);
}

// q_{G'}(theta) >= q_G(theta) for G' a subgraph of G.
inline IdentityCheck subgraph_monotonicity_check(const DualGraph& g, const DualGraph& sub,
                                                 const ContourFamily& theta, double beta) {
  return bound("subgraph-monotonicity", g.describe() + " > " + sub.describe() + " beta=" + format_double(beta),
               q_weight(g, theta, beta), q_weight(sub, theta, beta));
}

// Sum over disjoint pairs lambda1 (x..y), lambda2 (u..v) of q(lambda1 |_| lambda2)
// against the product of the single-contour sums.
inline IdentityCheck disjoint_pair_check(const DualGraph& g, DualVertex x, DualVertex y, DualVertex u, DualVertex v,
                                         double beta) {
  auto a = single_contours(g, x, y, beta);
  auto b = single_contours(g, u, v, beta);
  double z = partition_Z(g, beta);
  double lhs = 0, sa = 0, sb = 0;
  for (auto& c : a) sa += c.q;
  for (auto& c : b) sb += c.q;
  for (auto& c1 : a)
    for (auto& c2 : b) {
      if (c1.mask & c2.mask) continue;
      auto f = decompose(g.edges_of(c1.mask | c2.mask), g.rule());
      bool pair = f == make_family({c1.contour, c2.contour});
      bool joined = f.contours.size() == 1;
      if (!pair && !joined) continue;
      EdgeMask m = c1.mask | c2.mask;
      lhs += partition_Z(g, g.all() & ~g.delta(m), beta) / z * std::exp(-2 * beta * std::popcount(m));
    }
  return bound("disjoint-pair-bound",
               g.describe() + " xy=" + describe_points({x, y}) + " uv=" + describe_points({u, v}) +
                   " beta=" + format_double(beta),
               lhs, sa * sb);
}

// Contours from u to v through z against <s_u s_z><s_v s_z>.
inline IdentityCheck three_point_check(const DualGraph& g, const DualIsing& dual, DualVertex u, DualVertex v,
                                       DualVertex z, double beta) {
  double lhs = 0;
  for (auto& c : single_contours(g, u, v, beta))
    if (std::find(c.contour.walk.begin(), c.contour.walk.end(), z) != c.contour.walk.end()) lhs += c.q;
  double rhs = dual.correlation({u, z}) * dual.correlation({v, z});
  return bound("three-point-bound",
               g.describe() + " uvz=" + describe_points({u, v, z}) + " beta=" + format_double(beta), lhs, rhs);
}

// Closed contours through x_1..x_k against exp(-sum rate * |x_i - x_{i-1}|),
// with `rate` a measured decay rate standing in for the angular surface
// tension. Observational only.
inline IdentityCheck long_loop_check(const DualGraph& g, const std::vector<DualVertex>& pts, double beta, double rate) {
  double z = partition_Z(g, beta), lhs = 0;
  for_each_coset(0, g.cycle_basis(g.all()), [&](EdgeMask B) {
    if (!B) return;
    auto f = decompose(g.edges_of(B), g.rule());
    if (f.contours.size() != 1) return;
    const auto& w = f.contours.front().walk;
    for (auto p : pts)
      if (std::find(w.begin(), w.end(), p) == w.end()) return;
    lhs += partition_Z(g, g.all() & ~g.delta(B), beta) / z * std::exp(-2 * beta * std::popcount(B));
  });
  double len = 0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    auto a = pts[k], b = pts[(k + 1) % pts.size()];
    len += std::hypot(a.i - b.i, a.j - b.j);
  }
  return bound("long-loop-bound", g.describe() + " pts=" + describe_points(pts) + " beta=" + format_double(beta),
               lhs, std::exp(-rate * len), true);
}

// ---------------------------------------------------------------------------
// Randomized battery over one graph.

namespace detail {

// A compatible family drawn from the decomposition of a random edge subset
// of `allowed`, keeping each contour with probability 1/2.
inline std::optional<ContourFamily> random_family(const DualGraph& g, EdgeMask allowed, Xoshiro256& rng) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    EdgeMask B = rng() & allowed;
    auto f = decompose(g.edges_of(B), g.rule());
    std::vector<Contour> keep;
    for (auto& c : f.contours)
      if (rng() & 1) keep.push_back(c);
    auto fam = make_family(keep);
    if (!fam.empty() && is_compatible(g, fam)) return fam;
  }
  return std::nullopt;
}

}  // namespace detail

inline std::vector<IdentityCheck> inequality_suite(const DualGraph& g, double beta, int trials, std::uint64_t seed,
                                                   std::optional<double> decay_rate = std::nullopt) {
  std::vector<IdentityCheck> out;
  Xoshiro256 rng(seed);
  DualIsing dual(g, dual_beta(beta));
  const auto& V = g.vertices();
  auto pick = [&] { return V[static_cast<std::size_t>(uniform_below(rng, V.size()))]; };
  for (int t = 0; t < trials; ++t) {
    // factorization over the edge boundary
    if (auto lambda = detail::random_family(g, g.all(), rng)) {
      EdgeMask lm = *g.mask_of(lambda->edges());
      if (auto theta = detail::random_family(g, g.all() & ~g.delta(lm), rng)) {
        std::vector<Contour> both = theta->contours;
        both.insert(both.end(), lambda->contours.begin(), lambda->contours.end());
        if (is_compatible(g, make_family(both))) out.push_back(factorization_check(g, *theta, *lambda, beta));
      }
    }
    // subgraph monotonicity
    if (auto theta = detail::random_family(g, g.all(), rng)) {
      EdgeMask keep = (rng() & g.all()) | *g.mask_of(theta->edges());
      DualGraph sub(V, g.edges_of(keep), g.rule());
      if (is_compatible(sub, *theta)) out.push_back(subgraph_monotonicity_check(g, sub, *theta, beta));
    }
    // three points
    DualVertex u = pick(), v = pick(), z = pick();
    if (u != v) out.push_back(three_point_check(g, dual, u, v, z, beta));
    // disjoint pairs
    DualVertex x = pick(), y = pick(), a = pick(), b = pick();
    if (x != y && a != b) out.push_back(disjoint_pair_check(g, x, y, a, b, beta));
  }
  if (decay_rate) {
    for (int t = 0; t < std::max(1, trials / 10); ++t) {
      std::vector<DualVertex> pts{pick(), pick()};
      if (pts[0] != pts[1]) out.push_back(long_loop_check(g, pts, beta, *decay_rate));
    }
  }
  return out;
}

}  // namespace isinglab
