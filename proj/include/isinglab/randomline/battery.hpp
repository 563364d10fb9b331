#pragma once

#include <functional>
#include <string>
#include <vector>

#include "isinglab/randomline/identities.hpp"
#include "isinglab/randomline/transfer.hpp"

namespace isinglab {

// A named unit of oracle work producing one or more checks. Items are cheap
// to build and independent, so a pool can run them in any order.
struct BatteryItem {
  std::string name;
  std::function<std::vector<IdentityCheck>()> run;
};

// Fixed dual graphs, all within 18 vertices.
inline std::vector<DualGraph> fixture_dual_graphs(SplitRule rule) {
  std::vector<DualGraph> g;
  for (auto [w, h] : {std::pair{2, 2}, {3, 2}, {3, 3}, {4, 3}, {4, 4}, {3, 6}}) g.push_back(DualGraph::grid(w, h, rule));
  // dual graphs of small boxes (their vertex sets include the outer ring)
  g.push_back(DualGraph::of_region(*LatticeRegion::box(2, 2), rule));
  g.push_back(DualGraph::of_region(*LatticeRegion::box(3, 2), rule));
  // an L shape and a ring with a hole
  {
    auto full = DualGraph::grid(4, 4, rule);
    std::vector<DualVertex> v;
    for (auto p : full.vertices())
      if (p.i < 2 || p.j < 2) v.push_back(p);
    std::vector<DualEdge> e;
    for (const auto& x : full.edges())
      if ((x.a.i < 2 || x.a.j < 2) && (x.b.i < 2 || x.b.j < 2)) e.push_back(x);
    g.emplace_back(v, e, rule);
  }
  {
    auto full = DualGraph::grid(4, 4, rule);
    auto hole = [](DualVertex p) { return p.i >= 1 && p.i <= 2 && p.j >= 1 && p.j <= 2; };
    std::vector<DualVertex> v;
    for (auto p : full.vertices())
      if (!hole(p)) v.push_back(p);
    std::vector<DualEdge> e;
    for (const auto& x : full.edges())
      if (!hole(x.a) && !hole(x.b)) e.push_back(x);
    g.emplace_back(v, e, rule);
  }
  return g;
}

// Random subgraphs of grids up to 4 x 4, keeping edges with probability in [0.55, 0.95].
inline DualGraph random_dual_graph(std::uint64_t seed, SplitRule rule) {
  Xoshiro256 rng(seed);
  int w = 2 + static_cast<int>(uniform_below(rng, 3));
  int h = 2 + static_cast<int>(uniform_below(rng, 3));
  double p = 0.55 + 0.4 * uniform01(rng);
  return DualGraph::random_grid_subgraph(w, h, p, rng(), rule);
}

namespace detail {

// Point sets for the correlation identity: every pair on graphs up to 12
// vertices, a seeded sample of pairs otherwise, plus a four-point and an
// odd three-point set.
inline std::vector<std::vector<DualVertex>> correlation_point_sets(const DualGraph& g, std::uint64_t seed) {
  const auto& V = g.vertices();
  std::vector<std::vector<DualVertex>> sets;
  if (V.size() < 4) return sets;
  if (V.size() <= 12) {
    for (std::size_t a = 0; a < V.size(); ++a)
      for (std::size_t b = a + 1; b < V.size(); ++b) sets.push_back({V[a], V[b]});
  } else {
    Xoshiro256 rng(seed);
    for (int k = 0; k < 16; ++k) {
      auto a = uniform_below(rng, V.size()), b = uniform_below(rng, V.size());
      if (a != b) sets.push_back({V[a], V[b]});
    }
  }
  sets.push_back({V[0], V[1], V[V.size() / 2], V.back()});
  sets.push_back({V[0], V[V.size() / 2], V.back()});
  return sets;
}

}  // namespace detail

inline BatteryItem correlation_item(DualGraph g, double beta, std::uint64_t seed) {
  return {"random-line-correlation", [g = std::move(g), beta, seed] {
            DualIsing dual(g, dual_beta(beta));
            std::vector<IdentityCheck> out;
            for (const auto& A : detail::correlation_point_sets(g, seed))
              out.push_back(correlation_identity_check(g, A, beta, &dual));
            return out;
          }};
}

// The correlation identity on every fixture graph under both rules and on
// `random_graphs` seeded random graphs, for each beta.
inline std::vector<BatteryItem> correlation_battery(const std::vector<double>& betas, int random_graphs,
                                                    std::uint64_t seed) {
  std::vector<BatteryItem> items;
  for (double beta : betas) {
    for (auto rule : {SplitRule::se, SplitRule::sw})
      for (auto& g : fixture_dual_graphs(rule)) items.push_back(correlation_item(g, beta, mix64(seed + items.size())));
    for (int k = 0; k < random_graphs; ++k) {
      auto rule = k % 2 ? SplitRule::sw : SplitRule::se;
      items.push_back(correlation_item(random_dual_graph(replica_seed(seed, static_cast<std::uint64_t>(k)), rule), beta,
                                       mix64(seed + items.size())));
    }
  }
  return items;
}

inline const std::vector<std::string>& contour_law_bcs() {
  static const std::vector<std::string> bcs{"(+,+,+,+)", "(-,-,+,-)", "(-,+,-,+)", "(+,-,-,+)"};
  return bcs;
}

// Contour law on every W x H box with W <= 4, H <= 3, under the four side
// conditions above and both splitting rules. One check per (box, bc, rule):
// lhs is the largest deviation between formula and Gibbs probability
// (infinite when some family appears on one side only).
inline std::vector<BatteryItem> contour_law_battery(const std::vector<double>& betas) {
  std::vector<BatteryItem> items;
  for (double beta : betas)
    for (int w = 1; w <= 4; ++w)
      for (int h = 1; h <= 3; ++h)
        for (const auto& spec : contour_law_bcs())
          items.push_back({"contour-law", [=] {
                             std::vector<IdentityCheck> out;
                             auto bc = BoundaryCondition::sides(LatticeRegion::box(w, h), SideSpec::parse(spec));
                             for (auto rule : {SplitRule::se, SplitRule::sw}) {
                               auto rep = contour_law_check(bc, beta, rule);
                               double dev = rep.unmatched ? std::numeric_limits<double>::infinity() : rep.max_gap;
                               out.push_back(equality("contour-law",
                                                      "box " + std::to_string(w) + "x" + std::to_string(h) + " bc=" +
                                                          spec + " rule=" + to_string(rule) +
                                                          " beta=" + format_double(beta) +
                                                          " families=" + std::to_string(rep.families),
                                                      dev, 0.0));
                             }
                             return out;
                           }});
  return items;
}

// Factorization, monotonicity and the two bounds on fixture graphs with at
// most 12 vertices; the long-loop bound uses the measured width-8 decay rate
// and is observational.
inline std::vector<BatteryItem> inequality_battery(const std::vector<double>& betas, int trials, std::uint64_t seed) {
  std::vector<BatteryItem> items;
  for (double beta : betas) {
    const double rate = dual_strip_decay_rate(8, beta);
    for (auto rule : {SplitRule::se, SplitRule::sw})
      for (auto& g : fixture_dual_graphs(rule)) {
        if (g.vertices().size() > 12) continue;
        std::uint64_t s = mix64(seed ^ (items.size() + 1));
        items.push_back({"inequality-suite", [g, beta, trials, s, rate] {
                           return inequality_suite(g, beta, trials, s, rate);
                         }});
      }
  }
  return items;
}

inline std::vector<BatteryItem> full_battery(const std::vector<double>& betas, int trials, std::uint64_t seed) {
  auto items = correlation_battery(betas, trials, seed);
  for (auto& it : contour_law_battery(betas)) items.push_back(std::move(it));
  for (auto& it : inequality_battery(betas, trials, mix64(seed + 1))) items.push_back(std::move(it));
  return items;
}

}  // namespace isinglab
