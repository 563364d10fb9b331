#include <cmath>
#include <set>
#include <gtest/gtest.h>

#include "isinglab/core/duality.hpp"
#include "isinglab/core/gibbs.hpp"
#include "isinglab/core/hamiltonian.hpp"
#include "isinglab/dynamics/rng.hpp"

using namespace isinglab;

TEST(Region, BoxSitesAndBoundary) {
  auto r = LatticeRegion::box(3, 2);
  EXPECT_EQ(r->size(), 6u);
  EXPECT_EQ(r->boundary().size(), 10u);  // 2 (3 + 2)
  EXPECT_TRUE(r->contains({1, 1}));
  EXPECT_FALSE(r->contains({0, 1}));
  EXPECT_TRUE(r->boundary_index_of({0, 1}).has_value());
  EXPECT_FALSE(r->boundary_index_of({0, 0}).has_value());  // corners are not 4-neighbour boundary
}

TEST(Region, EveryPrimalEdgeHasOneDualEdge) {
  for (auto r : {LatticeRegion::box(3, 3), LatticeRegion::truncated_strip(4, 2), LatticeRegion::slit_strip(1, 3, 5, 3)}) {
    std::set<DualEdge> expected;
    for (Site s : r->sites())
      for (auto d : kDirections) {
        Site t = step(s, d);
        if (r->contains(t) || r->boundary_index_of(t)) expected.insert(dual_of(s, t));
      }
    std::set<DualEdge> got(r->dual_edges().begin(), r->dual_edges().end());
    EXPECT_EQ(got.size(), r->dual_edges().size()) << r->describe();
    EXPECT_EQ(got, expected) << r->describe();
  }
}

TEST(Region, SlitStripExcludesSlits) {
  auto full = LatticeRegion::truncated_strip(6, 3);
  auto slit = LatticeRegion::slit_strip(1, 4, 6, 3);
  EXPECT_EQ(slit->size(), full->size() - 8);  // rows 0, 1 at columns 1, 4, 5, 6
  EXPECT_FALSE(slit->contains({1, 0}));
  EXPECT_TRUE(slit->contains({2, 1}));
  EXPECT_TRUE(slit->boundary_index_of({4, 1}).has_value());
  EXPECT_THROW(LatticeRegion::slit_strip(2, 3, 6, 3), std::invalid_argument);

}

TEST(Boundary, HalfPlaneEta) {
  auto r = LatticeRegion::truncated_strip(4, 3);
  auto bc = BoundaryCondition::half_plane_eta(r);
  for (std::size_t k = 0; k < r->boundary().size(); ++k) {
    Site b = r->boundary()[k];
    EXPECT_EQ(bc.at(k), b.y > 0 ? -1 : 1) << b.x << "," << b.y;
  }
}

TEST(Boundary, SideSpecAndDelta) {
  auto r = LatticeRegion::box(5, 2);
  auto bc = BoundaryCondition::delta_interval(r, SideSpec::parse("(-,+,+,+)"), Side::south, 2, 4, -1);
  EXPECT_EQ(bc.at(Site{3, 0}), -1);
  EXPECT_EQ(bc.at(Site{1, 0}), 1);
  EXPECT_EQ(bc.at(Site{3, 3}), -1);
  EXPECT_EQ(bc.at(Site{0, 1}), 1);
  EXPECT_THROW(SideSpec::parse("(+,+)"), std::invalid_argument);
}

TEST(Boundary, BernoulliIsSeeded) {
  auto r = LatticeRegion::box(6, 6);
  auto a = BoundaryCondition::bernoulli(r, 0.3, 11), b = BoundaryCondition::bernoulli(r, 0.3, 11);
  EXPECT_EQ(a.values(), b.values());
  auto one = BoundaryCondition::bernoulli(r, 1.0, 3);
  for (Spin s : one.values()) EXPECT_EQ(s, 1);
}

TEST(Energy, SingleSite) {
  auto r = LatticeRegion::box(1, 1);
  auto bc = BoundaryCondition::plus(r);
  EXPECT_EQ(energy(SpinConfiguration::uniform(r, 1), bc), -4.0);
  EXPECT_EQ(energy(SpinConfiguration::uniform(r, -1), bc), 4.0);
}

TEST(Energy, TwoByTwoMixedBoundary) {
  // interior bonds -4; top row sits under a minus North and minus sides (+2
  // each), bottom row has one plus and one minus neighbour (0 each)
  auto r = LatticeRegion::box(2, 2);
  auto bc = BoundaryCondition::sides(r, SideSpec::parse("(-,-,+,-)"));
  EXPECT_EQ(energy(SpinConfiguration::uniform(r, 1), bc), 0.0);
}

TEST(Energy, RegionMismatchThrows) {
  auto a = LatticeRegion::box(2, 2), b = LatticeRegion::box(3, 2);
  EXPECT_THROW(energy(SpinConfiguration::uniform(a, 1), BoundaryCondition::plus(b)), RegionMismatch);
}

TEST(FlipCost, Examples) {
  auto r = LatticeRegion::box(3, 3);
  auto bc = BoundaryCondition::plus(r);
  auto s = SpinConfiguration::uniform(r, 1);
  EXPECT_EQ(flip_cost(s, Site{2, 2}, bc), 8.0);
  s[*r->index_of({1, 2})] = -1;
  s[*r->index_of({2, 1})] = -1;
  EXPECT_EQ(flip_cost(s, Site{2, 2}, bc), 0.0);
  EXPECT_THROW(flip_cost(s, Site{5, 5}, bc), std::out_of_range);
}

TEST(FlipCost, MatchesEnergyDifference) {
  Xoshiro256 rng(5);
  for (auto bcname : {"plus", "free", "sides"}) {
    auto r = LatticeRegion::box(3, 3);
    auto bc = std::string(bcname) == "plus"   ? BoundaryCondition::plus(r)
              : std::string(bcname) == "free" ? BoundaryCondition::free(r)
                                              : BoundaryCondition::sides(r, SideSpec::parse("(-,+,-,+)"));
    for (int t = 0; t < 50; ++t) {
      auto s = SpinConfiguration::from_code(r, rng() & 511);
      for (std::size_t k = 0; k < r->size(); ++k)
        EXPECT_EQ(flip_cost(s, k, bc), energy(s.flipped(k), bc) - energy(s, bc));
    }
  }
}

TEST(Gibbs, FreeSingleSiteIsUniform) {
  auto g = gibbs_exact(BoundaryCondition::free(LatticeRegion::box(1, 1)), 0.9);
  EXPECT_NEAR(g[0], 0.5, 1e-15);
  EXPECT_NEAR(g[1], 0.5, 1e-15);
}

TEST(Gibbs, PlusSingleSiteMatchesThreshold) {
  for (double beta : {0.1, 0.44, 0.7, 1.3}) {
    auto g = gibbs_exact(BoundaryCondition::plus(LatticeRegion::box(1, 1)), beta);
    EXPECT_NEAR(g[1], std::exp(4 * beta) / (std::exp(4 * beta) + std::exp(-4 * beta)), 1e-14);
    EXPECT_NEAR(g[1], bernoulli_threshold(beta), 1e-14);
  }
}

TEST(Gibbs, MatchesLiteralBoltzmannSum) {
  auto r = LatticeRegion::box(2, 1);
  auto bc = BoundaryCondition::minus(r);
  const double beta = 0.65;
  auto g = gibbs_exact(bc, beta);
  // literal bond sum: sites a, b with 3 minus neighbours each
  double w[4], z = 0;
  for (int c = 0; c < 4; ++c) {
    int a = c & 1 ? 1 : -1, b = c & 2 ? 1 : -1;
    double h = -(a * b) - 3 * a * (-1) - 3 * b * (-1);
    w[c] = std::exp(-beta * h);
    z += w[c];
  }
  for (int c = 0; c < 4; ++c) EXPECT_NEAR(g[c], w[c] / z, 1e-14);
}

TEST(Gibbs, NormalizesAndCaps) {
  for (auto [w, h] : {std::pair{1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 4}}) {
    auto g = gibbs_exact(BoundaryCondition::sides(LatticeRegion::box(w, h), SideSpec::parse("(-,-,+,-)")), 0.8);
    EXPECT_NEAR(accurate_sum(g.probabilities()), 1.0, 1e-12) << w << "x" << h;
  }
  EXPECT_THROW(gibbs_exact(BoundaryCondition::plus(LatticeRegion::box(7, 3)), 0.5), SizeCapExceeded);
}

TEST(Gibbs, MonotoneMarginalsUnderOrderedBoundaries) {
  auto r = LatticeRegion::box(3, 3);
  std::vector<BoundaryCondition> bcs{BoundaryCondition::minus(r), BoundaryCondition::sides(r, SideSpec::parse("(-,-,+,-)")),
                                     BoundaryCondition::sides(r, SideSpec::parse("(-,+,+,+)")),
                                     BoundaryCondition::plus(r)};
  for (double beta : {0.3, 0.6}) {
    std::vector<GibbsTable> t;
    for (auto& bc : bcs) t.push_back(gibbs_exact(bc, beta));
    for (std::size_t a = 0; a + 1 < t.size(); ++a)
      for (std::size_t k = 0; k < r->size(); ++k) EXPECT_GE(t[a + 1].mean_spin(k), t[a].mean_spin(k) - 1e-14);
  }
}

TEST(Duality, Examples) {
  EXPECT_NEAR(beta_critical, 0.4406867935097715, 1e-15);
  EXPECT_NEAR(dual_beta(beta_critical), beta_critical, 1e-12);
  EXPECT_NEAR(dual_beta(1.0), 0.13617, 5e-6);
  EXPECT_NEAR(dual_beta(1.0), 0.5 * std::log((1 + std::exp(-2.0)) / (1 - std::exp(-2.0))), 1e-14);
  for (double b : {0.1, 0.44, 0.5, 0.9, 2.0}) {
    EXPECT_NEAR(std::tanh(dual_beta(b)), std::exp(-2 * b), 1e-12);
    EXPECT_NEAR(dual_beta(dual_beta(b)), b, 1e-10);
    EXPECT_EQ(b > beta_critical, dual_beta(b) < beta_critical);
  }
  EXPECT_GT(dual_beta(0.5), dual_beta(0.6));
  EXPECT_THROW(dual_beta(0.0), std::invalid_argument);
}

TEST(Duality, SurfaceTension) {
  EXPECT_NEAR(surface_tension_axis(0.6), 0.5783, 5e-5);
  EXPECT_LT(surface_tension_axis(beta_critical + 1e-9), 1e-6);
  EXPECT_GT(surface_tension_axis(beta_critical + 1e-9), 0.0);
  EXPECT_LT(surface_tension_axis(0.6), surface_tension_axis(0.7));
  EXPECT_THROW(surface_tension_axis(0.4), std::invalid_argument);
  auto p = ModelParams::at(0.7);
  ASSERT_TRUE(p.tau0);
  EXPECT_GT(*p.tau0, 0);
  EXPECT_FALSE(ModelParams::at(0.3).tau0);
}

TEST(Order, StochasticallyLeq) {
  auto r = LatticeRegion::box(2, 2);
  auto minus = SpinConfiguration::uniform(r, -1);
  auto s = SpinConfiguration::from_code(r, 0b0110);
  EXPECT_TRUE(stochastically_leq(minus, s));
  EXPECT_TRUE(stochastically_leq(s, s));
  auto a = SpinConfiguration::from_code(r, 0b0001), b = SpinConfiguration::from_code(r, 0b0010);
  EXPECT_FALSE(stochastically_leq(a, b));
  EXPECT_FALSE(stochastically_leq(b, a));
}
