#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "wpcn/heuristics.hpp"
#include "wpcn/specialfn.hpp"

using namespace wpcn;

namespace {

Instance gam(std::vector<double> g, std::vector<double> d = {}) {
  return Instance::from_gammas(g, d);
}

}  // namespace

TEST(StmEqual, Examples) {
  const HeuristicResult a = heuristics::stm_equal(gam({1}));
  EXPECT_NEAR(a.objective, 0.5 * std::log(2.0), 1e-15);
  const HeuristicResult b = heuristics::stm_equal(gam({1, 4}));
  for (double v : b.allocation.values()) EXPECT_NEAR(v, 1.0 / 3, 1e-15);
}

TEST(FixedTdma, SingleUserIsOptimal) {
  const HeuristicResult r = heuristics::stm_fixed_tdma(gam({1}));
  EXPECT_NEAR(r.allocation[0], 1 - kInvE, 1e-10);
  EXPECT_NEAR(r.objective, kInvE, 1e-12);
  for (double g : {0.1, 3.0, 50.0}) {
    EXPECT_NEAR(heuristics::stm_fixed_tdma(gam({g})).objective,
                stm::solve_stm(std::vector<double>{g}).total_throughput, 1e-9);
  }
}

TEST(FixedTdma, Sandwich) {
  const Instance inst = gam({1, 1});
  const double opt = stm::solve_stm(inst).total_throughput;
  const double fixed = heuristics::stm_fixed_tdma(inst).objective;
  EXPECT_LE(fixed, opt + 1e-12);
  EXPECT_GE(fixed, heuristics::stm_equal(inst).objective - 1e-12);
}

TEST(FixedTdma, InteriorChargingTime) {
  const HeuristicResult r = heuristics::stm_fixed_tdma(gam(std::vector<double>(20, 2.0)));
  EXPECT_GT(r.allocation[0], 0.0);
  EXPECT_LT(r.allocation[0], 1.0);
}

TEST(FixedTdma, ObjectiveMatchesEvaluate) {
  const std::vector<double> g = {0.5, 4.0, 9.0};
  for (double t0 : {0.1, 0.4, 0.8}) {
    std::vector<double> tau(4, (1 - t0) / 3);
    tau[0] = t0;
    EXPECT_NEAR(heuristics::fixed_tdma_objective(g, t0), total_throughput(g, tau), 1e-14);
    const double h = 1e-6;
    const double fd = (heuristics::fixed_tdma_objective(g, t0 + h) -
                       heuristics::fixed_tdma_objective(g, t0 - h)) / (2 * h);
    EXPECT_NEAR(heuristics::fixed_tdma_slope(g, t0), fd, 1e-6);
  }
}

TEST(TtmEqual, Examples) {
  const HeuristicResult a = heuristics::ttm_equal(gam({1, 1}, {1, 1}));
  EXPECT_NEAR(a.allocation[0], 1 / std::log(2.0), 1e-14);
  EXPECT_NEAR(a.objective, 4.328085, 1e-6);
  const HeuristicResult b = heuristics::ttm_equal(gam({1}, {1}));
  EXPECT_NEAR(b.objective, 2.885390, 1e-6);
  EXPECT_GE(b.objective, kE);
}

TEST(TtmTangent, Examples) {
  const HeuristicResult a = heuristics::ttm_tangent(gam({1}, {1}));
  EXPECT_NEAR(a.allocation[0], kE - 1, 1e-13);
  EXPECT_NEAR(a.objective, kE, 1e-13);
  const HeuristicResult b = heuristics::ttm_tangent(gam({1, 1}, {1, 1}));
  EXPECT_NEAR(b.allocation[1], 1, 1e-13);
  EXPECT_NEAR(b.allocation[2], 1, 1e-13);
  EXPECT_NEAR(b.allocation[0], kE - 1, 1e-13);
  EXPECT_NEAR(b.objective, kE + 1, 1e-13);
}

TEST(Heuristics, FeasibleAndDominated) {
  std::mt19937_64 rng(41);
  std::exponential_distribution<double> e(1.0);
  for (int t = 0; t < 300; ++t) {
    const int k = 1 + t % 10;
    std::vector<double> g(k), d(k, 1.0);
    for (double& x : g) x = std::max(e(rng) * 10.0, 1e-3);
    const Instance si = gam(g);
    const double opt = stm::solve_stm(si).total_throughput;
    for (const HeuristicResult& r : {heuristics::stm_equal(si), heuristics::stm_fixed_tdma(si)}) {
      EXPECT_NEAR(r.allocation.total(), 1.0, 1e-12);
      EXPECT_LE(r.objective, opt + 1e-12);
    }
    const Instance ti = gam(g, d);
    const double best = ttm::solve_ttm(ti).total_time;
    for (const HeuristicResult& r : {heuristics::ttm_equal(ti), heuristics::ttm_tangent(ti)}) {
      for (double s : evaluate(ti, r.allocation).constraint_slack) EXPECT_GE(s, -1e-9);
      EXPECT_GE(r.objective, best - 1e-12);
    }
  }
}

TEST(Schemes, Names) {
  for (Scheme s : {Scheme::stm_optimal, Scheme::stm_equal, Scheme::stm_fixed_tdma,
                   Scheme::ttm_optimal, Scheme::ttm_equal, Scheme::ttm_tangent}) {
    EXPECT_EQ(parse_scheme(to_string(s)), s);
  }
  EXPECT_THROW(parse_scheme("greedy"), DomainError);
  EXPECT_EQ(problem_of(Scheme::ttm_tangent), Problem::ttm);
}
