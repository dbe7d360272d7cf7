#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <mutex>
#include <set>

#include "wpcn/sim.hpp"

using namespace wpcn;

namespace {

sim::SimConfig small_config() {
  sim::SimConfig c;
  c.num_users = 3;
  c.hap_power_db = {0, 10};
  c.num_realizations = 60;
  c.seed = 99;
  return c;
}

}  // namespace

TEST(Rng, UniformInOpenInterval) {
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const double u = sim::counter_uniform(5, i);
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_NE(sim::counter_bits(1, 0), sim::counter_bits(2, 0));
}

TEST(DrawChannels, MeanGainIsOne) {
  sim::SimConfig c;
  c.num_users = 1;
  const int n = 100000;
  double s = 0, s2 = 0;
  for (int r = 0; r < n; ++r) {
    const double g = sim::draw_users(c, r)[0].g;
    s += g;
    s2 += g * g;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  EXPECT_LE(std::fabs(mean - 1.0), 3 * se);
}

TEST(DrawChannels, DeterministicAndDistinct) {
  const sim::SimConfig c = small_config();
  const Instance a = sim::draw_channels(c, 7);
  const Instance b = sim::draw_channels(c, 7);
  const Instance d = sim::draw_channels(c, 8);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a.users()[i].g, b.users()[i].g);
    EXPECT_EQ(a.users()[i].h, b.users()[i].h);
    EXPECT_NE(a.users()[i].g, d.users()[i].g);
  }
  EXPECT_DOUBLE_EQ(a.hap_power(), 1.0);
  EXPECT_DOUBLE_EQ(sim::draw_channels(c, 7, 10.0).hap_power(), 10.0);
}

TEST(Config, Validation) {
  sim::SimConfig c = small_config();
  c.num_realizations = 0;
  EXPECT_THROW(c.validate(), DomainError);
  c = small_config();
  c.schemes = {Scheme::ttm_optimal};
  EXPECT_THROW(c.validate(), DomainError);
  c = small_config();
  c.hap_power_db = {std::nan("")};
  EXPECT_THROW(c.validate(), DomainError);
}

TEST(Sweep, RowLayout) {
  const sim::SimConfig c = small_config();
  const sim::SweepResult r = sim::run_sweep(c);
  ASSERT_EQ(r.rows.size(), 2u * 3u);
  EXPECT_EQ(r.rows[0].sweep_value, 0.0);
  EXPECT_EQ(r.rows[3].sweep_value, 10.0);
  EXPECT_EQ(r.rows[1].scheme, Scheme::stm_equal);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.n, 60u);
    EXPECT_GT(row.std_error, 0.0);
  }
  ASSERT_NE(r.find(10.0, Scheme::stm_optimal, SchedulingPolicy::as_given), nullptr);
}

TEST(Sweep, BitIdenticalAcrossThreads) {
  sim::SimConfig c = small_config();
  const sim::SweepResult a = sim::run_sweep(c);
  c.threads = 4;
  const sim::SweepResult b = sim::run_sweep(c);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].mean_objective, b.rows[i].mean_objective);
    EXPECT_EQ(a.rows[i].std_error, b.rows[i].std_error);
  }
}

TEST(Sweep, PairedDraws) {
  sim::SimConfig c = small_config();
  c.scheduling = {SchedulingPolicy::increasing_snr, SchedulingPolicy::decreasing_snr};
  std::mutex m;
  std::map<std::pair<std::size_t, std::size_t>, std::set<std::vector<double>>> seen;
  sim::collect_objectives(c, [&](std::size_t p, std::size_t r, SchedulingPolicy, Scheme,
                                 const Instance& drawn) {
    std::lock_guard<std::mutex> lock(m);
    seen[{p, r}].insert(effective_snr(drawn));
  });
  EXPECT_EQ(seen.size(), 2u * 60u);
  for (const auto& [cell, draws] : seen) EXPECT_EQ(draws.size(), 1u);
}

TEST(Sweep, PerRealizationDominance) {
  sim::SimConfig c = small_config();
  const sim::ObjectiveSamples s = sim::collect_objectives(c);
  for (std::size_t p = 0; p < s.points; ++p) {
    for (std::size_t r = 0; r < s.realizations; ++r) {
      EXPECT_GE(s.at(p, 0, 0)[r], s.at(p, 1, 0)[r] - 1e-12);
      EXPECT_GE(s.at(p, 0, 0)[r], s.at(p, 2, 0)[r] - 1e-12);
    }
  }
  c.problem = Problem::ttm;
  c.schemes = {Scheme::ttm_optimal, Scheme::ttm_equal, Scheme::ttm_tangent};
  const sim::ObjectiveSamples t = sim::collect_objectives(c);
  for (std::size_t p = 0; p < t.points; ++p) {
    for (std::size_t r = 0; r < t.realizations; ++r) {
      EXPECT_LE(t.at(p, 0, 0)[r], t.at(p, 1, 0)[r] + 1e-12);
      EXPECT_LE(t.at(p, 0, 0)[r], t.at(p, 2, 0)[r] + 1e-12);
    }
  }
}

TEST(SweepUsers, SingleUserFixedTdmaCoincides) {
  sim::SimConfig c = small_config();
  c.hap_power_db = {10};
  const std::vector<std::size_t> ks = {1, 2, 4};
  const sim::SweepResult r = sim::sweep_users(c, ks);
  ASSERT_EQ(r.rows.size(), 9u);
  const auto* opt = r.find(1, Scheme::stm_optimal, SchedulingPolicy::as_given);
  const auto* fix = r.find(1, Scheme::stm_fixed_tdma, SchedulingPolicy::as_given);
  EXPECT_NEAR(opt->mean_objective, fix->mean_objective, 1e-9);
  EXPECT_GE(r.find(4, Scheme::stm_optimal, SchedulingPolicy::as_given)->mean_objective,
            r.find(2, Scheme::stm_optimal, SchedulingPolicy::as_given)->mean_objective);
  EXPECT_THROW(sim::sweep_users(c, std::vector<std::size_t>{}), DomainError);
}

TEST(Stats, PairwiseSumAndStdError) {
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  EXPECT_EQ(sim::pairwise_sum(v), 499500.0);
  const sim::MeanStat m = sim::mean_and_std_error(std::vector<double>{1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_NEAR(m.std_error, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
}
