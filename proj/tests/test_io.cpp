#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "wpcn/io.hpp"
#include "wpcn/specialfn.hpp"

using namespace wpcn;
using io::json;

namespace {

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string l;
  while (std::getline(ss, l)) out.push_back(l);
  return out;
}

}  // namespace

TEST(FormatNumber, TwelveSignificantDigits) {
  EXPECT_EQ(io::format_number(1 - kInvE), "0.632120558829");
  EXPECT_EQ(io::format_number(0.0), "0");
  EXPECT_EQ(io::format_number(12.5), "12.5");
  EXPECT_EQ(io::format_number(1e-20), "1e-20");
}

TEST(SweepCsv, HeaderAndRowCount) {
  sim::SimConfig c;
  c.num_users = 2;
  c.hap_power_db = {0, 5, 10};
  c.num_realizations = 10;
  c.schemes = {Scheme::stm_optimal, Scheme::stm_equal};
  std::ostringstream os;
  io::write_sweep_csv(os, sim::run_sweep(c));
  const std::string text = os.str();
  EXPECT_EQ(text.find('\r'), std::string::npos);
  const auto ls = lines(text);
  ASSERT_EQ(ls.size(), 7u);
  EXPECT_EQ(ls[0], "sweep_value,scheme,policy,mean_objective,std_error,n");
  EXPECT_EQ(ls[1].substr(0, 22), "0,stm-optimal,as-given");
}

TEST(SweepCsv, BitsDivideByLn2) {
  sim::SweepResult r;
  r.rows.push_back({0, Scheme::stm_optimal, SchedulingPolicy::as_given, std::log(2.0), 0.0, 1});
  r.rows.push_back({0, Scheme::ttm_optimal, SchedulingPolicy::as_given, 3.0, 0.0, 1});
  std::ostringstream os;
  io::write_sweep_csv(os, r, io::RateUnit::bits);
  const auto ls = lines(os.str());
  EXPECT_EQ(ls[1], "0,stm-optimal,as-given,1,0,1");
  EXPECT_EQ(ls[2], "0,ttm-optimal,as-given,3,0,1");
}

TEST(Config, ParsesAndRejectsUnknownKeys) {
  const json j = json::parse(R"({"num_users": 4, "hap_power_db": 10, "seed": 5,
                                 "problem": "ttm", "scheduling": ["increasing-snr"]})");
  const io::SweepConfig c = io::sweep_config_from_json(j);
  EXPECT_EQ(c.sim.num_users, 4u);
  EXPECT_EQ(c.sim.hap_power_db, (std::vector<double>{10}));
  EXPECT_EQ(c.sim.seed, 5u);
  EXPECT_EQ(c.sim.problem, Problem::ttm);
  EXPECT_EQ(c.sim.schemes.front(), Scheme::ttm_optimal);
  EXPECT_THROW(io::sweep_config_from_json(json::parse(R"({"users": 3})")), io::ConfigError);
  EXPECT_THROW(io::sweep_config_from_json(json::parse(R"({"num_users": "x"})")), io::ConfigError);
  EXPECT_THROW(io::load_json_file("/nonexistent/cfg.json"), io::FileNotFound);
}

TEST(Config, RoundTrip) {
  sim::SimConfig c;
  c.seed = 1234;
  c.scheduling = {SchedulingPolicy::decreasing_snr};
  const io::SweepConfig back = io::sweep_config_from_json(io::sim_config_to_json(c));
  EXPECT_EQ(back.sim.seed, 1234u);
  EXPECT_EQ(back.sim.scheduling, c.scheduling);
  EXPECT_EQ(back.sim.hap_power_db, c.hap_power_db);
}

TEST(SolutionJson, StmRoundTripEvaluates) {
  const Instance inst = Instance::from_gammas(std::vector<double>{0.7, 3.0, 12.0});
  const json j = json::parse(io::stm_solution_json(inst, stm::solve_stm(inst)).dump());
  const std::vector<double> tau = j.at("tau").get<std::vector<double>>();
  const std::vector<double> g = j.at("gammas").get<std::vector<double>>();
  EXPECT_NEAR(evaluate(Instance::from_gammas(g), TimeAllocation(tau)).total_throughput,
              j.at("objective").get<double>(), 1e-10);
  EXPECT_LE(j.at("diagnostics").at("max_stationarity_residual").get<double>(), 1e-8);
}

TEST(SolutionJson, SingleUserTau) {
  const Instance inst = Instance::from_gammas(std::vector<double>{1.0});
  const json j = io::stm_solution_json(inst, stm::solve_stm(inst));
  EXPECT_NEAR(j["tau"][0].get<double>(), 0.632120558829, 1e-12);
  EXPECT_NEAR(j["tau"][1].get<double>(), 0.367879441171, 1e-12);
  const json b = io::stm_solution_json(inst, stm::solve_stm(inst), io::RateUnit::bits);
  EXPECT_NEAR(b["objective"].get<double>(), kInvE / std::log(2.0), 1e-15);
}

TEST(SolutionJson, TtmFields) {
  const Instance inst = Instance::from_gammas(std::vector<double>{1, 1}, std::vector<double>{1, 1});
  const json j = io::ttm_solution_json(inst, ttm::solve_ttm(inst));
  EXPECT_EQ(j["diagnostics"]["pivot_k"].get<int>(), 1);
  const std::vector<double> tau = j.at("tau").get<std::vector<double>>();
  EXPECT_NEAR(tau[0] + tau[1] + tau[2], j["objective"].get<double>(), 1e-12);
}
