#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wpcn/cli.hpp"

using namespace wpcn;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::main_with_args(args, out, err);
  return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("wpcn_test_" + name)).string();
}

}  // namespace

TEST(ParseArgs, SolveWithGammas) {
  const cli::CommandSpec s = cli::parse_args({"solve-stm", "--gammas", "1,1"});
  EXPECT_EQ(s.subcommand, cli::Subcommand::solve_stm);
  ASSERT_TRUE(s.gammas);
  EXPECT_EQ(*s.gammas, (std::vector<double>{1, 1}));
}

TEST(ParseArgs, ErrorCodes) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"sweep", "--config", "missing.json"}).code, 3);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"solve-stm", "--gammas", "1,x"}).code, 2);
  EXPECT_EQ(run({"solve-stm", "--unit", "furlongs"}).code, 2);
  EXPECT_EQ(run({"sweep", "--schemes", "ttm-optimal,nope"}).code, 2);
  EXPECT_EQ(run({"solve-stm", "--help"}).code, 0);
}

TEST(Command, SolveStmJson) {
  const CliRun r = run({"solve-stm", "--gammas", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const io::json j = io::json::parse(r.out);
  EXPECT_NEAR(j["tau"][0].get<double>(), 0.632120558829, 1e-12);
  EXPECT_NEAR(j["objective"].get<double>(), 0.367879441171, 1e-12);
}

TEST(Command, SolveTtmCsv) {
  const CliRun r = run({"solve-ttm", "--gammas", "1", "--demands", "1", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "slot,tau,completion\n0,1.71828182846,0\n1,1,2.71828182846\n");
}

TEST(Command, SweepRowsAndDeterminism) {
  const std::vector<std::string> args = {"sweep", "--users", "2", "--power-db", "0,5,10",
                                         "--realizations", "20", "--schemes",
                                         "stm-optimal,stm-equal", "--seed", "3"};
  const CliRun a = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 7);
  std::vector<std::string> threaded = args;
  threaded.insert(threaded.end(), {"--threads", "3"});
  EXPECT_EQ(run(threaded).out, a.out);
}

TEST(Command, SeedPrecedence) {
  const std::string cfg = temp_path("seed.json");
  std::ofstream(cfg) << R"({"num_users": 2, "hap_power_db": [10], "num_realizations": 5, "seed": 11})";
  const std::vector<std::string> base = {"sweep", "--config", cfg};
  const std::string from_file = run(base).out;
  std::vector<std::string> flagged = base;
  flagged.insert(flagged.end(), {"--seed", "11"});
  EXPECT_EQ(run(flagged).out, from_file);
  flagged.back() = "12";
  EXPECT_NE(run(flagged).out, from_file);

  ::setenv("WPCN_SEED", "12", 1);
  EXPECT_EQ(run(base).out, from_file);  // file seed wins over the environment
  const std::vector<std::string> no_file = {"sweep", "--users", "2", "--power-db", "10",
                                            "--realizations", "5"};
  const std::string env12 = run(no_file).out;
  ::setenv("WPCN_SEED", "13", 1);
  EXPECT_NE(run(no_file).out, env12);
  ::unsetenv("WPCN_SEED");
  std::filesystem::remove(cfg);
}

TEST(Command, OutputFileAndIoError) {
  const std::string path = temp_path("out.csv");
  const CliRun r = run({"solve-stm", "--gammas", "2,3", "--format", "csv", "--output", path});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "slot,tau,throughput");
  std::filesystem::remove(path);
  EXPECT_EQ(run({"solve-stm", "--gammas", "1", "--output", "/nonexistent/dir/x.json"}).code, 4);
}

TEST(Command, BadConfigIsUsageError) {
  const std::string cfg = temp_path("bad.json");
  std::ofstream(cfg) << R"({"num_users": 2, "colour": "blue"})";
  EXPECT_EQ(run({"sweep", "--config", cfg}).code, 2);
  std::filesystem::remove(cfg);
}

TEST(Command, CompareSchedulingRows) {
  const CliRun r = run({"compare-scheduling", "--users", "3", "--power-db", "10", "--realizations", "10"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("stm-optimal,increasing-snr"), std::string::npos);
  EXPECT_NE(r.out.find("stm-optimal,decreasing-snr"), std::string::npos);
}

TEST(Command, OracleCheckPasses) {
  const CliRun r = run({"oracle-check", "--trials", "5", "--seed", "2"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

#ifdef WPCN_CLI_PATH
TEST(Executable, ExitCodes) {
  const std::string exe = WPCN_CLI_PATH;
  EXPECT_EQ(WEXITSTATUS(std::system((exe + " > /dev/null 2>&1").c_str())), 2);
  EXPECT_EQ(WEXITSTATUS(std::system((exe + " sweep --config missing.json 2>/dev/null").c_str())), 3);
  EXPECT_EQ(WEXITSTATUS(std::system((exe + " solve-stm --gammas 1 > /dev/null").c_str())), 0);
}
#endif
