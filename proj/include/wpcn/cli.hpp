#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wpcn/error.hpp"
#include "wpcn/heuristics.hpp"
#include "wpcn/io.hpp"
#include "wpcn/model.hpp"
#include "wpcn/oracle.hpp"
#include "wpcn/sim.hpp"
#include "wpcn/stm.hpp"
#include "wpcn/ttm.hpp"

namespace wpcn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNoFile = 3;
inline constexpr int kExitIo = 4;
inline constexpr int kExitCompute = 5;

enum class Subcommand { solve_stm, solve_ttm, sweep, compare_scheduling, oracle_check };

enum class OutputFormat { csv, json };

/// Parsed command line. Unset optionals fall back to the config file, then
/// to built-in defaults.
struct CommandSpec {
  Subcommand subcommand = Subcommand::solve_stm;
  std::optional<std::string> config_path;
  std::optional<std::size_t> users;
  std::optional<std::vector<double>> power_db;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<double>> demands;
  std::optional<std::vector<double>> gammas;
  std::optional<std::string> output_path;
  std::optional<OutputFormat> format;
  io::RateUnit unit = io::RateUnit::nats;
  std::optional<unsigned> threads;
  std::optional<std::size_t> realizations;
  std::optional<std::vector<std::string>> schemes;
  std::optional<std::vector<std::string>> policies;
  std::optional<std::string> problem;
  SchedulingPolicy order = SchedulingPolicy::as_given;
  std::optional<std::vector<std::size_t>> k_range;
  std::size_t trials = 20;
};

/// Thrown by parse_args; carries the process exit status.
class CliError : public Error {
 public:
  CliError(const std::string& msg, int exit_code) : Error(msg), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

namespace detail {

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* flag) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::istringstream is(item);
    is.imbue(std::locale::classic());
    T v{};
    if (!(is >> v) || !(is >> std::ws).eof()) {
      throw CliError(std::string(flag) + ": cannot parse '" + item + "'", kExitUsage);
    }
    out.push_back(v);
  }
  if (out.empty()) throw CliError(std::string(flag) + ": empty list", kExitUsage);
  return out;
}

inline std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace detail

inline std::string usage_text() {
  return "usage: wpcn <solve-stm|solve-ttm|sweep|compare-scheduling|oracle-check> [options]\n"
         "run 'wpcn <subcommand> --help' for options\n";
}

/// Parses argv (without the program name). Throws CliError with exit code 2
/// on usage errors, 3 when --config names a missing file, and 0 for --help.
inline CommandSpec parse_args(const std::vector<std::string>& args) {
  CLI::App app{"Time allocation for full-duplex wireless-powered TDMA networks", "wpcn"};
  app.require_subcommand(1, 1);

  struct Raw {
    std::string config, power_db, demands, gammas, output, format, unit = "nats", schemes,
        policies, problem, order = "as-given", k_range;
    std::size_t users = 0, realizations = 0, trials = 20;
    std::uint64_t seed = 0;
    unsigned threads = 1;
  } raw;

  std::vector<std::pair<Subcommand, CLI::App*>> subs;
  auto add = [&](Subcommand which, const char* name, const char* help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->add_option("--config", raw.config, "JSON configuration file");
    s->add_option("--users", raw.users, "number of users K");
    s->add_option("--power-db", raw.power_db, "HAP power in dB, comma separated for sweeps");
    s->add_option("--seed", raw.seed, "random seed (fallback: WPCN_SEED)");
    s->add_option("--demands", raw.demands, "per-user demands in nats, comma separated");
    s->add_option("--gammas", raw.gammas, "per-user effective SNRs, comma separated");
    s->add_option("--output", raw.output, "output file (default: standard output)");
    s->add_option("--format", raw.format, "csv or json");
    s->add_option("--unit", raw.unit, "throughput unit: nats or bits");
    s->add_option("--threads", raw.threads, "worker threads for sweeps");
    s->add_option("--realizations", raw.realizations, "channel realizations per sweep point");
    s->add_option("--schemes", raw.schemes, "comma separated scheme names");
    s->add_option("--policies", raw.policies, "comma separated scheduling policies");
    s->add_option("--problem", raw.problem, "stm or ttm");
    s->add_option("--order", raw.order, "scheduling policy of a single solve");
    s->add_option("--k-range", raw.k_range, "user counts for a sweep over K");
    s->add_option("--trials", raw.trials, "random instances per oracle check");
    subs.emplace_back(which, s);
  };
  add(Subcommand::solve_stm, "solve-stm", "optimal sum-throughput allocation");
  add(Subcommand::solve_ttm, "solve-ttm", "optimal total-time allocation");
  add(Subcommand::sweep, "sweep", "Monte-Carlo sweep over HAP power or user count");
  add(Subcommand::compare_scheduling, "compare-scheduling",
      "increasing vs decreasing SNR scheduling");
  add(Subcommand::oracle_check, "oracle-check", "compare solvers against independent oracles");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw CliError(app.help(), kExitOk);
  } catch (const CLI::CallForAllHelp&) {
    throw CliError(app.help(), kExitOk);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) throw CliError(app.help(), kExitOk);
    throw CliError(std::string(e.what()) + "\n" + usage_text(), kExitUsage);
  }

  CommandSpec spec;
  CLI::App* chosen = nullptr;
  for (auto& [which, s] : subs) {
    if (s->parsed()) {
      spec.subcommand = which;
      chosen = s;
    }
  }
  auto given = [&](const char* flag) { return chosen->count(flag) > 0; };

  try {
    if (given("--config")) {
      if (!std::filesystem::exists(raw.config)) {
        throw CliError("config file '" + raw.config + "' not found", kExitNoFile);
      }
      spec.config_path = raw.config;
    }
    if (given("--users")) {
      if (raw.users < 1) throw CliError("--users must be >= 1", kExitUsage);
      spec.users = raw.users;
    }
    if (given("--power-db")) spec.power_db = detail::parse_list<double>(raw.power_db, "--power-db");
    if (given("--seed")) spec.seed = raw.seed;
    if (given("--demands")) spec.demands = detail::parse_list<double>(raw.demands, "--demands");
    if (given("--gammas")) spec.gammas = detail::parse_list<double>(raw.gammas, "--gammas");
    if (given("--output")) spec.output_path = raw.output;
    if (given("--format")) {
      if (raw.format == "csv") {
        spec.format = OutputFormat::csv;
      } else if (raw.format == "json") {
        spec.format = OutputFormat::json;
      } else {
        throw CliError("--format must be csv or json", kExitUsage);
      }
    }
    spec.unit = io::parse_unit(raw.unit);
    if (given("--threads")) spec.threads = raw.threads;
    if (given("--realizations")) spec.realizations = raw.realizations;
    if (given("--schemes")) {
      spec.schemes = detail::split(raw.schemes);
      for (const auto& s : *spec.schemes) parse_scheme(s);
    }
    if (given("--policies")) {
      spec.policies = detail::split(raw.policies);
      for (const auto& p : *spec.policies) parse_policy(p);
    }
    if (given("--problem")) {
      parse_problem(raw.problem);
      spec.problem = raw.problem;
    }
    spec.order = parse_policy(raw.order);
    if (given("--k-range")) spec.k_range = detail::parse_list<std::size_t>(raw.k_range, "--k-range");
    spec.trials = raw.trials;
  } catch (const DomainError& e) {
    throw CliError(e.what(), kExitUsage);
  }
  if (spec.gammas && spec.demands && spec.gammas->size() != spec.demands->size()) {
    throw CliError("--gammas and --demands must have the same length", kExitUsage);
  }
  return spec;
}

/// Merges file config, environment and flags; flags win over the file,
/// WPCN_SEED is used only when neither supplies a seed.
inline io::SweepConfig resolve_config(const CommandSpec& spec) {
  io::SweepConfig cfg;
  bool seed_from_file = false;
  if (spec.config_path) {
    const io::json j = io::load_json_file(*spec.config_path);
    cfg = io::sweep_config_from_json(j);
    seed_from_file = j.contains("seed");
  }
  sim::SimConfig& c = cfg.sim;
  if (spec.problem) {
    const Problem p = parse_problem(*spec.problem);
    if (p != c.problem) {
      c.problem = p;
      c.schemes = p == Problem::stm
                      ? std::vector<Scheme>{Scheme::stm_optimal, Scheme::stm_equal,
                                            Scheme::stm_fixed_tdma}
                      : std::vector<Scheme>{Scheme::ttm_optimal, Scheme::ttm_equal,
                                            Scheme::ttm_tangent};
    }
  }
  if (spec.users) c.num_users = *spec.users;
  if (spec.power_db) c.hap_power_db = *spec.power_db;
  if (spec.seed) {
    c.seed = *spec.seed;
  } else if (!seed_from_file) {
    if (const char* env = std::getenv("WPCN_SEED")) {
      try {
        c.seed = std::stoull(env);
      } catch (const std::exception&) {
        throw CliError(std::string("WPCN_SEED: cannot parse '") + env + "'", kExitUsage);
      }
    }
  }
  if (spec.demands) c.demand = spec.demands->front();
  if (spec.threads) c.threads = *spec.threads;
  if (spec.realizations) c.num_realizations = *spec.realizations;
  if (spec.schemes) {
    c.schemes.clear();
    for (const auto& s : *spec.schemes) c.schemes.push_back(parse_scheme(s));
  }
  if (spec.policies) {
    c.scheduling.clear();
    for (const auto& p : *spec.policies) c.scheduling.push_back(parse_policy(p));
  }
  if (spec.k_range) cfg.k_range = *spec.k_range;
  return cfg;
}

/// Single-solve instance: --gammas when given, otherwise realization 0 of
/// the configured fading model at the first HAP power point.
inline Instance resolve_instance(const CommandSpec& spec, Problem problem) {
  if (spec.gammas) {
    std::vector<double> demands;
    if (spec.demands) {
      demands = *spec.demands;
    } else if (problem == Problem::ttm) {
      demands.assign(spec.gammas->size(), 1.0);
    }
    return scheduling_order(Instance::from_gammas(*spec.gammas, demands), spec.order);
  }
  io::SweepConfig cfg = resolve_config(spec);
  cfg.sim.problem = problem;
  Instance drawn = sim::draw_channels(cfg.sim, 0);
  if (spec.demands && problem == Problem::ttm) {
    std::vector<UserChannel> users = drawn.users();
    if (spec.demands->size() != 1 && spec.demands->size() != users.size()) {
      throw CliError("--demands must have one entry or one per user", kExitUsage);
    }
    for (std::size_t i = 0; i < users.size(); ++i) {
      users[i].demand = spec.demands->size() == 1 ? spec.demands->front() : (*spec.demands)[i];
    }
    drawn = Instance(std::move(users), drawn.hap_power(), drawn.noise_power());
  }
  return scheduling_order(drawn, spec.order);
}

struct CheckRow {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Solver-versus-oracle comparisons on random instances: KKT residuals,
/// projected gradient and grid search for the sum-throughput solver; grid
/// search, feasibility and tightness for the total-time solver; dominance
/// over the heuristics.
inline std::vector<CheckRow> run_oracle_checks(std::uint64_t seed, std::size_t trials) {
  std::vector<CheckRow> rows;
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  std::uniform_int_distribution<int> kdist(1, 10);
  std::uniform_real_distribution<double> uni(0.5, 10.0);

  auto record = [&](const std::string& name, bool ok, const std::string& detail) {
    rows.push_back({name, ok, detail});
  };
  auto fmt = [](double v) {
    std::ostringstream os;
    os << std::setprecision(3) << std::scientific << v;
    return os.str();
  };

  double worst_kkt = 0.0, worst_pg = 0.0, worst_sum = 0.0;
  bool dominance = true;
  for (std::size_t t = 0; t < trials; ++t) {
    const int k = kdist(rng);
    std::vector<double> g(k);
    for (double& x : g) x = std::max(expo(rng) * 10.0, 1e-3);
    const Instance inst = Instance::from_gammas(g);
    const stm::StmSolution sol = stm::solve_stm(inst);
    worst_kkt = std::max(worst_kkt, oracle::kkt_residuals(inst, sol.allocation).max_abs_residual());
    worst_sum = std::max(worst_sum, std::fabs(sol.allocation.total() - 1.0));
    const oracle::PgResult pg = oracle::stm_projected_gradient(inst);
    worst_pg = std::max(worst_pg, std::fabs(pg.objective - sol.total_throughput));
    const double slack = 1e-9 * std::max(1.0, sol.total_throughput);
    if (heuristics::stm_equal(inst).objective > sol.total_throughput + slack ||
        heuristics::stm_fixed_tdma(inst).objective > sol.total_throughput + slack) {
      dominance = false;
    }
  }
  record("stm-kkt-residual", worst_kkt <= 1e-8, "max " + fmt(worst_kkt) + " <= 1e-8");
  record("stm-sum-to-one", worst_sum <= 1e-12, "max " + fmt(worst_sum) + " <= 1e-12");
  record("stm-projected-gradient", worst_pg <= 1e-6, "max gap " + fmt(worst_pg) + " <= 1e-6");
  record("stm-heuristic-dominance", dominance, "optimal >= equal, fixed-tdma");

  double worst_grid = 0.0;
  for (std::size_t t = 0; t < std::min<std::size_t>(trials, 5); ++t) {
    std::vector<double> g = {uni(rng), uni(rng)};
    const Instance inst = Instance::from_gammas(g);
    const double grid = oracle::stm_grid_oracle(inst, 1e-2).objective;
    worst_grid = std::max(worst_grid, std::fabs(grid - stm::solve_stm(inst).total_throughput));
  }
  record("stm-grid-k2", worst_grid <= 1e-4, "max gap " + fmt(worst_grid) + " <= 1e-4");

  double worst_slack = 0.0, worst_tight = 0.0, worst_ttm_grid = 0.0;
  bool ttm_dominance = true;
  for (std::size_t t = 0; t < trials; ++t) {
    const int k = kdist(rng);
    std::vector<double> g(k), d(k);
    for (int i = 0; i < k; ++i) {
      g[i] = uni(rng);
      d[i] = 0.5 + 0.5 * uni(rng) / 10.0;
    }
    const Instance inst = Instance::from_gammas(g, d);
    const ttm::TtmSolution sol = ttm::solve_ttm(inst);
    const Evaluation ev = evaluate(inst, sol.allocation);
    for (double s : ev.constraint_slack) worst_slack = std::min(worst_slack, s);
    worst_tight = std::max(worst_tight, std::fabs(ev.constraint_slack.back()));
    const double slack = 1e-9 * std::max(1.0, sol.total_time);
    if (heuristics::ttm_equal(inst).objective < sol.total_time - slack ||
        heuristics::ttm_tangent(inst).objective < sol.total_time - slack) {
      ttm_dominance = false;
    }
  }
  for (std::size_t t = 0; t < std::min<std::size_t>(trials, 3); ++t) {
    std::vector<double> g = {uni(rng), uni(rng)}, d = {1.0, 1.0};
    const Instance inst = Instance::from_gammas(g, d);
    const double grid = oracle::ttm_grid_oracle(inst, 1e-2).objective;
    worst_ttm_grid = std::max(worst_ttm_grid, std::fabs(grid - ttm::solve_ttm(inst).total_time));
  }
  record("ttm-feasibility", worst_slack >= -1e-9, "min slack " + fmt(worst_slack) + " >= -1e-9");
  record("ttm-last-tight", worst_tight <= 1e-9, "max |slack_K| " + fmt(worst_tight) + " <= 1e-9");
  record("ttm-grid-k2", worst_ttm_grid <= 1e-3, "max gap " + fmt(worst_ttm_grid) + " <= 1e-3");
  record("ttm-heuristic-dominance", ttm_dominance, "optimal <= equal, tangent");
  return rows;
}

namespace detail {

inline void write_output(const CommandSpec& spec, const std::string& text, std::ostream& out) {
  if (!spec.output_path) {
    out << text;
    return;
  }
  std::ofstream f(*spec.output_path, std::ios::binary);
  if (!f) throw io::OutputError("cannot open '" + *spec.output_path + "' for writing");
  f << text;
  f.flush();
  if (!f) throw io::OutputError("failed writing '" + *spec.output_path + "'");
}

}  // namespace detail

/// Executes a parsed command; returns the process exit status.
inline int run(const CommandSpec& spec, std::ostream& out, std::ostream& err) {
  try {
    std::ostringstream text;
    switch (spec.subcommand) {
      case Subcommand::solve_stm: {
        const Instance inst = resolve_instance(spec, Problem::stm);
        const stm::StmSolution sol = stm::solve_stm(inst);
        if (spec.format.value_or(OutputFormat::json) == OutputFormat::json) {
          text << io::stm_solution_json(inst, sol, spec.unit).dump(2) << '\n';
        } else {
          std::vector<double> per_user = evaluate(inst, sol.allocation).per_user_rate_nats;
          for (double& v : per_user) v = io::convert_rate(v, spec.unit);
          io::write_solution_csv(text, sol.allocation.values(), per_user, "throughput");
        }
        break;
      }
      case Subcommand::solve_ttm: {
        const Instance inst = resolve_instance(spec, Problem::ttm);
        const ttm::TtmSolution sol = ttm::solve_ttm(inst);
        if (spec.format.value_or(OutputFormat::json) == OutputFormat::json) {
          text << io::ttm_solution_json(inst, sol).dump(2) << '\n';
        } else {
          io::write_solution_csv(text, sol.allocation.values(), sol.geometry.completion,
                                 "completion");
        }
        break;
      }
      case Subcommand::sweep:
      case Subcommand::compare_scheduling: {
        io::SweepConfig cfg = resolve_config(spec);
        if (spec.subcommand == Subcommand::compare_scheduling) {
          cfg.sim.scheduling = {SchedulingPolicy::increasing_snr, SchedulingPolicy::decreasing_snr};
          if (!spec.schemes) {
            cfg.sim.schemes = {cfg.sim.problem == Problem::stm ? Scheme::stm_optimal
                                                               : Scheme::ttm_optimal};
          }
        }
        const sim::SweepResult res = cfg.k_range.empty() ? sim::run_sweep(cfg.sim)
                                                         : sim::sweep_users(cfg.sim, cfg.k_range);
        if (spec.format.value_or(OutputFormat::csv) == OutputFormat::csv) {
          io::write_sweep_csv(text, res, spec.unit);
        } else {
          io::json rows = io::json::array();
          for (const sim::SweepRow& r : res.rows) {
            const bool rate = problem_of(r.scheme) == Problem::stm;
            rows.push_back({{"sweep_value", r.sweep_value},
                            {"scheme", std::string(to_string(r.scheme))},
                            {"policy", std::string(to_string(r.policy))},
                            {"mean_objective", rate ? io::convert_rate(r.mean_objective, spec.unit)
                                                    : r.mean_objective},
                            {"std_error",
                             rate ? io::convert_rate(r.std_error, spec.unit) : r.std_error},
                            {"n", r.n}});
          }
          text << io::json{{"config", io::sim_config_to_json(cfg.sim)}, {"rows", rows}}.dump(2)
               << '\n';
        }
        break;
      }
      case Subcommand::oracle_check: {
        const std::uint64_t seed = resolve_config(spec).sim.seed;
        const std::vector<CheckRow> rows = run_oracle_checks(seed, spec.trials);
        bool all = true;
        for (const CheckRow& r : rows) {
          text << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(26) << r.name << ' '
               << r.detail << '\n';
          all = all && r.passed;
        }
        detail::write_output(spec, text.str(), out);
        return all ? kExitOk : kExitCheckFailed;
      }
    }
    detail::write_output(spec, text.str(), out);
    return kExitOk;
  } catch (const CliError& e) {
    err << e.what() << '\n';
    return e.exit_code();
  } catch (const io::FileNotFound& e) {
    err << e.what() << '\n';
    return kExitNoFile;
  } catch (const io::ConfigError& e) {
    err << e.what() << '\n';
    return kExitUsage;
  } catch (const io::OutputError& e) {
    err << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitCompute;
  }
}

/// Entry point shared by the executable and the tests.
inline int main_with_args(const std::vector<std::string>& args, std::ostream& out,
                          std::ostream& err) {
  CommandSpec spec;
  try {
    spec = parse_args(args);
  } catch (const CliError& e) {
    std::string msg = e.what();
    if (!msg.empty() && msg.back() != '\n') msg += '\n';
    (e.exit_code() == kExitOk ? out : err) << msg;
    return e.exit_code();
  }
  return run(spec, out, err);
}

}  // namespace wpcn::cli
