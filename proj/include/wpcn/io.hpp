#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "wpcn/error.hpp"
#include "wpcn/heuristics.hpp"
#include "wpcn/model.hpp"
#include "wpcn/oracle.hpp"
#include "wpcn/sim.hpp"
#include "wpcn/stm.hpp"
#include "wpcn/ttm.hpp"

namespace wpcn::io {

using nlohmann::json;

enum class RateUnit { nats, bits };

inline RateUnit parse_unit(std::string_view s) {
  if (s == "nats") return RateUnit::nats;
  if (s == "bits") return RateUnit::bits;
  throw DomainError("unknown rate unit '" + std::string(s) + "'");
}

inline std::string_view to_string(RateUnit u) { return u == RateUnit::nats ? "nats" : "bits"; }

/// Converts a throughput in nats to the requested unit.
inline double convert_rate(double nats, RateUnit unit) {
  return unit == RateUnit::bits ? nats / std::log(2.0) : nats;
}

/// Missing configuration file.
class FileNotFound : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration content.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Output could not be written.
class OutputError : public Error {
 public:
  using Error::Error;
};

/// 12 significant digits, '.' decimal point, independent of the locale.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

/// Sweep configuration plus the optional user-count range.
struct SweepConfig {
  sim::SimConfig sim;
  std::vector<std::size_t> k_range;
};

/// Parses the JSON configuration. Keys mirror the SimConfig fields;
/// hap_power_db may be a number or an array. Unknown keys are rejected.
inline SweepConfig sweep_config_from_json(const json& j) {
  static const std::set<std::string> known = {
      "num_users", "hap_power_db", "num_realizations", "seed",         "scheduling",
      "schemes",   "problem",      "demand",           "eta",          "noise_power",
      "channel_mean", "threads",   "k_range"};
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw ConfigError("config: unknown key '" + it.key() + "'");
  }
  SweepConfig out;
  sim::SimConfig& c = out.sim;
  try {
    if (j.contains("problem")) {
      c.problem = parse_problem(j.at("problem").get<std::string>());
      if (c.problem == Problem::ttm) {
        c.schemes = {Scheme::ttm_optimal, Scheme::ttm_equal, Scheme::ttm_tangent};
      }
    }
    if (j.contains("num_users")) c.num_users = j.at("num_users").get<std::size_t>();
    if (j.contains("hap_power_db")) {
      const json& p = j.at("hap_power_db");
      c.hap_power_db = p.is_array() ? p.get<std::vector<double>>()
                                    : std::vector<double>{p.get<double>()};
    }
    if (j.contains("num_realizations")) {
      c.num_realizations = j.at("num_realizations").get<std::size_t>();
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("scheduling")) {
      c.scheduling.clear();
      for (const auto& s : j.at("scheduling")) c.scheduling.push_back(parse_policy(s.get<std::string>()));
    }
    if (j.contains("schemes")) {
      c.schemes.clear();
      for (const auto& s : j.at("schemes")) c.schemes.push_back(parse_scheme(s.get<std::string>()));
    }
    if (j.contains("demand")) c.demand = j.at("demand").get<double>();
    if (j.contains("eta")) c.eta = j.at("eta").get<double>();
    if (j.contains("noise_power")) c.noise_power = j.at("noise_power").get<double>();
    if (j.contains("channel_mean")) c.channel_mean = j.at("channel_mean").get<double>();
    if (j.contains("threads")) c.threads = j.at("threads").get<unsigned>();
    if (j.contains("k_range")) out.k_range = j.at("k_range").get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return out;
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

inline SweepConfig load_sweep_config(const std::string& path) {
  return sweep_config_from_json(load_json_file(path));
}

inline json sim_config_to_json(const sim::SimConfig& c) {
  json j;
  j["num_users"] = c.num_users;
  j["hap_power_db"] = c.hap_power_db;
  j["num_realizations"] = c.num_realizations;
  j["seed"] = c.seed;
  j["scheduling"] = json::array();
  for (auto p : c.scheduling) j["scheduling"].push_back(std::string(to_string(p)));
  j["schemes"] = json::array();
  for (auto s : c.schemes) j["schemes"].push_back(std::string(wpcn::to_string(s)));
  j["problem"] = std::string(wpcn::to_string(c.problem));
  j["demand"] = c.demand;
  j["eta"] = c.eta;
  j["noise_power"] = c.noise_power;
  j["channel_mean"] = c.channel_mean;
  j["threads"] = c.threads;
  return j;
}

/// CSV with header sweep_value,scheme,policy,mean_objective,std_error,n and LF
/// line ends. Throughput objectives are converted to `unit`; total times are
/// left alone.
inline void write_sweep_csv(std::ostream& out, const sim::SweepResult& result,
                            RateUnit unit = RateUnit::nats) {
  out << "sweep_value,scheme,policy,mean_objective,std_error,n\n";
  for (const sim::SweepRow& r : result.rows) {
    const bool rate = problem_of(r.scheme) == Problem::stm;
    const double mean = rate ? convert_rate(r.mean_objective, unit) : r.mean_objective;
    const double se = rate ? convert_rate(r.std_error, unit) : r.std_error;
    out << format_number(r.sweep_value) << ',' << to_string(r.scheme) << ','
        << to_string(r.policy) << ',' << format_number(mean) << ',' << format_number(se) << ','
        << r.n << '\n';
  }
}

inline json stm_solution_json(const Instance& inst, const stm::StmSolution& sol,
                              RateUnit unit = RateUnit::nats) {
  const oracle::KktDiagnostics kkt = oracle::kkt_residuals(inst, sol.allocation);
  const Evaluation ev = evaluate(inst, sol.allocation);
  json j;
  j["problem"] = "stm";
  j["unit"] = std::string(to_string(unit));
  j["gammas"] = sol.gammas;
  j["tau"] = std::vector<double>(sol.allocation.values().begin(), sol.allocation.values().end());
  j["objective"] = convert_rate(sol.total_throughput, unit);
  std::vector<double> per_user;
  for (double r : ev.per_user_rate_nats) per_user.push_back(convert_rate(r, unit));
  j["per_user_throughput"] = per_user;
  j["diagnostics"] = {{"sum_tau", sol.allocation.total()},
                      {"lambda", kkt.lambda},
                      {"max_stationarity_residual", kkt.max_abs_residual()},
                      {"x", sol.intermediates.x},
                      {"c", sol.intermediates.c}};
  return j;
}

inline json ttm_solution_json(const Instance& inst, const ttm::TtmSolution& sol) {
  const Evaluation ev = evaluate(inst, sol.allocation);
  json j;
  j["problem"] = "ttm";
  j["gammas"] = effective_snr(inst);
  j["demands"] = inst.demands();
  j["tau"] = std::vector<double>(sol.allocation.values().begin(), sol.allocation.values().end());
  j["objective"] = sol.total_time;
  j["diagnostics"] = {{"pivot_k", sol.pivot_k},
                      {"tau_m", sol.geometry.tau_m},
                      {"c_m", sol.geometry.c_m},
                      {"completion", sol.geometry.completion},
                      {"constraint_slack", ev.constraint_slack}};
  return j;
}

/// Per-slot CSV for a single solve: slot,tau,value where value is the user's
/// throughput (stm) or completion time (ttm); slot 0 reports 0.
inline void write_solution_csv(std::ostream& out, std::span<const double> tau,
                               std::span<const double> per_user, std::string_view value_name) {
  out << "slot,tau," << value_name << '\n';
  for (std::size_t i = 0; i < tau.size(); ++i) {
    const double v = i == 0 ? 0.0 : per_user[i - 1];
    out << i << ',' << format_number(tau[i]) << ',' << format_number(v) << '\n';
  }
}

}  // namespace wpcn::io
