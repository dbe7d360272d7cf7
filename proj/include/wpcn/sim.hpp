#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "wpcn/error.hpp"
#include "wpcn/heuristics.hpp"
#include "wpcn/model.hpp"

namespace wpcn::sim {

// Counter-based generator: the value at (seed, counter) is a fixed function of
// the pair, so a realization can be drawn without replaying earlier ones.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t key = mix64(seed);
  return mix64(key ^ mix64(counter + key));
}

/// Uniform in the open interval (0, 1).
inline double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
  return (static_cast<double>(counter_bits(seed, counter) >> 11) + 0.5) * 0x1.0p-53;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

struct SimConfig {
  std::size_t num_users = 5;
  std::vector<double> hap_power_db = {0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20};
  std::size_t num_realizations = 1000;
  std::uint64_t seed = 1;
  std::vector<SchedulingPolicy> scheduling = {SchedulingPolicy::as_given};
  std::vector<Scheme> schemes = {Scheme::stm_optimal, Scheme::stm_equal, Scheme::stm_fixed_tdma};
  Problem problem = Problem::stm;
  double demand = 1.0;
  double eta = 1.0;
  double noise_power = 1.0;
  double channel_mean = 1.0;
  unsigned threads = 1;

  void validate() const {
    if (num_users < 1) throw DomainError("sim: num_users must be >= 1");
    if (num_realizations < 1) throw DomainError("sim: num_realizations must be >= 1");
    if (hap_power_db.empty()) throw DomainError("sim: at least one HAP power point is required");
    for (double p : hap_power_db) {
      if (!std::isfinite(p)) throw DomainError("sim: sweep points must be finite");
    }
    if (scheduling.empty()) throw DomainError("sim: at least one scheduling policy is required");
    if (schemes.empty()) throw DomainError("sim: at least one scheme is required");
    for (Scheme s : schemes) {
      if (problem_of(s) != problem) {
        throw DomainError("sim: scheme " + std::string(to_string(s)) + " does not solve problem " +
                          std::string(to_string(problem)));
      }
    }
    if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("sim: eta must lie in (0, 1]");
    if (!(noise_power > 0.0)) throw DomainError("sim: noise_power must be > 0");
    if (!(channel_mean > 0.0)) throw DomainError("sim: channel_mean must be > 0");
    if (problem == Problem::ttm && !(demand > 0.0)) throw DomainError("sim: demand must be > 0");
  }
};

struct SweepRow {
  double sweep_value = 0.0;
  Scheme scheme = Scheme::stm_optimal;
  SchedulingPolicy policy = SchedulingPolicy::as_given;
  double mean_objective = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;

  const SweepRow* find(double sweep_value, Scheme scheme, SchedulingPolicy policy) const {
    for (const SweepRow& r : rows) {
      if (r.sweep_value == sweep_value && r.scheme == scheme && r.policy == policy) return &r;
    }
    return nullptr;
  }
};

/// Rayleigh-fading gains for one realization: g_i and h_i are exponential
/// with mean channel_mean, drawn from counters r * K * 2 + 2i and + 2i + 1.
inline std::vector<UserChannel> draw_users(const SimConfig& config, std::size_t realization) {
  const std::size_t k = config.num_users;
  std::vector<UserChannel> users(k);
  const std::uint64_t base = static_cast<std::uint64_t>(realization) * k * 2;
  for (std::size_t i = 0; i < k; ++i) {
    const double ug = counter_uniform(config.seed, base + 2 * i);
    const double uh = counter_uniform(config.seed, base + 2 * i + 1);
    users[i].g = -config.channel_mean * std::log(ug);
    users[i].h = -config.channel_mean * std::log(uh);
    users[i].eta = config.eta;
    users[i].demand = config.problem == Problem::ttm ? config.demand : 0.0;
  }
  return users;
}

inline Instance draw_channels(const SimConfig& config, std::size_t realization,
                              double hap_power_db) {
  return Instance(draw_users(config, realization), db_to_linear(hap_power_db),
                  config.noise_power);
}

/// Uses the first configured HAP power point.
inline Instance draw_channels(const SimConfig& config, std::size_t realization) {
  return draw_channels(config, realization, config.hap_power_db.at(0));
}

/// Per-realization objectives of every (point, scheme, policy) cell.
struct ObjectiveSamples {
  std::size_t points = 0;
  std::size_t schemes = 0;
  std::size_t policies = 0;
  std::size_t realizations = 0;
  std::vector<double> data;

  std::size_t cell(std::size_t point, std::size_t scheme, std::size_t policy) const {
    return (point * schemes + scheme) * policies + policy;
  }
  std::span<const double> at(std::size_t point, std::size_t scheme, std::size_t policy) const {
    return std::span<const double>(data).subspan(cell(point, scheme, policy) * realizations,
                                                 realizations);
  }
};

/// Called once per evaluated cell with the drawn (unordered) instance.
using CellObserver = std::function<void(std::size_t point, std::size_t realization,
                                        SchedulingPolicy policy, Scheme scheme,
                                        const Instance& drawn)>;

/// Raised when a solver fails inside a sweep; names the failing cell.
class SimulationError : public Error {
 public:
  SimulationError(const std::string& msg, std::size_t realization, Scheme scheme)
      : Error(msg), realization_(realization), scheme_(scheme) {}
  std::size_t realization() const noexcept { return realization_; }
  Scheme scheme() const noexcept { return scheme_; }

 private:
  std::size_t realization_;
  Scheme scheme_;
};

/// Evaluates every cell. Realizations are split into contiguous blocks, one
/// per thread; each writes only its own slots, so the result does not depend
/// on the thread count. When the observer is set it may be called
/// concurrently from several threads.
inline ObjectiveSamples collect_objectives(const SimConfig& config,
                                           const CellObserver& observer = {}) {
  config.validate();
  ObjectiveSamples s;
  s.points = config.hap_power_db.size();
  s.schemes = config.schemes.size();
  s.policies = config.scheduling.size();
  s.realizations = config.num_realizations;
  s.data.assign(s.points * s.schemes * s.policies * s.realizations, 0.0);

  const unsigned threads =
      std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(s.realizations)));
  std::vector<std::exception_ptr> failures(threads);

  auto work = [&](unsigned t) {
    const std::size_t begin = s.realizations * t / threads;
    const std::size_t end = s.realizations * (t + 1) / threads;
    for (std::size_t r = begin; r < end; ++r) {
      const std::vector<UserChannel> users = draw_users(config, r);
      for (std::size_t p = 0; p < s.points; ++p) {
        const Instance drawn(users, db_to_linear(config.hap_power_db[p]), config.noise_power);
        for (std::size_t q = 0; q < s.policies; ++q) {
          const Instance ordered = scheduling_order(drawn, config.scheduling[q]);
          for (std::size_t m = 0; m < s.schemes; ++m) {
            const Scheme scheme = config.schemes[m];
            if (observer) observer(p, r, config.scheduling[q], scheme, drawn);
            try {
              s.data[s.cell(p, m, q) * s.realizations + r] = run_scheme_objective(scheme, ordered);
            } catch (const std::exception& e) {
              failures[t] = std::make_exception_ptr(SimulationError(
                  "realization " + std::to_string(r) + ", scheme " +
                      std::string(to_string(scheme)) + ": " + e.what(),
                  r, scheme));
              return;
            }
          }
        }
      }
    }
  };

  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (std::thread& th : pool) th.join();
  }
  // Report the failure with the smallest realization index.
  for (unsigned t = 0; t < threads; ++t) {
    if (failures[t]) std::rethrow_exception(failures[t]);
  }
  return s;
}

/// Pairwise summation over a fixed split, independent of thread layout.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

struct MeanStat {
  double mean = 0.0;
  double std_error = 0.0;
};

inline MeanStat mean_and_std_error(std::span<const double> v) {
  MeanStat m;
  const double n = static_cast<double>(v.size());
  if (v.empty()) return m;
  m.mean = pairwise_sum(v) / n;
  if (v.size() > 1) {
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m.mean) * (v[i] - m.mean);
    m.std_error = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
  }
  return m;
}

/// Rows are ordered by sweep point, then scheme, then policy.
inline SweepResult aggregate(const SimConfig& config, const ObjectiveSamples& s,
                             std::span<const double> sweep_values) {
  SweepResult res;
  for (std::size_t p = 0; p < s.points; ++p) {
    for (std::size_t m = 0; m < s.schemes; ++m) {
      for (std::size_t q = 0; q < s.policies; ++q) {
        const MeanStat st = mean_and_std_error(s.at(p, m, q));
        res.rows.push_back(SweepRow{sweep_values[p], config.schemes[m], config.scheduling[q],
                                    st.mean, st.std_error, s.realizations});
      }
    }
  }
  return res;
}

/// Monte-Carlo sweep over the configured HAP powers (sweep_value in dB).
/// Every scheme and policy sees the same channel draw for a given
/// realization index.
inline SweepResult run_sweep(const SimConfig& config) {
  const ObjectiveSamples s = collect_objectives(config);
  return aggregate(config, s, config.hap_power_db);
}

/// Sweep over the number of users at the first configured HAP power
/// (sweep_value = K).
inline SweepResult sweep_users(const SimConfig& config, std::span<const std::size_t> k_range) {
  if (k_range.empty()) throw DomainError("sweep_users: k_range must be nonempty");
  SweepResult out;
  for (std::size_t k : k_range) {
    SimConfig c = config;
    c.num_users = k;
    c.hap_power_db = {config.hap_power_db.at(0)};
    const ObjectiveSamples s = collect_objectives(c);
    const double value = static_cast<double>(k);
    SweepResult part = aggregate(c, s, std::span<const double>(&value, 1));
    out.rows.insert(out.rows.end(), part.rows.begin(), part.rows.end());
  }
  return out;
}

}  // namespace wpcn::sim
