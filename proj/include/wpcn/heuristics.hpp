#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "wpcn/error.hpp"
#include "wpcn/model.hpp"
#include "wpcn/stm.hpp"
#include "wpcn/ttm.hpp"

namespace wpcn {

enum class Problem { stm, ttm };

enum class Scheme { stm_optimal, stm_equal, stm_fixed_tdma, ttm_optimal, ttm_equal, ttm_tangent };

inline std::string_view to_string(Problem p) { return p == Problem::stm ? "stm" : "ttm"; }

inline Problem parse_problem(std::string_view s) {
  if (s == "stm") return Problem::stm;
  if (s == "ttm") return Problem::ttm;
  throw DomainError("unknown problem '" + std::string(s) + "'");
}

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::stm_optimal: return "stm-optimal";
    case Scheme::stm_equal: return "stm-equal";
    case Scheme::stm_fixed_tdma: return "stm-fixed-tdma";
    case Scheme::ttm_optimal: return "ttm-optimal";
    case Scheme::ttm_equal: return "ttm-equal";
    case Scheme::ttm_tangent: return "ttm-tangent";
  }
  return "?";
}

inline Scheme parse_scheme(std::string_view s) {
  for (Scheme c : {Scheme::stm_optimal, Scheme::stm_equal, Scheme::stm_fixed_tdma,
                   Scheme::ttm_optimal, Scheme::ttm_equal, Scheme::ttm_tangent}) {
    if (s == to_string(c)) return c;
  }
  throw DomainError("unknown scheme '" + std::string(s) + "'");
}

inline Problem problem_of(Scheme s) {
  switch (s) {
    case Scheme::stm_optimal:
    case Scheme::stm_equal:
    case Scheme::stm_fixed_tdma: return Problem::stm;
    default: return Problem::ttm;
  }
}

/// Result of a suboptimal scheme. `objective` is throughput in nats for the
/// sum-throughput schemes and total time for the total-time schemes.
struct HeuristicResult {
  TimeAllocation allocation;
  double objective = 0.0;
  Scheme scheme = Scheme::stm_equal;
};

namespace heuristics {

/// Every slot, including the charging slot, gets 1/(K+1).
inline HeuristicResult stm_equal(const Instance& inst) {
  const std::size_t k = inst.size();
  std::vector<double> tau(k + 1, 1.0 / static_cast<double>(k + 1));
  const std::vector<double> g = effective_snr(inst);
  const double obj = total_throughput(g, tau);
  return {TimeAllocation(std::move(tau)), obj, Scheme::stm_equal};
}

/// Throughput of the fixed-TDMA family: tau_i = (1 - tau_0)/K for i >= 1.
inline double fixed_tdma_objective(std::span<const double> gammas, double tau0) {
  const double k = static_cast<double>(gammas.size());
  const double s = 1.0 - tau0;
  if (s <= 0.0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    const double r = k * tau0 / s + static_cast<double>(i);
    total += s / k * std::log1p(gammas[i] * r);
  }
  return total;
}

/// d/dtau_0 of fixed_tdma_objective. With s = 1 - tau_0 and
/// r_i = K tau_0 / s + (i - 1), each user contributes
///   -ln(1 + g_i r_i) / K + g_i / (s (1 + g_i r_i)).
inline double fixed_tdma_slope(std::span<const double> gammas, double tau0) {
  const double k = static_cast<double>(gammas.size());
  const double s = 1.0 - tau0;
  double d = 0.0;
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    const double gr = gammas[i] * (k * tau0 / s + static_cast<double>(i));
    d += -std::log1p(gr) / k + gammas[i] / (s * (1.0 + gr));
  }
  return d;
}

/// Equal user slots with the charging slot optimized. The objective is
/// concave in tau_0 with positive slope at 0 and slope -> -inf at 1, so the
/// maximizer is the unique zero of the slope, found by bisection.
inline HeuristicResult stm_fixed_tdma(const Instance& inst) {
  const std::vector<double> g = effective_snr(inst);
  const std::size_t k = g.size();
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (fixed_tdma_slope(g, mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double tau0 = 0.5 * (lo + hi);
  std::vector<double> tau(k + 1, (1.0 - tau0) / static_cast<double>(k));
  tau[0] = tau0;
  const double obj = total_throughput(g, tau);
  return {TimeAllocation(std::move(tau)), obj, Scheme::stm_fixed_tdma};
}

/// All K+1 slots equal to tau_0 = max_i D_i / ln(1 + i gamma_i).
inline HeuristicResult ttm_equal(const Instance& inst) {
  const std::vector<double> g = effective_snr(inst);
  const std::vector<double> d = inst.demands();
  double tau0 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    ttm::detail::check_user(g[i], d[i], "ttm_equal");
    tau0 = std::max(tau0, d[i] / std::log1p(static_cast<double>(i + 1) * g[i]));
  }
  std::vector<double> tau(g.size() + 1, tau0);
  return {TimeAllocation(std::move(tau)), static_cast<double>(g.size() + 1) * tau0,
          Scheme::ttm_equal};
}

/// Every user transmits for its tangent length tau_i^m; tau_0 is the least
/// charging time meeting every demand. Each constraint reads
/// tau_0 + sum_{j<i} tau_j^m >= V_i(tau_i^m) = C_i^m - tau_i^m, so tau_0 is
/// the largest deficit.
inline HeuristicResult ttm_tangent(const Instance& inst) {
  const std::vector<double> g = effective_snr(inst);
  const std::vector<double> d = inst.demands();
  std::vector<double> tau(g.size() + 1, 0.0);
  double before = 0.0;
  double tau0 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const ttm::TangentPoint tp = ttm::tangent_point(g[i], d[i]);
    tau[i + 1] = tp.tau_m;
    tau0 = std::max(tau0, (tp.c_m - tp.tau_m) - before);
    before += tp.tau_m;
  }
  tau[0] = tau0;
  const double total = tau0 + before;
  return {TimeAllocation(std::move(tau)), total, Scheme::ttm_tangent};
}

}  // namespace heuristics

inline double run_scheme_objective(Scheme s, const Instance& inst) {
  switch (s) {
    case Scheme::stm_optimal: return stm::solve_stm(inst).total_throughput;
    case Scheme::stm_equal: return heuristics::stm_equal(inst).objective;
    case Scheme::stm_fixed_tdma: return heuristics::stm_fixed_tdma(inst).objective;
    case Scheme::ttm_optimal: return ttm::solve_ttm(inst).total_time;
    case Scheme::ttm_equal: return heuristics::ttm_equal(inst).objective;
    case Scheme::ttm_tangent: return heuristics::ttm_tangent(inst).objective;
  }
  return 0.0;
}

}  // namespace wpcn
