#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wpcn/error.hpp"
#include "wpcn/model.hpp"
#include "wpcn/specialfn.hpp"

// Total-time minimization.
//
// User i's demand constraint is equivalent to
//   C_{i-1} >= V_i(tau_i) = (tau_i / gamma_i) (e^{D_i / tau_i} - 1),
// where C_i = tau_0 + ... + tau_i is the completion time of user i. V_i is
// strictly decreasing; the line C_{i-1} = C_i - tau_i touches it once, at the
// tangent point (tau_i^m, C_i^m), which is the smallest completion time user i
// can achieve. The solver anchors the largest feasible user k at its tangent
// point, walks backward along smaller roots, and forward along the unique
// roots of V_i(tau_i) = C_{i-1}.
//
// All root finding works in u = D / tau so that e^{D/tau} never overflows.

namespace wpcn::ttm {

struct TangentPoint {
  double tau_m = 0.0;
  double c_m = 0.0;
};

struct TtmGeometry {
  std::vector<double> tau_m;       ///< per user
  std::vector<double> c_m;         ///< per user
  std::vector<double> completion;  ///< C_1..C_K of the returned allocation
};

struct TtmSolution {
  TimeAllocation allocation;
  double total_time = 0.0;
  std::size_t pivot_k = 0;  ///< 1-based index of the anchored user
  TtmGeometry geometry;
};

inline constexpr double kTangencyTolerance = 1e-12;
inline constexpr double kRootRelativeTolerance = 1e-13;
inline constexpr int kRootMaxIterations = 200;

namespace detail {

inline void check_user(double gamma, double demand, const char* who) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InvalidInstance(std::string(who) + ": gamma must be finite and > 0");
  }
  if (!(demand > 0.0) || !std::isfinite(demand)) {
    throw InvalidInstance(std::string(who) + ": demand must be finite and > 0");
  }
}

inline bool near_tangent(double completion, double c_m) {
  return std::fabs(completion - c_m) <= kTangencyTolerance * std::max(1.0, c_m);
}

// Bisection on an increasing-sign function: h(lo) <= 0 < h(hi).
template <typename H>
double bisect_u(H&& h, double lo, double hi) {
  for (int it = 0; it < kRootMaxIterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (h(mid) <= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= kRootRelativeTolerance * hi) break;
  }
  return 0.5 * (lo + hi);
}

template <typename H>
double expand_until_positive(H&& h, double start) {
  double hi = start;
  for (int it = 0; it < 2000 && h(hi) <= 0.0; ++it) hi *= 2.0;
  if (h(hi) <= 0.0) throw NonConvergenceError("ttm: failed to bracket root");
  return hi;
}

}  // namespace detail

/// V(tau) = (tau / gamma) (e^{D / tau} - 1); throws OverflowError when
/// D / tau > 700.
inline double v_curve(double gamma, double demand, double tau) {
  detail::check_user(gamma, demand, "v_curve");
  if (!(tau > 0.0)) throw DomainError("v_curve: tau must be > 0");
  return tau / gamma * expm1_safe(demand / tau);
}

/// dV/dtau = (e^u - 1 - u e^u) / gamma with u = D/tau. The numerator is
/// summed as -sum_{n>=2} (n-1) u^n / n! for small u, where the direct form
/// cancels.
inline double v_curve_slope(double gamma, double demand, double tau) {
  detail::check_user(gamma, demand, "v_curve_slope");
  if (!(tau > 0.0)) throw DomainError("v_curve_slope: tau must be > 0");
  const double u = demand / tau;
  if (u > kMaxExpArgument) throw OverflowError("v_curve_slope: D/tau exceeds 700");
  if (u >= 0.5) return (std::expm1(u) - u * std::exp(u)) / gamma;
  double term = u;  // u^n / n!
  double sum = 0.0;
  for (int n = 2; n < 40; ++n) {
    term *= u / n;
    sum += (n - 1) * term;
    if ((n - 1) * term <= 1e-17 * sum) break;
  }
  return -sum / gamma;
}

/// tau^m = D / (W((gamma-1)/e) + 1),  C^m = (D / gamma) e^{W((gamma-1)/e) + 1}.
/// (gamma-1)/e lies gamma/e above the branch point.
inline TangentPoint tangent_point(double gamma, double demand) {
  detail::check_user(gamma, demand, "tangent_point");
  const double q = lambert_w0_branch_offset(gamma * kInvE);
  return TangentPoint{demand / q, demand / gamma * std::exp(q)};
}

/// Smaller root tau' in (0, tau^m] of V(tau) = completion - tau.
/// In u = D/tau this is the root of u = ln(1 + gamma (C u - D) / D) above u^m.
inline double root_smaller(double gamma, double demand, double completion) {
  const TangentPoint tp = tangent_point(gamma, demand);
  if (detail::near_tangent(completion, tp.c_m)) return tp.tau_m;
  if (completion < tp.c_m) {
    throw NoIntersectionError("root_smaller: completion " + std::to_string(completion) +
                              " below tangent value " + std::to_string(tp.c_m));
  }
  const double a = gamma / demand;
  auto h = [&](double u) { return u - std::log1p(a * (completion * u - demand)); };
  const double u_m = demand / tp.tau_m;
  const double hi = detail::expand_until_positive(h, 2.0 * u_m);
  return demand / detail::bisect_u(h, u_m, hi);
}

/// The unique tau with V(tau) = prior_completion, i.e. the root of
/// u = ln(1 + gamma C u / D) in u > 0. Requires prior_completion > D/gamma.
inline double root_unique(double gamma, double demand, double prior_completion) {
  detail::check_user(gamma, demand, "root_unique");
  if (!(prior_completion > demand / gamma)) {
    throw InfeasibleError("root_unique: completion " + std::to_string(prior_completion) +
                          " does not exceed D/gamma = " + std::to_string(demand / gamma));
  }
  const double a = gamma * prior_completion / demand;
  auto h = [&](double u) { return u - std::log1p(a * u); };
  const double hi = detail::expand_until_positive(h, 1.0);
  return demand / detail::bisect_u(h, 0.0, hi);
}

namespace detail {

struct Problem {
  std::vector<double> gammas;
  std::vector<double> demands;
  std::vector<TangentPoint> tangents;
};

inline Problem prepare(const Instance& inst) {
  Problem p;
  p.gammas = effective_snr(inst);
  p.demands = inst.demands();
  p.tangents.reserve(inst.size());
  for (std::size_t i = 0; i < inst.size(); ++i) {
    check_user(p.gammas[i], p.demands[i], "solve_ttm");
    p.tangents.push_back(tangent_point(p.gammas[i], p.demands[i]));
  }
  return p;
}

// Anchors user k (1-based) at its tangent point and fills users k-1..1 by
// smaller roots. Writes tau[1..k] and completion[0..k-1]; returns false as
// soon as some C_i falls below C_i^m.
inline bool backward_chain(const Problem& p, std::size_t k, std::vector<double>& tau,
                           std::vector<double>& completion) {
  tau[k] = p.tangents[k - 1].tau_m;
  completion[k - 1] = p.tangents[k - 1].c_m;
  double c = p.tangents[k - 1].c_m - p.tangents[k - 1].tau_m;
  for (std::size_t i = k - 1; i >= 1; --i) {
    const TangentPoint& tp = p.tangents[i - 1];
    if (c < tp.c_m && !near_tangent(c, tp.c_m)) return false;
    completion[i - 1] = c;
    tau[i] = root_smaller(p.gammas[i - 1], p.demands[i - 1], c);
    c -= tau[i];
  }
  tau[0] = c;
  return true;
}

}  // namespace detail

/// Largest user index k whose tangent point admits a feasible backward
/// chain. k = 1 always qualifies.
inline std::size_t find_pivot_k(const Instance& inst) {
  const detail::Problem p = detail::prepare(inst);
  std::vector<double> tau(inst.size() + 1);
  std::vector<double> completion(inst.size());
  for (std::size_t k = inst.size(); k >= 2; --k) {
    if (detail::backward_chain(p, k, tau, completion)) return k;
  }
  return 1;
}

inline TtmGeometry geometry(const Instance& inst) {
  const detail::Problem p = detail::prepare(inst);
  TtmGeometry g;
  for (const TangentPoint& tp : p.tangents) {
    g.tau_m.push_back(tp.tau_m);
    g.c_m.push_back(tp.c_m);
  }
  return g;
}

/// Minimum-total-time allocation. When several optima exist, the one with
/// the smallest slots before the pivot is returned.
inline TtmSolution solve_ttm(const Instance& inst) {
  const detail::Problem p = detail::prepare(inst);
  const std::size_t n = inst.size();
  std::vector<double> tau(n + 1);
  std::vector<double> completion(n);

  std::size_t pivot = 1;
  for (std::size_t k = n; k >= 2; --k) {
    if (detail::backward_chain(p, k, tau, completion)) {
      pivot = k;
      break;
    }
  }
  if (pivot == 1) detail::backward_chain(p, 1, tau, completion);

  for (std::size_t i = pivot + 1; i <= n; ++i) {
    tau[i] = root_unique(p.gammas[i - 1], p.demands[i - 1], completion[i - 2]);
    completion[i - 1] = completion[i - 2] + tau[i];
  }

  TtmSolution sol;
  sol.total_time = completion[n - 1];
  sol.allocation = TimeAllocation(std::move(tau));
  sol.pivot_k = pivot;
  for (const TangentPoint& tp : p.tangents) {
    sol.geometry.tau_m.push_back(tp.tau_m);
    sol.geometry.c_m.push_back(tp.c_m);
  }
  sol.geometry.completion = std::move(completion);
  return sol;
}

}  // namespace wpcn::ttm
