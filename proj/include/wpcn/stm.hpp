#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wpcn/error.hpp"
#include "wpcn/model.hpp"
#include "wpcn/specialfn.hpp"

// Sum-throughput maximization over a unit block.
//
// With x_i = (tau_0 + ... + tau_{i-1}) / tau_i the stationarity conditions
// decouple into F_i(x_i) = c_i, where
//   B_i(x) = ln(1 + g x) - g x / (1 + g x)
//   F_i(x) = B_i(x) - g / (1 + g x)
//   c_1 = 0,  c_{i+1} = c_i + g_i / (g_i x_i + 1).
// Each x_i has a closed form through W0, so a forward pass yields every x_i
// and a backward pass turns the ratios into slot lengths summing to one.

namespace wpcn::stm {

/// Forward-pass state. x has K entries; c has K+1 (c[0] = c_1 = 0 and
/// c[K] = c_{K+1}, which is what appending a user needs).
struct StmIntermediates {
  std::vector<double> x;
  std::vector<double> c;
};

struct StmSolution {
  TimeAllocation allocation;
  double total_throughput = 0.0;
  StmIntermediates intermediates;
  std::vector<double> gammas;
};

inline constexpr double kBalanceTolerance = 1e-10;

/// B(x) = ln(1 + gamma x) - gamma x / (1 + gamma x)
inline double marginal_rate(double gamma, double x) {
  const double gx = gamma * x;
  return std::log1p(gx) - gx / (1.0 + gx);
}

/// F(x) = B(x) - gamma / (1 + gamma x); strictly increasing in x > 0.
inline double balance(double gamma, double x) {
  const double gx = gamma * x;
  return std::log1p(gx) - (gx + gamma) / (1.0 + gx);
}

/// Solves F(x) = c for x > 0:
///   x = (exp(W((gamma - 1) / e^{c+1}) + c + 1) - 1) / gamma.
/// The W argument sits (1 - e^{-c} + gamma e^{-c}) / e above the branch
/// point, which is passed to W directly to keep precision for small gamma.
inline double solve_x(double gamma, double c) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidInstance("solve_x: gamma must be > 0");
  if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("solve_x: c must be >= 0");
  const double emc = std::exp(-c);
  const double offset = (-std::expm1(-c) + gamma * emc) * kInvE;
  const double q = lambert_w0_branch_offset(offset);
  double x = std::expm1(q + c) / gamma;

  // Postcondition on F; polish with Newton if W lost accuracy.
  double r = balance(gamma, x) - c;
  for (int it = 0; it < 4 && std::fabs(r) > kBalanceTolerance; ++it) {
    const double gx = gamma * x;
    const double slope = gamma * gamma * (x + 1.0) / ((1.0 + gx) * (1.0 + gx));
    x -= r / slope;
    r = balance(gamma, x) - c;
  }
  if (!(x > 0.0) || std::fabs(r) > kBalanceTolerance) {
    throw NonConvergenceError("solve_x: balance residual " + std::to_string(r) +
                              " for gamma=" + std::to_string(gamma) +
                              " c=" + std::to_string(c));
  }
  return x;
}

namespace detail {

inline void require_positive(std::span<const double> gammas) {
  if (gammas.empty()) throw InvalidInstance("solve_stm: at least one user is required");
  for (double g : gammas) {
    if (!(g > 0.0) || !std::isfinite(g)) {
      throw InvalidInstance("solve_stm: effective SNR must be finite and > 0");
    }
  }
}

// tau_K = 1/(1+x_K); tau_i = (1 - sum_{j>i} tau_j)/(1+x_i); tau_0 = remainder.
inline std::vector<double> backward_pass(std::span<const double> x) {
  const std::size_t k = x.size();
  std::vector<double> tau(k + 1);
  double remainder = 1.0;
  for (std::size_t i = k; i >= 1; --i) {
    tau[i] = remainder / (1.0 + x[i - 1]);
    remainder -= tau[i];
  }
  tau[0] = remainder;
  return tau;
}

inline StmSolution finish(std::vector<double> gammas, StmIntermediates inter) {
  std::vector<double> tau = backward_pass(inter.x);
  const double total = total_throughput(gammas, tau);
  return StmSolution{TimeAllocation(std::move(tau)), total, std::move(inter), std::move(gammas)};
}

}  // namespace detail

/// Optimal unit-block allocation for users with effective SNRs `gammas`.
inline StmSolution solve_stm(std::vector<double> gammas) {
  detail::require_positive(gammas);
  StmIntermediates inter;
  inter.x.reserve(gammas.size());
  inter.c.reserve(gammas.size() + 1);
  double c = 0.0;
  inter.c.push_back(c);
  for (double g : gammas) {
    const double x = solve_x(g, c);
    inter.x.push_back(x);
    c += g / (g * x + 1.0);
    inter.c.push_back(c);
  }
  return detail::finish(std::move(gammas), std::move(inter));
}

inline StmSolution solve_stm(const Instance& inst) { return solve_stm(effective_snr(inst)); }

/// Optimal allocation for a block of length `block`; the objective is
/// positively homogeneous so the unit solution is rescaled.
inline StmSolution solve_stm(const Instance& inst, double block) {
  if (!(block > 0.0)) throw DomainError("solve_stm: block length must be > 0");
  StmSolution sol = solve_stm(inst);
  sol.allocation = sol.allocation.scaled(block);
  sol.total_throughput *= block;
  return sol;
}

/// Appends a user at the end of the transmission order. Only one forward
/// step is taken; the stored x_1..x_K are reused and the backward pass is
/// rerun.
inline StmSolution incremental_user_extension(const StmSolution& sol, double new_user_gamma) {
  const StmIntermediates& prev = sol.intermediates;
  if (prev.x.size() != sol.gammas.size() || prev.c.size() != prev.x.size() + 1) {
    throw SizeError("incremental_user_extension: inconsistent intermediates");
  }
  if (!(new_user_gamma > 0.0) || !std::isfinite(new_user_gamma)) {
    throw InvalidInstance("incremental_user_extension: gamma must be > 0");
  }
  StmIntermediates inter = prev;
  const double c = inter.c.back();
  const double x = solve_x(new_user_gamma, c);
  inter.x.push_back(x);
  inter.c.push_back(c + new_user_gamma / (new_user_gamma * x + 1.0));
  std::vector<double> gammas = sol.gammas;
  gammas.push_back(new_user_gamma);
  return detail::finish(std::move(gammas), std::move(inter));
}

}  // namespace wpcn::stm
