#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wpcn/error.hpp"
#include "wpcn/model.hpp"

// Independent checks for the closed-form solvers. Nothing here calls into
// stm.hpp or ttm.hpp.

namespace wpcn::oracle {

struct KktDiagnostics {
  double lambda = 0.0;
  std::vector<double> stationarity_residuals;  ///< one per user
  double primal_feasibility = 0.0;             ///< sum(tau) - 1
  double complementary_slackness = 0.0;        ///< lambda (sum(tau) - 1)

  double max_abs_residual() const {
    double m = 0.0;
    for (double r : stationarity_residuals) m = std::max(m, std::fabs(r));
    return m;
  }
};

/// KKT residuals of the sum-throughput problem at an interior allocation.
/// With x_k = (tau_0 + ... + tau_{k-1}) / tau_k and t_k = g_k / (g_k x_k + 1):
///   lambda = sum_k t_k                (stationarity in tau_0)
///   r_i = B_i(x_i) + sum_{k>i} t_k - lambda   (stationarity in tau_i)
inline KktDiagnostics kkt_residuals(const Instance& inst, const TimeAllocation& alloc) {
  const std::size_t n = inst.size();
  if (alloc.size() != n + 1) throw SizeError("kkt_residuals: allocation length must be K+1");
  for (std::size_t i = 0; i <= n; ++i) {
    if (!(alloc[i] > 0.0)) throw DomainError("kkt_residuals: every slot must be > 0");
  }
  std::vector<double> x(n);
  std::vector<double> t(n);
  double prefix = alloc[0];
  for (std::size_t i = 0; i < n; ++i) {
    const double tau = alloc[i + 1];
    x[i] = prefix / tau;
    const double g = inst.gamma(i);
    t[i] = g / (g * x[i] + 1.0);
    prefix += tau;
  }
  KktDiagnostics d;
  d.lambda = std::accumulate(t.begin(), t.end(), 0.0);
  d.stationarity_residuals.resize(n);
  double later = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double g = inst.gamma(i);
    const double gx = g * x[i];
    const double b = std::log1p(gx) - gx / (1.0 + gx);
    d.stationarity_residuals[i] = b + later - d.lambda;
    later += t[i];
  }
  d.primal_feasibility = alloc.total() - 1.0;
  d.complementary_slackness = d.lambda * d.primal_feasibility;
  return d;
}

/// Gradient of the sum throughput with respect to [tau_0, ..., tau_K].
/// A zero user slot gets the finite surrogate obtained at tau = 1e-300.
inline std::vector<double> throughput_gradient(std::span<const double> gammas,
                                               std::span<const double> tau) {
  const std::size_t n = gammas.size();
  if (tau.size() != n + 1) throw SizeError("throughput_gradient: length must be K+1");
  std::vector<double> prefix(n);
  double s = tau[0];
  for (std::size_t i = 0; i < n; ++i) {
    prefix[i] = s;
    s += tau[i + 1];
  }
  // d T_i / d tau_m for m < i equals g_i tau_i / (tau_i + g_i S_i)
  std::vector<double> grad(n + 1, 0.0);
  double later = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double g = gammas[i];
    const double si = prefix[i];
    const double ti = std::max(tau[i + 1], 1e-300);
    double own = 0.0;
    if (si > 0.0) own = std::log1p(g * si / ti) - g * si / (ti + g * si);
    grad[i + 1] = own + later;
    later += (si > 0.0 || tau[i + 1] > 0.0) ? g * tau[i + 1] / (tau[i + 1] + g * si) : g;
  }
  grad[0] = later;
  return grad;
}

/// Euclidean projection onto {tau >= 0, sum tau = 1} by sort-and-threshold.
inline std::vector<double> project_onto_simplex(std::span<const double> v) {
  std::vector<double> sorted(v.begin(), v.end());
  std::stable_sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    cumulative += sorted[j];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) theta = candidate;
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(v[i] - theta, 0.0);
  // Absorb the rounding of the threshold into the largest entry so that the
  // entries sum to one.
  const double sum = std::accumulate(out.begin(), out.end(), 0.0);
  auto largest = std::max_element(out.begin(), out.end());
  *largest += 1.0 - sum;
  return out;
}

struct OracleResult {
  TimeAllocation allocation;
  double objective = 0.0;
};

namespace detail {

// Enumerates integer points (n_1..n_K) with n_i in [lo_i, hi_i] and calls
// visit(point). Odometer order keeps the traversal deterministic.
template <typename Visit>
void enumerate_box(std::span<const long> lo, std::span<const long> hi, Visit&& visit) {
  std::vector<long> p(lo.begin(), lo.end());
  if (p.empty()) return;
  while (true) {
    visit(std::span<const long>(p));
    std::size_t d = 0;
    while (d < p.size()) {
      if (++p[d] <= hi[d]) break;
      p[d] = lo[d];
      ++d;
    }
    if (d == p.size()) return;
  }
}

}  // namespace detail

/// Exhaustive search of the probability simplex for K <= 3. User slots are
/// gridded at `step`; tau_0 takes the remaining time, since the objective
/// increases in tau_0. A second pass at step/100 covers the cell around the
/// best point.
inline OracleResult stm_grid_oracle(const Instance& inst, double step) {
  const std::size_t n = inst.size();
  if (n > 3) throw SizeError("stm_grid_oracle: supports at most 3 users");
  if (!(step >= 1e-4 && step <= 1e-1)) throw DomainError("stm_grid_oracle: step outside [1e-4, 1e-1]");
  const std::vector<double> gammas = effective_snr(inst);

  std::vector<double> tau(n + 1);
  std::vector<double> best_tau;
  double best = -std::numeric_limits<double>::infinity();

  auto search = [&](double h, std::span<const double> origin, long half_width) {
    std::vector<long> lo(n);
    std::vector<long> hi(n);
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] = -half_width;
      hi[i] = half_width;
    }
    detail::enumerate_box(lo, hi, [&](std::span<const long> p) {
      double used = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double t = origin[i] + static_cast<double>(p[i]) * h;
        if (t < 0.0) return;
        tau[i + 1] = t;
        used += t;
      }
      if (used > 1.0 + 1e-12) return;
      tau[0] = std::max(0.0, 1.0 - used);
      const double v = total_throughput(gammas, tau);
      if (v > best) {
        best = v;
        best_tau = tau;
      }
    });
  };

  const long cells = static_cast<long>(std::llround(1.0 / step));
  const double coarse = 1.0 / static_cast<double>(cells);
  {
    std::vector<long> lo(n, 0);
    std::vector<long> hi(n, cells);
    detail::enumerate_box(lo, hi, [&](std::span<const long> p) {
      double used = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        tau[i + 1] = static_cast<double>(p[i]) * coarse;
        used += tau[i + 1];
      }
      if (used > 1.0 + 1e-12) return;
      tau[0] = std::max(0.0, 1.0 - used);
      const double v = total_throughput(gammas, tau);
      if (v > best) {
        best = v;
        best_tau = tau;
      }
    });
  }
  std::vector<double> centre(best_tau.begin() + 1, best_tau.end());
  search(coarse / 100.0, centre, 100);
  return {TimeAllocation(best_tau), best};
}

struct PgOptions {
  int max_iters = 20000;
  double tol = 1e-12;                       ///< stop when the step norm falls below
  std::optional<std::vector<double>> start;  ///< defaults to the equal-time point
  bool record_trace = false;
};

struct PgResult {
  TimeAllocation allocation;
  double objective = 0.0;
  int iterations = 0;
  std::vector<double> objective_trace;  ///< objective after each accepted step
};

/// Projected gradient ascent on the sum throughput over the unit simplex,
/// with Barzilai-Borwein step lengths and monotone Armijo backtracking.
/// Throws NonConvergenceError if the step norm never drops below tol.
inline PgResult stm_projected_gradient(const Instance& inst, const PgOptions& opt = {}) {
  const std::size_t n = inst.size();
  const std::vector<double> gammas = effective_snr(inst);
  std::vector<double> x = opt.start ? *opt.start : std::vector<double>(n + 1, 1.0 / (n + 1.0));
  if (x.size() != n + 1) throw SizeError("stm_projected_gradient: start must have K+1 entries");
  x = project_onto_simplex(x);

  double fx = total_throughput(gammas, x);
  std::vector<double> gx = throughput_gradient(gammas, x);
  double alpha = 1.0;
  PgResult res;
  if (opt.record_trace) res.objective_trace.push_back(fx);

  std::vector<double> trial(n + 1);
  for (int it = 1; it <= opt.max_iters; ++it) {
    std::vector<double> y;
    double fy = 0.0;
    double step_norm = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < 80; ++bt) {
      for (std::size_t i = 0; i <= n; ++i) trial[i] = x[i] + alpha * gx[i];
      y = project_onto_simplex(trial);
      fy = total_throughput(gammas, y);
      double ascent = 0.0;
      step_norm = 0.0;
      for (std::size_t i = 0; i <= n; ++i) {
        ascent += gx[i] * (y[i] - x[i]);
        step_norm += (y[i] - x[i]) * (y[i] - x[i]);
      }
      step_norm = std::sqrt(step_norm);
      if (fy >= fx + 1e-4 * ascent) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted || step_norm <= opt.tol) {
      // No further progress at machine precision; x is the answer.
      if (accepted && fy >= fx) {
        x = y;
        fx = fy;
      }
      res.allocation = TimeAllocation(x);
      res.objective = fx;
      res.iterations = it;
      return res;
    }
    std::vector<double> gy = throughput_gradient(gammas, y);
    double ss = 0.0;
    double sg = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      const double s = y[i] - x[i];
      ss += s * s;
      sg += s * (gy[i] - gx[i]);
    }
    alpha = sg < 0.0 ? std::clamp(ss / -sg, 1e-12, 1e6) : std::min(alpha * 2.0, 1e6);
    x = std::move(y);
    fx = fy;
    gx = std::move(gy);
    if (opt.record_trace) res.objective_trace.push_back(fx);
  }
  throw NonConvergenceError("stm_projected_gradient: no convergence after " +
                            std::to_string(opt.max_iters) + " iterations");
}

namespace detail {

// Least tau_0 meeting every demand for fixed user slots; +inf if some slot is
// so short that V overflows (such a point lies far outside any useful box).
inline double min_charging(std::span<const double> gammas, std::span<const double> demands,
                           std::span<const double> user_tau) {
  double before = 0.0;
  double need = 0.0;
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    const double u = demands[i] / user_tau[i];
    if (u > 700.0) return std::numeric_limits<double>::infinity();
    const double v = user_tau[i] / gammas[i] * std::expm1(u);
    need = std::max(need, v - before);
    before += user_tau[i];
  }
  return need;
}

}  // namespace detail

/// Grid search of the total-time problem for K <= 2. User slots are gridded
/// over (0, B] with B = 2 x (tangent-point heuristic total); for each grid
/// point the least feasible tau_0 follows in closed form because every
/// constraint is increasing in tau_0. Two refinement passes follow, ending
/// at step/100.
inline OracleResult ttm_grid_oracle(const Instance& inst, double step) {
  const std::size_t n = inst.size();
  if (n > 2) throw SizeError("ttm_grid_oracle: supports at most 2 users");
  if (!(step > 0.0)) throw DomainError("ttm_grid_oracle: step must be > 0");
  const std::vector<double> gammas = effective_snr(inst);
  const std::vector<double> demands = inst.demands();
  for (double d : demands) {
    if (!(d > 0.0)) throw InvalidInstance("ttm_grid_oracle: demands must be > 0");
  }

  // Box bound: the tangent-point allocation is feasible, so the optimum
  // costs at most its total.
  double bound = 0.0;
  {
    double before = 0.0;
    double need = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      // Tangent slot from the first-order condition dV/dtau = -1, solved
      // here by bisection in u = D/tau: e^u (u - 1) + 1 = gamma.
      const double g = gammas[i];
      double lo = 0.0;
      double hi = 1.0;
      auto f = [&](double u) { return std::exp(u) * (u - 1.0) + 1.0 - g; };
      while (f(hi) < 0.0) hi *= 2.0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
      }
      const double tau_m = demands[i] / (0.5 * (lo + hi));
      const double v = tau_m / g * std::expm1(demands[i] / tau_m);
      need = std::max(need, v - before);
      before += tau_m;
    }
    bound = 2.0 * (need + before);
  }

  std::vector<double> user_tau(n);
  std::vector<double> best_tau;
  double best = std::numeric_limits<double>::infinity();
  auto consider = [&]() {
    const double t0 = detail::min_charging(gammas, demands, user_tau);
    if (!(t0 <= bound)) return;
    double total = t0;
    for (double t : user_tau) total += t;
    if (total < best) {
      best = total;
      best_tau.assign(1, t0);
      best_tau.insert(best_tau.end(), user_tau.begin(), user_tau.end());
    }
  };

  // Coarse pass with V tabulated per coordinate.
  const long cells = static_cast<long>(std::floor(bound / step));
  std::vector<std::vector<double>> vtab(n, std::vector<double>(static_cast<std::size_t>(cells) + 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (long m = 1; m <= cells; ++m) {
      const double t = static_cast<double>(m) * step;
      const double u = demands[i] / t;
      vtab[i][static_cast<std::size_t>(m)] =
          u > 700.0 ? std::numeric_limits<double>::infinity() : t / gammas[i] * std::expm1(u);
    }
  }
  {
    std::vector<long> lo(n, 1);
    std::vector<long> hi(n, cells);
    detail::enumerate_box(lo, hi, [&](std::span<const long> p) {
      double before = 0.0;
      double t0 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        t0 = std::max(t0, vtab[i][static_cast<std::size_t>(p[i])] - before);
        before += static_cast<double>(p[i]) * step;
      }
      if (!(t0 <= bound)) return;
      const double total = t0 + before;
      if (total < best) {
        best = total;
        best_tau.assign(1, t0);
        for (std::size_t i = 0; i < n; ++i) best_tau.push_back(static_cast<double>(p[i]) * step);
      }
    });
  }
  if (best_tau.empty()) throw NonConvergenceError("ttm_grid_oracle: no feasible grid point");
  // Two zoom levels, each at a tenth of the previous step over +-20 of the
  // previous cells. The landscape has ridges where the binding constraint
  // changes, so the coarse minimizer can sit several cells from the optimum.
  double h = step;
  for (int level = 0; level < 2; ++level) {
    const std::vector<double> centre(best_tau.begin() + 1, best_tau.end());
    h /= 10.0;
    std::vector<long> lo(n, -200);
    std::vector<long> hi(n, 200);
    detail::enumerate_box(lo, hi, [&](std::span<const long> p) {
      for (std::size_t i = 0; i < n; ++i) {
        user_tau[i] = centre[i] + static_cast<double>(p[i]) * h;
        if (!(user_tau[i] > 0.0)) return;
      }
      consider();
    });
  }
  return {TimeAllocation(best_tau), best};
}

}  // namespace wpcn::oracle
