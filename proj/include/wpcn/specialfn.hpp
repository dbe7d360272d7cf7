#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "wpcn/error.hpp"

namespace wpcn {

inline constexpr double kE = 2.718281828459045235360287;
inline constexpr double kInvE = 0.367879441171442321595524;

/// Rounding slack accepted below the branch point -1/e before reporting a
/// domain error.
inline constexpr double kBranchClampWindow = 1e-15;

/// Largest argument accepted by the exponential helpers.
inline constexpr double kMaxExpArgument = 700.0;

namespace detail {

inline constexpr int kLambertMaxIterations = 50;

// Regular region of W0 starts here; below it the offset form is used.
inline constexpr double kNearBranchX = -0.25;
inline constexpr double kNearBranchDelta = kInvE + kNearBranchX;

// phi(q) = q e^q - (e^q - 1) = e * (w e^w + 1/e) with w = q - 1.
inline double branch_phi(double q) {
  if (std::fabs(q) < 0.5) {
    // sum_{n>=2} (n-1) q^n / n!
    double term = q;  // q^n / n! for n = 1
    double sum = 0.0;
    for (int n = 2; n < 40; ++n) {
      term *= q / n;
      const double add = (n - 1) * term;
      sum += add;
      if (std::fabs(add) <= 1e-18 * std::fabs(sum)) break;
    }
    return sum;
  }
  return q * std::exp(q) - std::expm1(q);
}

// Halley iteration on w e^w = x for x >= kNearBranchX.
inline double w0_regular(double x) {
  double w;
  if (x < 3.0) {
    const double l = std::log1p(x);
    w = l * (1.0 - std::log1p(l) / (2.0 + l));
  } else {
    const double l1 = std::log(x);
    const double l2 = std::log(l1);
    w = l1 - l2 + l2 / l1;
  }
  for (int it = 0; it < kLambertMaxIterations; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    const double step = f / denom;
    w -= step;
    if (std::fabs(step) <= 1e-15 * (1.0 + std::fabs(w))) break;
  }
  return w;
}

// Halley iteration in q = 1 + W(-1/e + delta) for small delta >= 0.
inline double w0_offset_near_branch(double delta) {
  if (delta <= 0.0) return 0.0;
  const double p = std::sqrt(2.0 * kE * delta);
  double q = p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 - p * 43.0 / 540.0)));
  for (int it = 0; it < kLambertMaxIterations; ++it) {
    const double eq = std::exp(q);
    const double f = branch_phi(q) * kInvE - delta;
    const double f1 = q * eq * kInvE;
    const double f2 = (1.0 + q) * eq * kInvE;
    const double step = f / (f1 - 0.5 * f * f2 / f1);
    q -= step;
    if (std::fabs(step) <= 1e-16 * q) break;
  }
  return q;
}

}  // namespace detail

/// Principal branch W0 of the Lambert W function: the w >= -1 solving
/// w e^w = x. Arguments up to kBranchClampWindow below -1/e are clamped.
inline double lambert_w0(double x) {
  if (!std::isfinite(x)) throw DomainError("lambert_w0: non-finite argument");
  if (x < -kInvE - kBranchClampWindow) {
    throw DomainError("lambert_w0: argument " + std::to_string(x) + " below -1/e");
  }
  if (x <= -kInvE) return -1.0;
  if (x == 0.0) return 0.0;
  if (x < detail::kNearBranchX) return detail::w0_offset_near_branch(x + kInvE) - 1.0;
  return detail::w0_regular(x);
}

/// 1 + W0(-1/e + delta), evaluated without forming -1/e + delta, so the
/// result keeps full relative precision as delta -> 0. Used whenever a
/// caller can write its argument's distance from the branch point exactly.
inline double lambert_w0_branch_offset(double delta) {
  if (!std::isfinite(delta)) throw DomainError("lambert_w0_branch_offset: non-finite argument");
  if (delta < -kBranchClampWindow) {
    throw DomainError("lambert_w0_branch_offset: negative offset " + std::to_string(delta));
  }
  if (delta < detail::kNearBranchDelta) return detail::w0_offset_near_branch(delta);
  return detail::w0_regular(delta - kInvE) + 1.0;
}

/// e^x - 1 with full relative precision near zero. Throws OverflowError for
/// x > 700 instead of returning a huge or infinite value.
inline double expm1_safe(double x) {
  if (!std::isfinite(x)) throw DomainError("expm1_safe: non-finite argument");
  if (x > kMaxExpArgument) throw OverflowError("expm1_safe: argument exceeds 700");
  return std::expm1(x);
}

}  // namespace wpcn
