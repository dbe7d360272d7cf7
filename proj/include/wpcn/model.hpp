#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wpcn/error.hpp"

namespace wpcn {

/// Physical parameters of one energy-harvesting user.
struct UserChannel {
  double g = 1.0;       ///< downlink (HAP -> user) channel power gain
  double h = 1.0;       ///< uplink (user -> HAP) channel power gain
  double eta = 1.0;     ///< harvesting efficiency in (0, 1]
  double demand = 0.0;  ///< minimum data per cycle in nats (total-time problem)
};

/// Users in TDMA transmission order plus the HAP transmit power and the
/// receiver noise power, both linear.
class Instance {
 public:
  Instance(std::vector<UserChannel> users, double hap_power, double noise_power)
      : users_(std::move(users)), hap_power_(hap_power), noise_power_(noise_power) {
    validate();
  }

  /// Builds an instance whose effective SNRs equal `gammas` exactly
  /// (g = gamma, h = eta = P_H = sigma^2 = 1). Demands default to zero.
  static Instance from_gammas(std::span<const double> gammas,
                              std::span<const double> demands = {}) {
    if (!demands.empty() && demands.size() != gammas.size()) {
      throw SizeError("from_gammas: demands and gammas differ in length");
    }
    std::vector<UserChannel> users(gammas.size());
    for (std::size_t i = 0; i < gammas.size(); ++i) {
      users[i].g = gammas[i];
      users[i].demand = demands.empty() ? 0.0 : demands[i];
    }
    return Instance(std::move(users), 1.0, 1.0);
  }

  const std::vector<UserChannel>& users() const noexcept { return users_; }
  std::size_t size() const noexcept { return users_.size(); }
  double hap_power() const noexcept { return hap_power_; }
  double noise_power() const noexcept { return noise_power_; }

  /// gamma_i = h_i eta_i g_i P_H / sigma^2
  double gamma(std::size_t i) const {
    const UserChannel& u = users_.at(i);
    return u.h * u.eta * u.g * hap_power_ / noise_power_;
  }

  std::vector<double> demands() const {
    std::vector<double> d(users_.size());
    std::transform(users_.begin(), users_.end(), d.begin(),
                   [](const UserChannel& u) { return u.demand; });
    return d;
  }

 private:
  void validate() const {
    if (users_.empty()) throw InvalidInstance("instance needs at least one user");
    if (!(hap_power_ > 0.0) || !std::isfinite(hap_power_)) {
      throw InvalidInstance("HAP power must be positive and finite");
    }
    if (!(noise_power_ > 0.0) || !std::isfinite(noise_power_)) {
      throw InvalidInstance("noise power must be positive and finite");
    }
    for (std::size_t i = 0; i < users_.size(); ++i) {
      const UserChannel& u = users_[i];
      const std::string who = "user " + std::to_string(i + 1);
      if (!(u.g > 0.0) || !std::isfinite(u.g)) throw InvalidInstance(who + ": g must be > 0");
      if (!(u.h > 0.0) || !std::isfinite(u.h)) throw InvalidInstance(who + ": h must be > 0");
      if (!(u.eta > 0.0) || u.eta > 1.0) throw InvalidInstance(who + ": eta must lie in (0, 1]");
      if (!(u.demand >= 0.0) || !std::isfinite(u.demand)) {
        throw InvalidInstance(who + ": demand must be >= 0");
      }
      const double g = gamma(i);
      if (!(g > 0.0) || !std::isfinite(g)) {
        throw InvalidInstance(who + ": effective SNR must be finite and > 0");
      }
    }
  }

  std::vector<UserChannel> users_;
  double hap_power_;
  double noise_power_;
};

/// Slot durations [tau_0, tau_1, ..., tau_K]; tau_0 is the initial charging
/// slot, tau_i the transmit slot of user i.
class TimeAllocation {
 public:
  TimeAllocation() = default;
  explicit TimeAllocation(std::vector<double> tau) : tau_(std::move(tau)) {
    for (double t : tau_) {
      if (!(t >= 0.0) || !std::isfinite(t)) {
        throw DomainError("time allocation entries must be finite and >= 0");
      }
    }
  }

  std::size_t size() const noexcept { return tau_.size(); }
  std::size_t user_count() const noexcept { return tau_.empty() ? 0 : tau_.size() - 1; }
  double operator[](std::size_t i) const { return tau_[i]; }
  std::span<const double> values() const noexcept { return tau_; }
  double total() const { return std::accumulate(tau_.begin(), tau_.end(), 0.0); }

  /// Rescales a unit-block allocation to a block of length `block`.
  TimeAllocation scaled(double block) const {
    std::vector<double> out(tau_);
    for (double& t : out) t *= block;
    return TimeAllocation(std::move(out));
  }

 private:
  std::vector<double> tau_;
};

/// Physical quantities of an allocation.
struct Evaluation {
  std::vector<double> per_user_energy;
  std::vector<double> per_user_power;
  std::vector<double> per_user_rate_nats;  ///< tau_i R_i
  double total_throughput = 0.0;
  std::vector<double> constraint_slack;    ///< tau_i R_i - D_i
};

enum class SchedulingPolicy { as_given, increasing_snr, decreasing_snr };

inline std::string_view to_string(SchedulingPolicy p) {
  switch (p) {
    case SchedulingPolicy::as_given: return "as-given";
    case SchedulingPolicy::increasing_snr: return "increasing-snr";
    case SchedulingPolicy::decreasing_snr: return "decreasing-snr";
  }
  return "?";
}

inline SchedulingPolicy parse_policy(std::string_view s) {
  if (s == "as-given") return SchedulingPolicy::as_given;
  if (s == "increasing-snr" || s == "increasing") return SchedulingPolicy::increasing_snr;
  if (s == "decreasing-snr" || s == "decreasing") return SchedulingPolicy::decreasing_snr;
  throw DomainError("unknown scheduling policy '" + std::string(s) + "'");
}

inline std::vector<double> effective_snr(const Instance& inst) {
  std::vector<double> out(inst.size());
  for (std::size_t i = 0; i < inst.size(); ++i) out[i] = inst.gamma(i);
  return out;
}

/// tau ln(1 + gamma S / tau), continuously extended by 0 at tau = 0.
inline double slot_throughput(double gamma, double harvest_time, double tau) {
  if (tau <= 0.0 || harvest_time <= 0.0) return 0.0;
  return tau * std::log1p(gamma * harvest_time / tau);
}

/// Sum throughput of `tau` (length K+1) for users with effective SNRs `gammas`.
inline double total_throughput(std::span<const double> gammas, std::span<const double> tau) {
  if (tau.size() != gammas.size() + 1) throw SizeError("allocation length must be K+1");
  double harvest = tau[0];
  double total = 0.0;
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    total += slot_throughput(gammas[i], harvest, tau[i + 1]);
    harvest += tau[i + 1];
  }
  return total;
}

inline Evaluation evaluate(const Instance& inst, const TimeAllocation& alloc) {
  const std::size_t k = inst.size();
  if (alloc.size() != k + 1) {
    throw SizeError("evaluate: allocation has " + std::to_string(alloc.size()) +
                    " entries, expected " + std::to_string(k + 1));
  }
  Evaluation ev;
  ev.per_user_energy.resize(k);
  ev.per_user_power.resize(k);
  ev.per_user_rate_nats.resize(k);
  ev.constraint_slack.resize(k);
  double harvest = alloc[0];
  for (std::size_t i = 0; i < k; ++i) {
    const UserChannel& u = inst.users()[i];
    const double tau = alloc[i + 1];
    ev.per_user_energy[i] = u.eta * u.g * inst.hap_power() * harvest;
    ev.per_user_power[i] = tau > 0.0 ? ev.per_user_energy[i] / tau : 0.0;
    ev.per_user_rate_nats[i] = slot_throughput(inst.gamma(i), harvest, tau);
    ev.constraint_slack[i] = ev.per_user_rate_nats[i] - u.demand;
    harvest += tau;
  }
  ev.total_throughput =
      std::accumulate(ev.per_user_rate_nats.begin(), ev.per_user_rate_nats.end(), 0.0);
  return ev;
}

/// Reorders users by effective SNR; ties keep their original order.
inline Instance scheduling_order(const Instance& inst, SchedulingPolicy policy) {
  if (policy == SchedulingPolicy::as_given || inst.size() < 2) return inst;
  std::vector<std::size_t> idx(inst.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const std::vector<double> g = effective_snr(inst);
  if (policy == SchedulingPolicy::increasing_snr) {
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return g[a] < g[b]; });
  } else {
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return g[a] > g[b]; });
  }
  std::vector<UserChannel> users;
  users.reserve(idx.size());
  for (std::size_t i : idx) users.push_back(inst.users()[i]);
  return Instance(std::move(users), inst.hap_power(), inst.noise_power());
}

}  // namespace wpcn
