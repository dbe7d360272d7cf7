// Sum-throughput versus HAP power for the optimal and equal-time schemes,
// plus one single-instance solve of each problem.

#include <iostream>

#include "wpcn/wpcn.hpp"

int main() {
  using namespace wpcn;

  const Instance inst = Instance::from_gammas(std::vector<double>{0.5, 2.0, 8.0},
                                              std::vector<double>{1.0, 1.0, 1.0});
  const stm::StmSolution s = stm::solve_stm(inst);
  std::cout << "sum throughput " << s.total_throughput << " nats, tau =";
  for (double t : s.allocation.values()) std::cout << ' ' << t;
  std::cout << '\n';

  const ttm::TtmSolution t = ttm::solve_ttm(inst);
  std::cout << "total time " << t.total_time << " (pivot user " << t.pivot_k << ")\n\n";

  sim::SimConfig cfg;
  cfg.num_users = 5;
  cfg.hap_power_db = {0, 10, 20};
  cfg.num_realizations = 200;
  cfg.schemes = {Scheme::stm_optimal, Scheme::stm_equal};
  io::write_sweep_csv(std::cout, sim::run_sweep(cfg), io::RateUnit::bits);
}
