#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "qbm/ising.hpp"

namespace qbm::support {

/// Complete-graph ZeroOne machine with parameters uniform on [-range, range].
inline BoltzmannMachine random_machine(Partition part, std::mt19937_64& rng, double range = 1.0) {
  Bounds loose;
  loose.enforced = false;
  auto bm = BoltzmannMachine::complete(part, Basis::ZeroOne, loose);
  std::uniform_real_distribution<double> u(-range, range);
  auto theta = bm.parameters();
  for (auto& t : theta) t = u(rng);
  bm.set_parameters(theta);
  return bm;
}

inline BoltzmannMachine random_machine(std::size_t nodes, std::mt19937_64& rng, double range = 1.0) {
  return random_machine(Partition{nodes, 0, 0}, rng, range);
}

/// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor)
inline double max_rel_error(const std::vector<double>& a, const std::vector<double>& b,
                            double floor = 1e-3) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

}  // namespace qbm::support
