#pragma once

#include <random>

#include "qbm/ising.hpp"

inline qbm::BoltzmannMachine bench_machine(qbm::Partition part, std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  qbm::Bounds loose;
  loose.enforced = false;
  auto bm = qbm::BoltzmannMachine::complete(part, qbm::Basis::ZeroOne, loose);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto theta = bm.parameters();
  for (auto& t : theta) t = u(rng);
  bm.set_parameters(theta);
  return bm;
}
