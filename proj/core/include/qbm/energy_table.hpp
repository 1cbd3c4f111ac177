#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qbm/ising.hpp"

namespace qbm {

/// Energies of all 2^n states of a machine, indexed by StateCode.
///
/// Built once per parameter set (Gray-code walk, O(n) per state) and then
/// reused for any number of inverse temperatures.
class EnergyTable {
 public:
  explicit EnergyTable(const BoltzmannMachine& bm,
                       std::size_t cap = kDefaultEnumerationCap);

  std::size_t num_nodes() const noexcept { return width_; }
  std::size_t size() const noexcept { return energies_.size(); }
  Basis basis() const noexcept { return basis_; }
  std::span<const double> energies() const noexcept { return energies_; }
  double min() const noexcept { return e_min_; }
  double max() const noexcept { return e_max_; }

  /// Normalised p(s) = exp(-beta E(s)) / Z, indexed by StateCode.
  std::vector<double> boltzmann(double beta) const;
  /// ln Z(beta), evaluated with the minimum energy factored out.
  double log_partition(double beta) const;

 private:
  std::size_t width_ = 0;
  Basis basis_ = Basis::ZeroOne;
  std::vector<double> energies_;
  double e_min_ = 0.0;
  double e_max_ = 0.0;
};

/// First and second moments of a ZeroOne distribution over n nodes:
/// mean[i] = E[s_i], pair[i*n+j] = E[s_i s_j] (symmetric, diagonal = mean).
struct Moments {
  std::size_t width = 0;
  std::vector<double> mean;
  std::vector<double> pair;

  double second(std::size_t i, std::size_t j) const { return pair[i * width + j]; }
};

/// Moments of a probability vector indexed by StateCode.
Moments moments_from_table(std::span<const double> probs, std::size_t width);

/// Exact moments of the Boltzmann distribution of a ZeroOne machine.
Moments exact_moments(const BoltzmannMachine& bm, double beta,
                      std::size_t cap = kDefaultEnumerationCap);

}  // namespace qbm
