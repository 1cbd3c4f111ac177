#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qbm/ising.hpp"

namespace qbm {

/// Probability table over packed states of a fixed width.
///
/// Support is kept sorted and duplicate-free; states outside the support
/// have probability zero.
class Distribution {
 public:
  Distribution() = default;
  /// Throws InvalidArgument on negative mass, duplicates, or total mass
  /// differing from 1 by more than 1e-9.
  Distribution(std::size_t width, std::vector<StateCode> support,
               std::vector<double> probs);

  /// Full table over all 2^width codes.
  static Distribution dense(std::size_t width, std::vector<double> probs);
  static Distribution uniform(std::size_t width);

  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return support_.size(); }
  const std::vector<StateCode>& support() const noexcept { return support_; }
  const std::vector<double>& probs() const noexcept { return probs_; }

  double probability(StateCode code) const;
  double probability(std::span<const std::int8_t> values,
                     Basis basis = Basis::ZeroOne) const;

 private:
  std::size_t width_ = 0;
  std::vector<StateCode> support_;
  std::vector<double> probs_;
};

/// Projects packed states of width `width` onto the listed nodes (in order).
StateCode project_code(StateCode code, std::size_t width,
                       std::span<const std::size_t> nodes);

/// Marginal of a dense probability table onto `nodes`.
Distribution marginalize(std::span<const double> table, std::size_t width,
                         std::span<const std::size_t> nodes);

}  // namespace qbm
