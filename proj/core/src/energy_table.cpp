#include "qbm/energy_table.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "qbm/error.hpp"

namespace qbm {

EnergyTable::EnergyTable(const BoltzmannMachine& bm, std::size_t cap)
    : width_(bm.size()), basis_(bm.basis()) {
  if (width_ > cap || width_ >= 64) {
    throw CapacityError("cannot enumerate " + std::to_string(width_) +
                        " nodes (cap " + std::to_string(cap) + ")");
  }
  const std::size_t n = width_;
  const std::uint64_t count = std::uint64_t{1} << n;
  energies_.assign(count, 0.0);

  const double lo = basis_ == Basis::ZeroOne ? 0.0 : -1.0;
  const double step = 1.0 - lo;  // value change when a node goes lo -> 1
  const auto j = bm.coupling_matrix();
  const auto biases = bm.biases();

  std::vector<double> state(n, lo);
  std::vector<double> field(n);
  for (std::size_t k = 0; k < n; ++k) {
    double f = biases[k];
    for (std::size_t l = 0; l < n; ++l) f += j[k * n + l] * lo;
    field[k] = f;
  }
  double e = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    e += biases[k] * lo;
    for (std::size_t l = k + 1; l < n; ++l) e += j[k * n + l] * lo * lo;
  }
  energies_[0] = e;

  StateCode gray = 0;
  for (std::uint64_t t = 1; t < count; ++t) {
    const auto bit = static_cast<std::size_t>(std::countr_zero(t));
    const std::size_t node = n - 1 - bit;
    const double delta = state[node] == lo ? step : -step;
    e += delta * field[node];
    state[node] += delta;
    const double* row = &j[node * n];
    for (std::size_t l = 0; l < n; ++l) field[l] += row[l] * delta;
    gray ^= StateCode{1} << bit;
    energies_[gray] = e;
  }

  auto [mn, mx] = std::minmax_element(energies_.begin(), energies_.end());
  e_min_ = *mn;
  e_max_ = *mx;
}

std::vector<double> EnergyTable::boltzmann(double beta) const {
  std::vector<double> p(energies_.size());
  double z = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(-beta * (energies_[i] - e_min_));
    z += p[i];
  }
  for (auto& v : p) v /= z;
  return p;
}

double EnergyTable::log_partition(double beta) const {
  double z = 0.0;
  for (double e : energies_) z += std::exp(-beta * (e - e_min_));
  return std::log(z) - beta * e_min_;
}

Moments moments_from_table(std::span<const double> probs, std::size_t width) {
  if (probs.size() != (std::size_t{1} << width)) {
    throw InvalidArgument("probability table does not match width");
  }
  Moments m;
  m.width = width;
  m.mean.assign(width, 0.0);
  m.pair.assign(width * width, 0.0);
  std::vector<std::size_t> on;
  on.reserve(width);
  for (std::size_t code = 0; code < probs.size(); ++code) {
    const double p = probs[code];
    if (p == 0.0) continue;
    on.clear();
    for (auto c = static_cast<std::uint64_t>(code); c != 0; c &= c - 1) {
      on.push_back(width - 1 - static_cast<std::size_t>(std::countr_zero(c)));
    }
    for (std::size_t a = 0; a < on.size(); ++a) {
      const std::size_t ia = on[a];
      m.mean[ia] += p;
      for (std::size_t b = a + 1; b < on.size(); ++b) m.pair[ia * width + on[b]] += p;
    }
  }
  for (std::size_t i = 0; i < width; ++i) {
    m.pair[i * width + i] = m.mean[i];
    for (std::size_t k = i + 1; k < width; ++k) {
      const double v = m.pair[i * width + k] + m.pair[k * width + i];
      m.pair[i * width + k] = v;
      m.pair[k * width + i] = v;
    }
  }
  return m;
}

Moments exact_moments(const BoltzmannMachine& bm, double beta, std::size_t cap) {
  if (bm.basis() != Basis::ZeroOne) {
    throw InvalidArgument("moments are defined for ZeroOne machines");
  }
  EnergyTable table(bm, cap);
  const auto p = table.boltzmann(beta);
  return moments_from_table(p, bm.size());
}

}  // namespace qbm
