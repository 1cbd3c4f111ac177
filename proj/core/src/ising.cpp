#include "qbm/ising.hpp"

#include <algorithm>
#include <cmath>

#include "qbm/energy_table.hpp"
#include "qbm/error.hpp"

namespace qbm {

std::string_view to_string(Basis basis) {
  return basis == Basis::ZeroOne ? "01" : "pm1";
}

Basis parse_basis(std::string_view text) {
  if (text == "01" || text == "zero_one") return Basis::ZeroOne;
  if (text == "pm1" || text == "plus_minus") return Basis::PlusMinus;
  throw InvalidArgument("unknown basis '" + std::string(text) + "'");
}

namespace {

bool in_alphabet(std::int8_t v, Basis basis) {
  return basis == Basis::ZeroOne ? (v == 0 || v == 1) : (v == -1 || v == 1);
}

std::int8_t low_value(Basis basis) { return basis == Basis::ZeroOne ? 0 : -1; }

}  // namespace

SpinState::SpinState(std::vector<std::int8_t> v, Basis b)
    : values(std::move(v)), basis(b) {
  validate();
}

void SpinState::validate() const {
  for (auto v : values) {
    if (!in_alphabet(v, basis)) {
      throw InvalidArgument("state value " + std::to_string(int(v)) +
                            " outside basis " + std::string(to_string(basis)));
    }
  }
}

std::string SpinState::to_bitstring() const {
  std::string out;
  out.reserve(values.size());
  for (auto v : values) out.push_back(v == 1 ? '1' : '0');
  return out;
}

StateCode encode_state(std::span<const std::int8_t> values, Basis basis) {
  if (values.size() > 64) throw CapacityError("state wider than 64 nodes");
  StateCode code = 0;
  for (auto v : values) {
    if (!in_alphabet(v, basis)) throw InvalidArgument("state value outside basis");
    code = (code << 1) | (v == 1 ? 1u : 0u);
  }
  return code;
}

SpinState decode_state(StateCode code, std::size_t width, Basis basis) {
  SpinState s;
  s.basis = basis;
  s.values.resize(width);
  const auto lo = low_value(basis);
  for (std::size_t i = 0; i < width; ++i) {
    s.values[i] = ((code >> (width - 1 - i)) & 1u) ? 1 : lo;
  }
  return s;
}

SpinState convert_state(const SpinState& s) {
  SpinState out;
  out.values.reserve(s.size());
  if (s.basis == Basis::ZeroOne) {
    out.basis = Basis::PlusMinus;
    for (auto v : s.values) out.values.push_back(static_cast<std::int8_t>(2 * v - 1));
  } else {
    out.basis = Basis::ZeroOne;
    for (auto v : s.values) out.values.push_back(static_cast<std::int8_t>((v + 1) / 2));
  }
  return out;
}

// ---------------------------------------------------------------------------

BoltzmannMachine::BoltzmannMachine(Partition partition, Basis basis, Bounds bounds)
    : partition_(partition), basis_(basis), bounds_(bounds),
      biases_(partition.total(), 0.0) {
  if (!(bounds.h_max > 0.0) || !(bounds.j_max > 0.0)) {
    throw InvalidArgument("parameter bounds must be positive");
  }
}

BoltzmannMachine BoltzmannMachine::complete(Partition partition, Basis basis,
                                            Bounds bounds) {
  BoltzmannMachine bm(partition, basis, bounds);
  const auto n = partition.total();
  bm.couplings_.reserve(n * (n - (n > 0)) / 2);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = k + 1; l < n; ++l) bm.couplings_.push_back({k, l, 0.0});
  }
  return bm;
}

void BoltzmannMachine::set_bounds(Bounds bounds) {
  if (!(bounds.h_max > 0.0) || !(bounds.j_max > 0.0)) {
    throw InvalidArgument("parameter bounds must be positive");
  }
  bounds_ = bounds;
  check_bounds();
}

void BoltzmannMachine::check_node(std::size_t node) const {
  if (node >= biases_.size()) {
    throw InvalidArgument("node index " + std::to_string(node) + " out of range");
  }
}

void BoltzmannMachine::check_value(double value, double cap, const char* what) const {
  if (!std::isfinite(value)) throw InvalidArgument(std::string(what) + " is not finite");
  if (bounds_.enforced && std::abs(value) > cap) {
    throw InvalidArgument(std::string(what) + " exceeds its bound");
  }
}

double BoltzmannMachine::bias(std::size_t node) const {
  check_node(node);
  return biases_[node];
}

void BoltzmannMachine::set_bias(std::size_t node, double value) {
  check_node(node);
  check_value(value, bounds_.h_max, "bias");
  biases_[node] = value;
}

namespace {

auto pair_less = [](const Coupling& c, std::pair<std::size_t, std::size_t> key) {
  return std::tie(c.k, c.l) < std::tie(key.first, key.second);
};

}  // namespace

std::size_t BoltzmannMachine::coupling_index(std::size_t k, std::size_t l) const {
  if (k > l) std::swap(k, l);
  auto it = std::lower_bound(couplings_.begin(), couplings_.end(),
                             std::pair{k, l}, pair_less);
  if (it == couplings_.end() || it->k != k || it->l != l) return npos;
  return static_cast<std::size_t>(it - couplings_.begin());
}

bool BoltzmannMachine::has_coupling(std::size_t k, std::size_t l) const {
  return coupling_index(k, l) != npos;
}

double BoltzmannMachine::coupling(std::size_t k, std::size_t l) const {
  auto idx = coupling_index(k, l);
  return idx == npos ? 0.0 : couplings_[idx].value;
}

void BoltzmannMachine::set_coupling(std::size_t k, std::size_t l, double value) {
  check_node(k);
  check_node(l);
  if (k == l) throw InvalidArgument("self-coupling is not allowed");
  check_value(value, bounds_.j_max, "coupling");
  if (k > l) std::swap(k, l);
  auto it = std::lower_bound(couplings_.begin(), couplings_.end(),
                             std::pair{k, l}, pair_less);
  if (it != couplings_.end() && it->k == k && it->l == l) {
    it->value = value;
  } else {
    couplings_.insert(it, Coupling{k, l, value});
  }
}

std::vector<double> BoltzmannMachine::parameters() const {
  std::vector<double> theta(biases_);
  theta.reserve(num_parameters());
  for (const auto& c : couplings_) theta.push_back(c.value);
  return theta;
}

void BoltzmannMachine::set_parameters(std::span<const double> theta) {
  if (theta.size() != num_parameters()) {
    throw InvalidArgument("parameter vector has wrong length");
  }
  for (std::size_t i = 0; i < biases_.size(); ++i) {
    check_value(theta[i], bounds_.h_max, "bias");
  }
  for (std::size_t c = 0; c < couplings_.size(); ++c) {
    check_value(theta[biases_.size() + c], bounds_.j_max, "coupling");
  }
  std::copy_n(theta.begin(), biases_.size(), biases_.begin());
  for (std::size_t c = 0; c < couplings_.size(); ++c) {
    couplings_[c].value = theta[biases_.size() + c];
  }
}

void BoltzmannMachine::check_bounds() const {
  if (!bounds_.enforced) return;
  for (double b : biases_) check_value(b, bounds_.h_max, "bias");
  for (const auto& c : couplings_) check_value(c.value, bounds_.j_max, "coupling");
}

std::vector<double> BoltzmannMachine::coupling_matrix() const {
  const auto n = size();
  std::vector<double> j(n * n, 0.0);
  for (const auto& c : couplings_) {
    j[c.k * n + c.l] = c.value;
    j[c.l * n + c.k] = c.value;
  }
  return j;
}

// ---------------------------------------------------------------------------

double energy(const BoltzmannMachine& bm, std::span<const std::int8_t> values) {
  double e = 0.0;
  const auto biases = bm.biases();
  for (std::size_t i = 0; i < biases.size(); ++i) e += biases[i] * values[i];
  for (const auto& c : bm.couplings()) e += c.value * values[c.k] * values[c.l];
  return e;
}

double energy(const BoltzmannMachine& bm, const SpinState& s) {
  if (s.basis != bm.basis()) throw InvalidArgument("state basis differs from machine basis");
  if (s.size() != bm.size()) throw InvalidArgument("state length differs from node count");
  s.validate();
  return energy(bm, std::span<const std::int8_t>(s.values));
}

ClampResult clamp(const BoltzmannMachine& bm, std::span<const std::size_t> nodes,
                  std::span<const std::int8_t> values) {
  if (nodes.size() != values.size()) {
    throw InvalidArgument("clamp: node and value lists differ in length");
  }
  const auto n = bm.size();
  std::vector<int> clamped(n, -1);  // index into values, or -1
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] >= n) throw InvalidArgument("clamp: node index out of range");
    if (clamped[nodes[i]] != -1) throw InvalidArgument("clamp: node listed twice");
    if (!in_alphabet(values[i], bm.basis())) {
      throw InvalidArgument("clamp: value outside machine basis");
    }
    clamped[nodes[i]] = static_cast<int>(i);
  }

  ClampResult out;
  Partition part{};
  std::vector<std::size_t> new_index(n, BoltzmannMachine::npos);
  for (std::size_t k = 0; k < n; ++k) {
    if (clamped[k] != -1) continue;
    new_index[k] = out.free_nodes.size();
    out.free_nodes.push_back(k);
    if (k < bm.num_inputs()) {
      ++part.inputs;
    } else if (k < bm.num_visible()) {
      ++part.outputs;
    } else {
      ++part.hidden;
    }
  }

  Bounds loose = bm.bounds();
  loose.enforced = false;
  out.reduced = BoltzmannMachine(part, bm.basis(), loose);

  std::vector<double> bias(out.free_nodes.size(), 0.0);
  for (std::size_t f = 0; f < out.free_nodes.size(); ++f) {
    bias[f] = bm.biases()[out.free_nodes[f]];
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (clamped[k] != -1) out.offset += bm.biases()[k] * values[clamped[k]];
  }
  for (const auto& c : bm.couplings()) {
    const bool ck = clamped[c.k] != -1;
    const bool cl = clamped[c.l] != -1;
    if (ck && cl) {
      out.offset += c.value * values[clamped[c.k]] * values[clamped[c.l]];
    } else if (ck) {
      bias[new_index[c.l]] += c.value * values[clamped[c.k]];
    } else if (cl) {
      bias[new_index[c.k]] += c.value * values[clamped[c.l]];
    } else {
      out.reduced.set_coupling(new_index[c.k], new_index[c.l], c.value);
    }
  }
  for (std::size_t f = 0; f < bias.size(); ++f) out.reduced.set_bias(f, bias[f]);
  return out;
}

ClampResult clamp_visible(const BoltzmannMachine& bm,
                          std::span<const std::int8_t> values) {
  if (values.size() > bm.size()) throw InvalidArgument("clamp: too many values");
  std::vector<std::size_t> nodes(values.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i] = i;
  return clamp(bm, nodes, values);
}

BoltzmannMachine convert_basis(const BoltzmannMachine& bm) {
  const bool to_pm = bm.basis() == Basis::ZeroOne;
  Bounds loose = bm.bounds();
  loose.enforced = false;
  BoltzmannMachine out(bm.partition(), to_pm ? Basis::PlusMinus : Basis::ZeroOne, loose);

  std::vector<double> neighbour_sum(bm.size(), 0.0);
  for (const auto& c : bm.couplings()) {
    neighbour_sum[c.k] += c.value;
    neighbour_sum[c.l] += c.value;
  }
  for (const auto& c : bm.couplings()) {
    out.set_coupling(c.k, c.l, to_pm ? c.value / 4.0 : c.value * 4.0);
  }
  for (std::size_t k = 0; k < bm.size(); ++k) {
    const double b = bm.biases()[k];
    // {0,1} -> {-1,1}: B = b/2 + (1/4) sum_l J_kl.  Inverse: b = 2 (B - sum_l J'_kl).
    out.set_bias(k, to_pm ? b / 2.0 + neighbour_sum[k] / 4.0
                          : 2.0 * (b - neighbour_sum[k]));
  }
  return out;
}

// ---------------------------------------------------------------------------

StateRange::StateRange(std::size_t node_count, Basis basis, std::size_t cap)
    : width_(node_count), basis_(basis) {
  if (node_count > cap || node_count >= 64) {
    throw CapacityError("cannot enumerate " + std::to_string(node_count) +
                        " nodes (cap " + std::to_string(cap) + ")");
  }
  last_ = StateCode{1} << node_count;
}

StateRange StateRange::slice(StateCode first, StateCode last) const {
  if (first > last || last > last_ || first < first_) {
    throw InvalidArgument("state range slice out of bounds");
  }
  StateRange out = *this;
  out.first_ = first;
  out.last_ = last;
  return out;
}

StateRange enumerate_states(std::size_t node_count, Basis basis, std::size_t cap) {
  return StateRange(node_count, basis, cap);
}

GroundStates ground_states(const BoltzmannMachine& bm, std::size_t cap) {
  EnergyTable table(bm, cap);
  GroundStates out;
  out.e_min = table.min();
  const double tol = 1e-9 * std::max(1.0, std::abs(out.e_min));
  const auto energies = table.energies();
  for (std::size_t code = 0; code < energies.size(); ++code) {
    if (energies[code] <= out.e_min + tol) {
      out.states.push_back(decode_state(code, bm.size(), bm.basis()));
    }
  }
  return out;
}

}  // namespace qbm
