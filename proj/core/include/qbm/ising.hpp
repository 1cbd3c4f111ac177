#pragma once

#include <cstddef>
#include <cstdint>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qbm {

/// Value alphabet of a binary node: {0,1} or {-1,+1}.
enum class Basis { ZeroOne, PlusMinus };

std::string_view to_string(Basis basis);
/// Accepts "01"/"zero_one" and "pm1"/"plus_minus".
Basis parse_basis(std::string_view text);

/// Largest node count that may be enumerated exhaustively (2^24 states).
inline constexpr std::size_t kDefaultEnumerationCap = 24;

/// Packed state: node i lives in bit (n - 1 - i), so integer order is
/// lexicographic order over node values with node 0 most significant.
using StateCode = std::uint64_t;

/// One configuration of every node of a machine (or of a node subset).
struct SpinState {
  std::vector<std::int8_t> values;
  Basis basis = Basis::ZeroOne;

  SpinState() = default;
  SpinState(std::vector<std::int8_t> v, Basis b);

  std::size_t size() const noexcept { return values.size(); }
  /// Throws InvalidArgument if any entry is outside the basis alphabet.
  void validate() const;
  /// "0110" style rendering; PlusMinus renders -1 as '0'.
  std::string to_bitstring() const;

  friend bool operator==(const SpinState&, const SpinState&) = default;
};

StateCode encode_state(std::span<const std::int8_t> values, Basis basis);
SpinState decode_state(StateCode code, std::size_t width, Basis basis);

/// Elementwise S = 2s - 1 (ZeroOne -> PlusMinus) or its inverse.
SpinState convert_state(const SpinState& s);

/// Node counts in the fixed order [visible-input | visible-output | hidden].
struct Partition {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::size_t hidden = 0;

  std::size_t visible() const noexcept { return inputs + outputs; }
  std::size_t total() const noexcept { return inputs + outputs + hidden; }
  friend bool operator==(const Partition&, const Partition&) = default;
};

struct Bounds {
  double h_max = 1.0;
  double j_max = 1.0;
  bool enforced = true;
  friend bool operator==(const Bounds&, const Bounds&) = default;
};

/// Symmetric pairwise term; always stored with k < l.
struct Coupling {
  std::size_t k = 0;
  std::size_t l = 0;
  double value = 0.0;
  friend bool operator==(const Coupling&, const Coupling&) = default;
};

/// Ising-type energy model E(s) = sum_i b_i s_i + sum_{k<l} J_kl s_k s_l.
///
/// Couplings are sparse and keyed by the ordered pair (min, max); looking
/// up (k, l) or (l, k) yields the same entry. The flat parameter vector used
/// by the trainers is [biases..., couplings... in stored order].
class BoltzmannMachine {
 public:
  BoltzmannMachine() = default;
  explicit BoltzmannMachine(Partition partition, Basis basis = Basis::ZeroOne,
                            Bounds bounds = {});

  /// Fully connected machine with every pair present (value 0).
  static BoltzmannMachine complete(Partition partition,
                                   Basis basis = Basis::ZeroOne,
                                   Bounds bounds = {});

  const Partition& partition() const noexcept { return partition_; }
  std::size_t size() const noexcept { return biases_.size(); }
  std::size_t num_inputs() const noexcept { return partition_.inputs; }
  std::size_t num_outputs() const noexcept { return partition_.outputs; }
  std::size_t num_visible() const noexcept { return partition_.visible(); }
  std::size_t num_hidden() const noexcept { return partition_.hidden; }
  Basis basis() const noexcept { return basis_; }
  const Bounds& bounds() const noexcept { return bounds_; }
  void set_bounds(Bounds bounds);

  std::span<const double> biases() const noexcept { return biases_; }
  double bias(std::size_t node) const;
  void set_bias(std::size_t node, double value);

  const std::vector<Coupling>& couplings() const noexcept { return couplings_; }
  bool has_coupling(std::size_t k, std::size_t l) const;
  /// Zero when the pair is absent.
  double coupling(std::size_t k, std::size_t l) const;
  /// Inserts the pair if missing. Self-coupling is rejected.
  void set_coupling(std::size_t k, std::size_t l, double value);
  /// Index of the pair in couplings(), or npos.
  std::size_t coupling_index(std::size_t k, std::size_t l) const;

  std::size_t num_parameters() const noexcept {
    return biases_.size() + couplings_.size();
  }
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> theta);

  /// Throws InvalidArgument when an entry exceeds H_max / J_max.
  void check_bounds() const;

  /// Dense symmetric coupling matrix, row-major size() x size().
  std::vector<double> coupling_matrix() const;

  friend bool operator==(const BoltzmannMachine&,
                         const BoltzmannMachine&) = default;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  void check_node(std::size_t node) const;
  void check_value(double value, double cap, const char* what) const;

  Partition partition_{};
  Basis basis_ = Basis::ZeroOne;
  Bounds bounds_{};
  std::vector<double> biases_;
  std::vector<Coupling> couplings_;  // sorted by (k, l)
};

double energy(const BoltzmannMachine& bm, const SpinState& s);
/// Unchecked variant over raw values already in bm's basis.
double energy(const BoltzmannMachine& bm, std::span<const std::int8_t> values);

/// Result of folding a clamped node subset into the free nodes.
struct ClampResult {
  BoltzmannMachine reduced;
  /// Energy contribution of the clamped nodes alone.
  double offset = 0.0;
  /// Original indices of the reduced machine's nodes, in order.
  std::vector<std::size_t> free_nodes;
};

/// Clamps `nodes[i]` to `values[i]`. For every free configuration h,
/// energy(bm, clamped + h) == offset + energy(reduced, h).
ClampResult clamp(const BoltzmannMachine& bm, std::span<const std::size_t> nodes,
                  std::span<const std::int8_t> values);

/// Clamps the leading nodes 0..values.size()-1 (visible, or inputs only).
ClampResult clamp_visible(const BoltzmannMachine& bm,
                          std::span<const std::int8_t> values);

/// Re-expresses the machine in the other basis; energies shift by a
/// state-independent constant, so Boltzmann probabilities are unchanged.
BoltzmannMachine convert_basis(const BoltzmannMachine& bm);

/// Lexicographic stream of all 2^n states. Ranges can be sharded with
/// `slice` and restarted freely.
class StateRange {
 public:
  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = SpinState;
    using difference_type = std::ptrdiff_t;

    iterator() = default;
    iterator(StateCode code, std::size_t width, Basis basis)
        : code_(code), width_(width), basis_(basis) {}
    SpinState operator*() const { return decode_state(code_, width_, basis_); }
    iterator& operator++() {
      ++code_;
      return *this;
    }
    iterator operator++(int) {
      auto copy = *this;
      ++code_;
      return copy;
    }
    StateCode code() const noexcept { return code_; }
    friend bool operator==(const iterator& a, const iterator& b) {
      return a.code_ == b.code_;
    }

   private:
    StateCode code_ = 0;
    std::size_t width_ = 0;
    Basis basis_ = Basis::ZeroOne;
  };

  StateRange(std::size_t node_count, Basis basis = Basis::ZeroOne,
             std::size_t cap = kDefaultEnumerationCap);

  std::uint64_t size() const noexcept { return last_ - first_; }
  std::size_t width() const noexcept { return width_; }
  iterator begin() const { return {first_, width_, basis_}; }
  iterator end() const { return {last_, width_, basis_}; }
  /// Sub-range [first, last) of state codes.
  StateRange slice(StateCode first, StateCode last) const;

 private:
  std::size_t width_ = 0;
  Basis basis_ = Basis::ZeroOne;
  StateCode first_ = 0;
  StateCode last_ = 0;
};

StateRange enumerate_states(std::size_t node_count,
                            Basis basis = Basis::ZeroOne,
                            std::size_t cap = kDefaultEnumerationCap);

struct GroundStates {
  std::vector<SpinState> states;
  double e_min = 0.0;
};

/// Exact minimisers by full enumeration; ties (within 1e-9 relative) kept.
GroundStates ground_states(const BoltzmannMachine& bm,
                           std::size_t cap = kDefaultEnumerationCap);

}  // namespace qbm
