#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qbm/distribution.hpp"

namespace qbm {

/// Input/output partition of visible rows for function approximation.
struct IoSplit {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  friend bool operator==(const IoSplit&, const IoSplit&) = default;
};

/// Weighted visible configurations (the data distribution q) in {0,1}.
class Dataset {
 public:
  Dataset() = default;
  /// Rows must be distinct and equally long; weights positive and summing to 1.
  Dataset(std::vector<std::vector<std::int8_t>> rows, std::vector<double> weights,
          std::optional<IoSplit> io_split = std::nullopt, std::string name = {});

  static Dataset uniform(std::vector<std::vector<std::int8_t>> rows,
                         std::optional<IoSplit> io_split = std::nullopt,
                         std::string name = {});

  std::size_t size() const noexcept { return rows_.size(); }
  std::size_t width() const noexcept { return rows_.empty() ? 0 : rows_.front().size(); }
  const std::vector<std::vector<std::int8_t>>& rows() const noexcept { return rows_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::optional<IoSplit>& io_split() const noexcept { return io_split_; }
  const std::string& name() const noexcept { return name_; }

  std::span<const std::int8_t> row(std::size_t i) const { return rows_.at(i); }
  std::span<const std::int8_t> inputs(std::size_t i) const;
  std::span<const std::int8_t> outputs(std::size_t i) const;

  /// q as a distribution over width()-bit states.
  Distribution distribution() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<std::vector<std::int8_t>> rows_;
  std::vector<double> weights_;
  std::optional<IoSplit> io_split_;
  std::string name_;
};

enum class Gate { And, Or, Xor };

/// Truth table rows (in1, in2, out), q = 1/4 each, split (2, 1).
Dataset logic_gate(Gate kind);
/// 2-bit adder: (A1, A0, B1, B0 | C2, C1, C0), 16 rows, split (4, 3).
Dataset adder2();
/// Single-boundary patterns 0^k 1^(n-k) for k = n..0, uniform weights.
Dataset two_phase(std::size_t n = 10);

/// "and", "or", "xor", "adder2", "two_phase" / "two_phase:<n>".
Dataset dataset_by_name(std::string_view name);

/// CSV layout:
///   # io_split=<m_I>,<m_O>      (optional metadata line)
///   bit_0,...,bit_{m-1},weight  (weight column optional -> uniform)
///   0,1,...,0.25
std::string dataset_to_csv(const Dataset& data);
Dataset parse_dataset_csv(const std::string& text, std::string name = {});
Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const std::filesystem::path& path, const Dataset& data);

}  // namespace qbm
