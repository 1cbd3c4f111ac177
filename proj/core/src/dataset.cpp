#include "qbm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "qbm/error.hpp"
#include "qbm/model_io.hpp"

namespace qbm {

Dataset::Dataset(std::vector<std::vector<std::int8_t>> rows, std::vector<double> weights,
                 std::optional<IoSplit> io_split, std::string name)
    : rows_(std::move(rows)), weights_(std::move(weights)), io_split_(io_split),
      name_(std::move(name)) {
  if (rows_.empty()) throw InvalidArgument("dataset has no rows");
  if (rows_.size() != weights_.size()) throw InvalidArgument("dataset: rows/weights length mismatch");
  const auto width = rows_.front().size();
  if (width == 0 || width >= 64) throw InvalidArgument("dataset rows must have 1..63 bits");
  std::set<std::vector<std::int8_t>> seen;
  double total = 0.0;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].size() != width) throw InvalidArgument("dataset rows differ in length");
    for (auto v : rows_[i]) {
      if (v != 0 && v != 1) throw InvalidArgument("dataset entries must be 0 or 1");
    }
    if (!seen.insert(rows_[i]).second) throw InvalidArgument("dataset rows must be distinct");
    if (!(weights_[i] > 0.0)) throw InvalidArgument("dataset weights must be positive");
    total += weights_[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("dataset weights must sum to 1");
  if (io_split_ && io_split_->inputs + io_split_->outputs != width) {
    throw InvalidArgument("io split does not match row width");
  }
}

Dataset Dataset::uniform(std::vector<std::vector<std::int8_t>> rows,
                         std::optional<IoSplit> io_split, std::string name) {
  std::vector<double> w(rows.size(), rows.empty() ? 0.0 : 1.0 / static_cast<double>(rows.size()));
  return Dataset(std::move(rows), std::move(w), io_split, std::move(name));
}

std::span<const std::int8_t> Dataset::inputs(std::size_t i) const {
  if (!io_split_) throw InvalidArgument("dataset has no input/output split");
  return std::span<const std::int8_t>(rows_.at(i)).first(io_split_->inputs);
}

std::span<const std::int8_t> Dataset::outputs(std::size_t i) const {
  if (!io_split_) throw InvalidArgument("dataset has no input/output split");
  return std::span<const std::int8_t>(rows_.at(i)).last(io_split_->outputs);
}

Distribution Dataset::distribution() const {
  std::vector<StateCode> support;
  support.reserve(rows_.size());
  for (const auto& r : rows_) support.push_back(encode_state(r, Basis::ZeroOne));
  return Distribution(width(), std::move(support), weights_);
}

Dataset logic_gate(Gate kind) {
  std::vector<std::vector<std::int8_t>> rows;
  std::string name;
  for (std::int8_t a = 0; a <= 1; ++a) {
    for (std::int8_t b = 0; b <= 1; ++b) {
      std::int8_t out = 0;
      switch (kind) {
        case Gate::And: out = a & b; name = "and"; break;
        case Gate::Or: out = a | b; name = "or"; break;
        case Gate::Xor: out = a ^ b; name = "xor"; break;
      }
      rows.push_back({a, b, out});
    }
  }
  return Dataset::uniform(std::move(rows), IoSplit{2, 1}, name);
}

Dataset adder2() {
  std::vector<std::vector<std::int8_t>> rows;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      const int c = a + b;
      rows.push_back({static_cast<std::int8_t>(a >> 1), static_cast<std::int8_t>(a & 1),
                      static_cast<std::int8_t>(b >> 1), static_cast<std::int8_t>(b & 1),
                      static_cast<std::int8_t>((c >> 2) & 1), static_cast<std::int8_t>((c >> 1) & 1),
                      static_cast<std::int8_t>(c & 1)});
    }
  }
  return Dataset::uniform(std::move(rows), IoSplit{4, 3}, "adder2");
}

Dataset two_phase(std::size_t n) {
  if (n == 0) throw InvalidArgument("two_phase needs at least one site");
  std::vector<std::vector<std::int8_t>> rows;
  for (std::size_t zeros = n + 1; zeros-- > 0;) {
    std::vector<std::int8_t> row(n, 1);
    std::fill_n(row.begin(), zeros, std::int8_t{0});
    rows.push_back(std::move(row));
  }
  return Dataset::uniform(std::move(rows), std::nullopt, "two_phase");
}

Dataset dataset_by_name(std::string_view name) {
  if (name == "and") return logic_gate(Gate::And);
  if (name == "or") return logic_gate(Gate::Or);
  if (name == "xor") return logic_gate(Gate::Xor);
  if (name == "adder2") return adder2();
  if (name == "two_phase") return two_phase();
  if (name.starts_with("two_phase:")) {
    std::size_t n = 0;
    auto tail = name.substr(10);
    auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), n);
    if (ec != std::errc{} || ptr != tail.data() + tail.size()) {
      throw InvalidArgument("bad two_phase size in '" + std::string(name) + "'");
    }
    return two_phase(n);
  }
  throw InvalidArgument("unknown dataset '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

std::string dataset_to_csv(const Dataset& data) {
  std::ostringstream out;
  out.precision(17);
  if (data.io_split()) {
    out << "# io_split=" << data.io_split()->inputs << "," << data.io_split()->outputs << "\n";
  }
  for (std::size_t i = 0; i < data.width(); ++i) out << "bit_" << i << ",";
  out << "weight\n";
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (auto v : data.rows()[r]) out << int(v) << ",";
    out << data.weights()[r] << "\n";
  }
  return out.str();
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    auto b = cell.find_first_not_of(" \t\r");
    auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

Dataset parse_dataset_csv(const std::string& text, std::string name) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::optional<IoSplit> split;
  std::vector<std::string> header;
  std::vector<std::vector<std::int8_t>> rows;
  std::vector<double> weights;
  bool has_weight = false;
  std::size_t bits = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line.front() == '#') {
      const auto pos = line.find("io_split=");
      if (pos != std::string::npos) {
        unsigned a = 0, b = 0;
        if (std::sscanf(line.c_str() + pos + 9, "%u,%u", &a, &b) != 2) {
          throw ParseError("malformed io_split metadata", line_no);
        }
        split = IoSplit{a, b};
      }
      continue;
    }
    auto cells = split_csv(line);
    if (header.empty()) {
      header = cells;
      has_weight = !header.empty() && header.back() == "weight";
      bits = header.size() - (has_weight ? 1 : 0);
      for (std::size_t i = 0; i < bits; ++i) {
        if (header[i] != "bit_" + std::to_string(i)) {
          throw ParseError("expected column 'bit_" + std::to_string(i) + "', got '" + header[i] + "'", line_no);
        }
      }
      if (bits == 0) throw ParseError("no bit columns", line_no);
      continue;
    }
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " columns, got " +
                           std::to_string(cells.size()), line_no);
    }
    std::vector<std::int8_t> row(bits);
    for (std::size_t i = 0; i < bits; ++i) {
      if (cells[i] == "0") {
        row[i] = 0;
      } else if (cells[i] == "1") {
        row[i] = 1;
      } else {
        throw ParseError("bit value '" + cells[i] + "' is not 0 or 1", line_no);
      }
    }
    double w = 1.0;
    if (has_weight) {
      try {
        std::size_t used = 0;
        w = std::stod(cells.back(), &used);
        if (used != cells.back().size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParseError("weight '" + cells.back() + "' is not a number", line_no);
      }
      if (!(w > 0.0) || !std::isfinite(w)) throw ParseError("weight must be positive", line_no);
    }
    if (std::find(rows.begin(), rows.end(), row) != rows.end()) {
      throw ParseError("duplicate row", line_no);
    }
    rows.push_back(std::move(row));
    weights.push_back(w);
  }
  if (rows.empty()) throw ParseError("dataset has no rows", line_no);
  double total = 0.0;
  for (double w : weights) total += w;
  // Weights are renormalised unless they already sum to 1 at write precision.
  if (std::abs(total - 1.0) > 1e-12) {
    for (double& w : weights) w /= total;
  }
  try {
    return Dataset(std::move(rows), std::move(weights), split, std::move(name));
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what());
  }
}

Dataset load_dataset(const std::filesystem::path& path) {
  return parse_dataset_csv(read_file(path), path.stem().string());
}

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
  write_file_atomic(path, dataset_to_csv(data));
}

}  // namespace qbm
