#include "qbm/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qbm/error.hpp"

namespace qbm {

Distribution::Distribution(std::size_t width, std::vector<StateCode> support,
                           std::vector<double> probs)
    : width_(width) {
  if (support.size() != probs.size()) {
    throw InvalidArgument("distribution: support and probabilities differ in length");
  }
  std::vector<std::size_t> order(support.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](auto a, auto b) { return support[a] < support[b]; });
  support_.reserve(order.size());
  probs_.reserve(order.size());
  double total = 0.0;
  for (auto i : order) {
    if (!(probs[i] >= 0.0)) throw InvalidArgument("distribution: negative probability");
    if (width < 64 && support[i] >> width) {
      throw InvalidArgument("distribution: state wider than declared width");
    }
    if (!support_.empty() && support_.back() == support[i]) {
      throw InvalidArgument("distribution: duplicate support entry");
    }
    support_.push_back(support[i]);
    probs_.push_back(probs[i]);
    total += probs[i];
  }
  if (!support_.empty() && std::abs(total - 1.0) > 1e-9) {
    throw InvalidArgument("distribution: probabilities sum to " + std::to_string(total));
  }
}

Distribution Distribution::dense(std::size_t width, std::vector<double> probs) {
  if (width >= 64 || probs.size() != (std::size_t{1} << width)) {
    throw InvalidArgument("dense distribution needs 2^width entries");
  }
  std::vector<StateCode> support(probs.size());
  std::iota(support.begin(), support.end(), StateCode{0});
  return Distribution(width, std::move(support), std::move(probs));
}

Distribution Distribution::uniform(std::size_t width) {
  const std::size_t count = std::size_t{1} << width;
  return dense(width, std::vector<double>(count, 1.0 / static_cast<double>(count)));
}

double Distribution::probability(StateCode code) const {
  auto it = std::lower_bound(support_.begin(), support_.end(), code);
  if (it == support_.end() || *it != code) return 0.0;
  return probs_[static_cast<std::size_t>(it - support_.begin())];
}

double Distribution::probability(std::span<const std::int8_t> values, Basis basis) const {
  if (values.size() != width_) throw InvalidArgument("state width differs from distribution");
  return probability(encode_state(values, basis));
}

StateCode project_code(StateCode code, std::size_t width,
                       std::span<const std::size_t> nodes) {
  StateCode out = 0;
  for (auto node : nodes) out = (out << 1) | ((code >> (width - 1 - node)) & 1u);
  return out;
}

Distribution marginalize(std::span<const double> table, std::size_t width,
                         std::span<const std::size_t> nodes) {
  if (table.size() != (std::size_t{1} << width)) {
    throw InvalidArgument("marginalize: table does not match width");
  }
  for (auto node : nodes) {
    if (node >= width) throw InvalidArgument("marginalize: node out of range");
  }
  const std::size_t out_width = nodes.size();
  std::vector<double> probs(std::size_t{1} << out_width, 0.0);

  bool prefix = true;
  for (std::size_t i = 0; i < nodes.size(); ++i) prefix = prefix && nodes[i] == i;
  if (prefix) {
    const std::size_t shift = width - out_width;
    for (std::size_t code = 0; code < table.size(); ++code) probs[code >> shift] += table[code];
  } else {
    for (std::size_t code = 0; code < table.size(); ++code) {
      probs[project_code(code, width, nodes)] += table[code];
    }
  }
  // Renormalise away accumulated rounding so the invariant check holds.
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (auto& p : probs) p /= total;
  return Distribution::dense(out_width, std::move(probs));
}

}  // namespace qbm
