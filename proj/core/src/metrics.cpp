#include "qbm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qbm/error.hpp"

namespace qbm {

namespace {

std::vector<std::size_t> iota_nodes(std::size_t count) {
  std::vector<std::size_t> nodes(count);
  std::iota(nodes.begin(), nodes.end(), std::size_t{0});
  return nodes;
}

StateCode prefix_code(std::span<const std::int8_t> values) {
  return encode_state(values, Basis::ZeroOne);
}

}  // namespace

ExactModel::ExactModel(const BoltzmannMachine& bm, std::size_t cap)
    : bm_(bm), table_(bm, cap) {
  ground_tol_ = 1e-9 * std::max(1.0, std::abs(table_.min()));
}

Distribution ExactModel::marginal(double beta, std::span<const std::size_t> nodes) const {
  const auto p = joint(beta);
  return marginalize(p, bm_.size(), nodes);
}

Distribution ExactModel::visible(double beta) const {
  const auto nodes = iota_nodes(bm_.num_visible());
  return marginal(beta, nodes);
}

namespace {

Distribution conditional_from_joint(const BoltzmannMachine& bm, std::span<const double> p,
                                    std::span<const std::int8_t> inputs) {
  if (bm.basis() != Basis::ZeroOne) throw InvalidArgument("conditionals need a ZeroOne machine");
  if (bm.num_outputs() == 0) throw InvalidArgument("machine has no output nodes");
  if (inputs.size() != bm.num_inputs()) throw InvalidArgument("input assignment has wrong length");
  const std::size_t n = bm.size();
  const std::size_t tail = n - bm.num_inputs();
  const StateCode first = prefix_code(inputs) << tail;
  const StateCode last = first + (StateCode{1} << tail);
  const std::size_t hidden = bm.num_hidden();
  const StateCode out_mask = (StateCode{1} << bm.num_outputs()) - 1;

  std::vector<double> probs(std::size_t{1} << bm.num_outputs(), 0.0);
  double total = 0.0;
  for (StateCode code = first; code < last; ++code) {
    probs[(code >> hidden) & out_mask] += p[code];
    total += p[code];
  }
  if (!(total > 0.0)) throw Error("input assignment has zero probability");
  for (auto& v : probs) v /= total;
  return Distribution::dense(bm.num_outputs(), std::move(probs));
}

}  // namespace

Distribution ExactModel::conditional(double beta, std::span<const std::int8_t> inputs) const {
  const auto p = joint(beta);
  return conditional_from_joint(bm_, p, inputs);
}

double ExactModel::kl(const Dataset& data, double beta) const {
  if (data.width() != bm_.num_visible()) throw InvalidArgument("dataset width differs from visible count");
  return kl_divergence(data.distribution(), visible(beta));
}

double ExactModel::ncll(const Dataset& data, double beta) const {
  if (!data.io_split()) throw InvalidArgument("dataset has no input/output split");
  if (data.io_split()->inputs != bm_.num_inputs() || data.io_split()->outputs != bm_.num_outputs()) {
    throw InvalidArgument("dataset split differs from machine partition");
  }
  const auto p = joint(beta);
  double loss = 0.0;
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto cond = conditional_from_joint(bm_, p, data.inputs(r));
    loss -= std::log(cond.probability(data.outputs(r)));
  }
  return loss;
}

std::pair<double, double> ExactModel::kl_beta_derivatives(const Dataset& data, double beta) const {
  if (data.width() != bm_.num_visible()) throw InvalidArgument("dataset width differs from visible count");
  const auto p = joint(beta);
  const auto e = table_.energies();

  double mean = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) mean += p[i] * e[i];
  double var = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) var += p[i] * (e[i] - mean) * (e[i] - mean);

  const std::size_t hidden = bm_.num_hidden();
  double first = -mean;
  double second = 0.0;
  for (std::size_t r = 0; r < data.size(); ++r) {
    const double q = data.weights()[r];
    const StateCode lo = prefix_code(data.row(r)) << hidden;
    const StateCode hi = lo + (StateCode{1} << hidden);
    double pv = 0.0, m = 0.0;
    for (StateCode c = lo; c < hi; ++c) {
      pv += p[c];
      m += p[c] * e[c];
    }
    m /= pv;
    double v = 0.0;
    for (StateCode c = lo; c < hi; ++c) v += p[c] * (e[c] - m) * (e[c] - m);
    v /= pv;
    first += q * m;
    second += q * (var - v);
  }
  return {first, second};
}

bool ExactModel::is_ground(StateCode code) const {
  return table_.energies()[code] <= table_.min() + ground_tol_;
}

std::size_t ExactModel::ground_state_count() const {
  std::size_t count = 0;
  for (StateCode c = 0; c < table_.size(); ++c) count += is_ground(c) ? 1 : 0;
  return count;
}

double ExactModel::ground_state_probability(double beta) const {
  const auto p = joint(beta);
  double total = 0.0;
  for (StateCode c = 0; c < p.size(); ++c) {
    if (is_ground(c)) total += p[c];
  }
  return total;
}

double ExactModel::excited_log_mass(double beta) const {
  const auto e = table_.energies();
  double first_excited = std::numeric_limits<double>::infinity();
  for (StateCode c = 0; c < e.size(); ++c) {
    if (!is_ground(c)) first_excited = std::min(first_excited, e[c]);
  }
  if (!std::isfinite(first_excited)) return -std::numeric_limits<double>::infinity();
  double excited = 0.0;  // scaled by exp(beta * (E1 - Emin))
  double all = 0.0;      // scaled by exp(beta * Emin)
  for (StateCode c = 0; c < e.size(); ++c) {
    all += std::exp(-beta * (e[c] - table_.min()));
    if (!is_ground(c)) excited += std::exp(-beta * (e[c] - first_excited));
  }
  return std::log(excited) - beta * (first_excited - table_.min()) - std::log(all);
}

// ---------------------------------------------------------------------------

Distribution model_probability(const BoltzmannMachine& bm, double beta,
                               std::span<const std::size_t> projection) {
  return ExactModel(bm).marginal(beta, projection);
}

double kl_divergence(const Distribution& q, const Distribution& p) {
  if (q.width() != p.width()) throw InvalidArgument("kl_divergence: width mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double qi = q.probs()[i];
    if (qi == 0.0) continue;
    const double pi = p.probability(q.support()[i]);
    if (pi == 0.0) return std::numeric_limits<double>::infinity();
    d += qi * std::log(qi / pi);
  }
  return std::max(d, 0.0);
}

double hellinger(const Distribution& a, const Distribution& b) {
  if (a.width() != b.width()) throw InvalidArgument("hellinger: width mismatch");
  double sum = 0.0;
  std::size_t i = 0, j = 0;
  const auto& sa = a.support();
  const auto& sb = b.support();
  while (i < sa.size() || j < sb.size()) {
    double pa = 0.0, pb = 0.0;
    if (j == sb.size() || (i < sa.size() && sa[i] < sb[j])) {
      pa = a.probs()[i++];
    } else if (i == sa.size() || sb[j] < sa[i]) {
      pb = b.probs()[j++];
    } else {
      pa = a.probs()[i++];
      pb = b.probs()[j++];
    }
    const double diff = std::sqrt(pa) - std::sqrt(pb);
    sum += diff * diff;
  }
  return 0.5 * std::sqrt(sum);
}

std::vector<double> log_beta_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi >= lo) || n == 0) throw InvalidArgument("log grid needs 0 < lo <= hi and n >= 1");
  std::vector<double> grid(n);
  if (n == 1) {
    grid[0] = lo;
    return grid;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

std::vector<double> linear_beta_grid(double lo, double hi, std::size_t n) {
  if (!(lo >= 0.0) || !(hi >= lo) || n == 0) throw InvalidArgument("linear grid needs 0 <= lo <= hi and n >= 1");
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return grid;
}

namespace {

/// Grid argmin (first wins on ties) plus golden refinement in the two
/// adjacent cells.
template <class F>
std::pair<double, double> bracketed_minimum(F&& f, std::span<const double> grid,
                                            std::vector<std::pair<double, double>>* curve,
                                            bool* interior) {
  if (grid.empty()) throw InvalidArgument("beta grid is empty");
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = f(grid[i]);
    if (curve) curve->emplace_back(grid[i], v);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  if (interior) *interior = best > 0 && best + 1 < grid.size();
  if (grid.size() == 1 || !std::isfinite(best_value)) return {grid[best], best_value};
  const double lo = grid[best > 0 ? best - 1 : 0];
  const double hi = grid[std::min(best + 1, grid.size() - 1)];
  const double tol = 1e-7 * std::max(1.0, hi);
  auto [x, fx] = golden_section_minimize(f, lo, hi, tol);
  if (fx < best_value) return {x, fx};
  return {grid[best], best_value};
}

}  // namespace

BetaFit fit_beta(const SampleSet& ss, const BoltzmannMachine& bm,
                 std::span<const double> beta_grid, std::span<const std::size_t> projection) {
  if (beta_grid.empty()) throw InvalidArgument("beta grid is empty");
  if (ss.width() != bm.size()) throw InvalidArgument("samples do not match machine size");
  const ExactModel model(bm);
  const Distribution empirical = empirical_distribution(ss, projection);
  BetaFit fit;
  auto distance = [&](double beta) { return hellinger(empirical, model.marginal(beta, projection)); };
  auto [x, fx] = bracketed_minimum(distance, beta_grid, &fit.curve, nullptr);
  fit.beta_star = x;
  fit.distance = fx;
  return fit;
}

BetaFit fit_beta(const SampleSet& ss, const BoltzmannMachine& bm,
                 std::span<const double> beta_grid) {
  const auto nodes = iota_nodes(bm.size());
  return fit_beta(ss, bm, beta_grid, nodes);
}

KlMinimum minimize_kl_over_beta(const ExactModel& model, const Dataset& data,
                                std::span<const double> beta_grid) {
  KlMinimum out;
  auto [x, fx] = bracketed_minimum([&](double beta) { return model.kl(data, beta); },
                                   beta_grid, nullptr, &out.interior);
  out.beta = x;
  out.dkl = fx;
  return out;
}

Distribution conditional_probability(const BoltzmannMachine& bm, double beta,
                                     std::span<const std::int8_t> inputs) {
  if (bm.num_outputs() == 0) throw InvalidArgument("machine has no output nodes");
  if (inputs.size() != bm.num_inputs()) throw InvalidArgument("input assignment has wrong length");
  // Clamp the inputs and enumerate only outputs + hidden.
  const auto clamped = clamp_visible(bm, inputs);
  const ExactModel reduced(clamped.reduced);
  const auto nodes = iota_nodes(bm.num_outputs());
  return reduced.marginal(beta, nodes);
}

double negative_conditional_log_likelihood(const BoltzmannMachine& bm, double beta,
                                           const Dataset& data) {
  return ExactModel(bm).ncll(data, beta);
}

BetaDerivatives dkl_beta_derivatives(const BoltzmannMachine& bm, double beta,
                                     const Dataset& data) {
  auto [first, second] = ExactModel(bm).kl_beta_derivatives(data, beta);
  return {first, second};
}

std::vector<std::pair<double, double>> ground_state_probability_curve(
    const BoltzmannMachine& bm, std::span<const double> beta_grid) {
  const ExactModel model(bm);
  std::vector<std::pair<double, double>> curve;
  curve.reserve(beta_grid.size());
  for (double beta : beta_grid) curve.emplace_back(beta, model.ground_state_probability(beta));
  return curve;
}

}  // namespace qbm

namespace qbm {

double mean_energy(const ExactModel& model, double beta) {
  const auto p = model.joint(beta);
  const auto e = model.table().energies();
  double mean = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) mean += p[i] * e[i];
  return mean;
}

namespace {

// Smallest beta with <E>_beta <= level, by bisection on log beta; inf if none below hi.
double decay_onset(const ExactModel& model, double level, double hi = 1e6) {
  if (mean_energy(model, 0.0) <= level) return 0.0;
  if (mean_energy(model, hi) > level) return std::numeric_limits<double>::infinity();
  double a = std::log(1e-6), b = std::log(hi);
  for (int i = 0; i < 100 && b - a > 1e-10; ++i) {
    const double m = 0.5 * (a + b);
    (mean_energy(model, std::exp(m)) > level ? a : b) = m;
  }
  return std::exp(b);
}

}  // namespace

PropositionCheck check_propositions(const ExactModel& model,
                                    std::span<const double> beta_grid) {
  PropositionCheck out;
  out.all_ground = model.ground_state_count() == model.table().size();
  if (out.all_ground) {
    out.ground_monotone = out.excited_decay = out.decay_order = true;
    return out;
  }
  out.ground_monotone = true;
  for (std::size_t i = 1; i < beta_grid.size(); ++i) {
    if (!(model.excited_log_mass(beta_grid[i]) < model.excited_log_mass(beta_grid[i - 1]))) {
      out.ground_monotone = false;
      break;
    }
  }
  std::vector<double> levels;
  const auto e = model.table().energies();
  for (StateCode c = 0; c < e.size(); ++c) {
    if (!model.is_ground(c)) levels.push_back(e[c]);
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end(),
                           [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }),
               levels.end());
  out.excited_decay = true;
  out.decay_order = true;
  double prev = std::numeric_limits<double>::infinity();
  for (double level : levels) {
    const double onset = decay_onset(model, level);
    if (!std::isfinite(onset)) out.excited_decay = false;
    if (onset > prev) out.decay_order = false;
    prev = onset;
  }
  out.beta_c = levels.empty() ? 0.0 : decay_onset(model, levels.front());
  return out;
}

}  // namespace qbm
