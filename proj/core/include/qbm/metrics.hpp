#pragma once

#include <span>
#include <utility>
#include <vector>

#include "qbm/dataset.hpp"
#include "qbm/distribution.hpp"
#include "qbm/energy_table.hpp"
#include "qbm/ising.hpp"
#include "qbm/sampler.hpp"

namespace qbm {

/// Exact thermodynamics of one machine. The energy table is built once, so
/// sweeping many inverse temperatures costs one exp() per state per beta.
class ExactModel {
 public:
  explicit ExactModel(const BoltzmannMachine& bm, std::size_t cap = kDefaultEnumerationCap);

  const BoltzmannMachine& machine() const noexcept { return bm_; }
  const EnergyTable& table() const noexcept { return table_; }

  std::vector<double> joint(double beta) const { return table_.boltzmann(beta); }
  Distribution marginal(double beta, std::span<const std::size_t> nodes) const;
  /// p(v) over the visible prefix [inputs | outputs].
  Distribution visible(double beta) const;
  /// p(v_O | v_I) over output states for one input assignment.
  Distribution conditional(double beta, std::span<const std::int8_t> inputs) const;

  double kl(const Dataset& data, double beta) const;
  double ncll(const Dataset& data, double beta) const;
  /// (dD/dbeta, d2D/dbeta2) of D_KL(q || p_beta) from the closed forms.
  std::pair<double, double> kl_beta_derivatives(const Dataset& data, double beta) const;

  /// Total probability of the minimum-energy states.
  double ground_state_probability(double beta) const;
  /// ln of the total probability of excited states; -inf when every state
  /// is a ground state. Stays finite where 1 - P_ground rounds to zero.
  double excited_log_mass(double beta) const;
  std::size_t ground_state_count() const;
  /// Whether a state lies within tolerance of E_min.
  bool is_ground(StateCode code) const;

 private:
  BoltzmannMachine bm_;
  EnergyTable table_;
  double ground_tol_ = 0.0;
};

/// Exact marginal p(projection) by enumeration.
Distribution model_probability(const BoltzmannMachine& bm, double beta,
                               std::span<const std::size_t> projection);

/// D_KL(q || p) = sum_q q ln(q / p); +infinity when p vanishes on q's support.
double kl_divergence(const Distribution& q, const Distribution& p);

/// (1/2) sqrt(sum_i (sqrt(a_i) - sqrt(b_i))^2) over the union of supports.
double hellinger(const Distribution& a, const Distribution& b);

/// n log-spaced points on [lo, hi] (n == 1 yields {lo}).
std::vector<double> log_beta_grid(double lo = 0.1, double hi = 10.0, std::size_t n = 40);
std::vector<double> linear_beta_grid(double lo, double hi, std::size_t n);

struct BetaFit {
  double beta_star = 0.0;
  double distance = 0.0;
  std::vector<std::pair<double, double>> curve;  // (beta, Hellinger distance)
};

/// Inverse temperature whose exact distribution best matches the samples.
/// Grid minimum (ties: smallest beta) refined by golden section inside the
/// neighbouring grid cells.
BetaFit fit_beta(const SampleSet& ss, const BoltzmannMachine& bm,
                 std::span<const double> beta_grid);
BetaFit fit_beta(const SampleSet& ss, const BoltzmannMachine& bm,
                 std::span<const double> beta_grid,
                 std::span<const std::size_t> projection);

/// p(v_O | v_I) for a machine with at least one output node.
Distribution conditional_probability(const BoltzmannMachine& bm, double beta,
                                     std::span<const std::int8_t> inputs);

/// L = -sum_rows ln p(v_O | v_I).
double negative_conditional_log_likelihood(const BoltzmannMachine& bm, double beta,
                                           const Dataset& data);

struct BetaDerivatives {
  double first = 0.0;
  double second = 0.0;
};

/// dD_KL/dbeta = -E[E] + sum_v q(v) E[E|v];
/// d2D_KL/dbeta2 = sum_v q(v) (Var(E) - Var(E|v)).
BetaDerivatives dkl_beta_derivatives(const BoltzmannMachine& bm, double beta,
                                     const Dataset& data);

std::vector<std::pair<double, double>> ground_state_probability_curve(
    const BoltzmannMachine& bm, std::span<const double> beta_grid);

/// Ground-state and excited-state behaviour of one machine as beta grows.
struct PropositionCheck {
  /// Every state is a ground state; monotonicity is then non-strict.
  bool all_ground = false;
  /// Ground-state probability strictly increases over the grid.
  bool ground_monotone = false;
  /// Every excited state's probability eventually decreases.
  bool excited_decay = false;
  /// Lower excited levels start decaying at larger beta.
  bool decay_order = false;
  /// Beta beyond which all excited states decay (0 when all_ground).
  double beta_c = 0.0;
  bool passed() const { return ground_monotone && excited_decay && decay_order; }
};

/// Mean energy under p_beta; non-increasing in beta.
double mean_energy(const ExactModel& model, double beta);
PropositionCheck check_propositions(const ExactModel& model,
                                    std::span<const double> beta_grid);

/// Bracketed minimiser of beta -> D_KL on a grid, refined by golden section.
struct KlMinimum {
  double beta = 0.0;
  double dkl = 0.0;
  bool interior = false;  // false when the grid minimum sits on an end point
};
KlMinimum minimize_kl_over_beta(const ExactModel& model, const Dataset& data,
                                std::span<const double> beta_grid);

/// Minimiser of f on [lo, hi] assuming unimodality; `tol` is absolute in x.
/// Returns (x, f(x)).
std::pair<double, double> golden_section_minimize(const auto& f, double lo, double hi,
                                                  double tol = 1e-6) {
  const double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

}  // namespace qbm
