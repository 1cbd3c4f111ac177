#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qbm/dataset.hpp"
#include "qbm/ising.hpp"
#include "qbm/sampler.hpp"

namespace qbm {

enum class GradientMode { Exact, Sampled };
std::string_view to_string(GradientMode mode);
GradientMode parse_gradient_mode(std::string_view text);

/// When the clamped hidden subgraph is sampled during the data phase.
enum class ResamplePolicy {
  Always,      // one clamped call per data row
  WhenUnseen,  // reuse model-phase samples whose visible part matches the row
};
std::string_view to_string(ResamplePolicy policy);
ResamplePolicy parse_resample_policy(std::string_view text);

enum class InitKind { UniformRandom, FromModel };

struct TrainingConfig {
  double eta = 0.1;
  double lambda = 1e-5;
  double nu = 0.6;
  std::size_t max_steps = 1000;
  /// Stop once the largest applied parameter change is at or below this.
  double delta_theta_min = 1e-6;
  double h_max = 1.0;
  double j_max = 1.0;
  GradientMode gradient_mode = GradientMode::Exact;
  /// Backend and beta; Exact mode enumerates at sampler.beta.
  SamplerConfig sampler;
  InitKind init = InitKind::UniformRandom;
  /// Half-width of the uniform initialisation interval.
  double init_range = 0.5;
  /// Starting point for InitKind::FromModel (clipped to the bounds).
  std::optional<BoltzmannMachine> initial;
  std::uint64_t seed = 0;
  /// Default: Always in Exact mode, WhenUnseen in Sampled mode.
  std::optional<ResamplePolicy> resample;
  /// Evaluate the exact loss every n steps (0 disables; NaN beyond the cap).
  std::size_t loss_every = 1;
  bool record_parameters = false;
  /// Also enforce the recommended ranges lambda in [1e-5, 1e-2], nu <= 0.9.
  bool validate_ranges = false;

  void validate() const;
  ResamplePolicy resample_policy() const;
};

std::string training_config_to_json(const TrainingConfig& cfg);
/// Unknown keys are rejected; missing keys keep their defaults.
TrainingConfig training_config_from_json(const std::string& text);

/// Network shape; every pair of nodes is coupled.
struct Architecture {
  Partition partition;
};

/// "3v1h" (visible + hidden) or "4i3o10h" (inputs, outputs, hidden).
Architecture parse_architecture(std::string_view text);
std::string to_string(const Architecture& arch);

/// Loss gradient with respect to every bias and every coupling of a machine,
/// couplings in the machine's (k, l) order.
struct GradientEstimate {
  std::vector<double> d_bias;
  std::vector<double> d_coupling;

  /// Same layout as BoltzmannMachine::parameters().
  std::vector<double> flat() const;
  static GradientEstimate from_flat(const BoltzmannMachine& bm, std::span<const double> g);
  double max_abs() const;
};

/// dD_KL/dtheta without the beta prefactor: data-phase minus model-phase
/// expectation of dE/dtheta. `sampler` is used in Sampled mode only; when null
/// one is built from `cfg`.
GradientEstimate grad_dkl(const BoltzmannMachine& bm, const Dataset& data, GradientMode mode,
                          const SamplerConfig& cfg, Sampler* sampler = nullptr,
                          ResamplePolicy policy = ResamplePolicy::Always);

/// dL/dtheta of L = -sum ln p(v_O | v_I) without the beta prefactor:
/// expectation clamped at (v_I, v_O) minus expectation clamped at v_I.
GradientEstimate grad_ncll(const BoltzmannMachine& bm, const Dataset& data, GradientMode mode,
                           const SamplerConfig& cfg, Sampler* sampler = nullptr);

struct MomentumStep {
  std::vector<double> theta;
  /// Unclipped update, fed back as the next step's momentum.
  std::vector<double> delta;
};

/// delta = -eta g - lambda theta + nu prev; theta_new = clip(theta + delta).
/// The first `num_biases` entries are clipped to h_max, the rest to j_max.
MomentumStep momentum_update(std::span<const double> theta, std::span<const double> grad,
                             std::span<const double> prev_delta, const TrainingConfig& cfg,
                             std::size_t num_biases);

struct TraceRecord {
  std::size_t step = 0;
  double loss = 0.0;
  double delta_inf = 0.0;
  double seconds = 0.0;
  std::vector<double> parameters;
};

class TrainingTrace {
 public:
  void append(TraceRecord record);
  const std::vector<TraceRecord>& records() const noexcept { return records_; }
  bool empty() const noexcept { return records_.empty(); }
  const TraceRecord& back() const { return records_.back(); }
  /// Last finite loss, NaN when none was recorded.
  double final_loss() const;
  /// step,loss,delta_inf,seconds
  std::string to_csv() const;

 private:
  std::vector<TraceRecord> records_;
};

struct TrainingResult {
  BoltzmannMachine machine;
  TrainingTrace trace;
  std::size_t steps = 0;
  bool converged = false;
  /// Exact loss of the returned machine (NaN beyond the enumeration cap).
  double final_loss = 0.0;
  std::size_t full_sampler_calls = 0;
  std::size_t clamped_sampler_calls = 0;
};

/// Distribution matching: minimises D_KL(q || p_v).
TrainingResult train_distribution(const Dataset& data, const Architecture& arch,
                                  const TrainingConfig& cfg, Sampler* sampler = nullptr);

/// Function approximation: minimises -sum ln p(v_O | v_I). Needs an io split
/// matching the architecture.
TrainingResult train_function_approximator(const Dataset& data, const Architecture& arch,
                                           const TrainingConfig& cfg,
                                           Sampler* sampler = nullptr);

/// Initial machine for `arch` under `cfg` (random or from cfg.initial).
BoltzmannMachine initial_machine(const Architecture& arch, const TrainingConfig& cfg);

/// Central differences (f(theta + h) - f(theta - h)) / 2h for every parameter.
/// Bounds are not enforced on the perturbed machines.
GradientEstimate finite_difference_gradient(
    const std::function<double(const BoltzmannMachine&)>& loss, const BoltzmannMachine& bm,
    double step = 1e-5);

}  // namespace qbm
