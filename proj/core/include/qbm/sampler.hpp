#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "qbm/distribution.hpp"
#include "qbm/ising.hpp"

namespace qbm {

enum class Backend { Exact, Gibbs, Remote };

std::string_view to_string(Backend backend);
Backend parse_backend(std::string_view text);

struct SamplerConfig {
  /// Inverse temperature of p(s) ~ exp(-beta E(s)); 0 means infinite temperature.
  double beta = 1.0;
  std::size_t num_reads = 1000;
  /// Gibbs only: sweeps discarded before the first kept state.
  std::size_t burn_in = 1000;
  /// Gibbs only: sweeps between kept states.
  std::size_t thinning = 10;
  std::uint64_t seed = 0;
  Backend backend = Backend::Exact;
  /// Exact only: return every state weighted by its probability instead of draws.
  bool exhaustive = false;
  std::size_t enumeration_cap = kDefaultEnumerationCap;
  /// Remote only: base URL such as "http://127.0.0.1:8080".
  std::string endpoint;

  void validate() const;
};

/// Distinct states in lexicographic order with their multiplicities.
///
/// For exhaustive exact sets `counts` carries real probabilities summing to
/// one instead of integer draw counts.
struct SampleSet {
  std::vector<SpinState> states;
  std::vector<double> counts;
  double beta = 1.0;
  std::size_t num_reads = 0;
  std::string backend_id;
  bool exhaustive = false;

  std::size_t width() const { return states.empty() ? 0 : states.front().size(); }
  double total_weight() const;
  void validate() const;
};

/// Union of two sample sets from the same machine; counts add.
SampleSet merge(const SampleSet& a, const SampleSet& b);

/// Normalised counts projected onto `projection` (node indices).
Distribution empirical_distribution(const SampleSet& ss,
                                    std::span<const std::size_t> projection);
/// Projection onto every node.
Distribution empirical_distribution(const SampleSet& ss);

SampleSet exact_sample(const BoltzmannMachine& bm, const SamplerConfig& cfg);
SampleSet gibbs_sample(const BoltzmannMachine& bm, const SamplerConfig& cfg);

/// Backend interface used by the trainers.
class Sampler {
 public:
  virtual ~Sampler() = default;
  virtual SampleSet sample(const BoltzmannMachine& bm, const SamplerConfig& cfg) = 0;
};

class ExactSampler final : public Sampler {
 public:
  SampleSet sample(const BoltzmannMachine& bm, const SamplerConfig& cfg) override {
    return exact_sample(bm, cfg);
  }
};

class GibbsSampler final : public Sampler {
 public:
  SampleSet sample(const BoltzmannMachine& bm, const SamplerConfig& cfg) override {
    return gibbs_sample(bm, cfg);
  }
};

/// Backend chosen by cfg.backend (Remote uses cfg.endpoint).
std::unique_ptr<Sampler> make_sampler(const SamplerConfig& cfg);

/// SampleSet file: {"beta", "num_reads", "states": [[bits]...], "counts": [...],
/// "basis", "backend_id", "exhaustive"}.
std::string sample_set_to_json(const SampleSet& ss);
SampleSet sample_set_from_json(const std::string& text);

}  // namespace qbm
