#include "qbm/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

#include "json.hpp"
#include "qbm/energy_table.hpp"
#include "qbm/error.hpp"
#include "qbm/metrics.hpp"

namespace qbm {

std::string_view to_string(GradientMode mode) {
  return mode == GradientMode::Exact ? "exact" : "sampled";
}

GradientMode parse_gradient_mode(std::string_view text) {
  if (text == "exact") return GradientMode::Exact;
  if (text == "sampled") return GradientMode::Sampled;
  throw InvalidArgument("unknown gradient mode '" + std::string(text) + "'");
}

std::string_view to_string(ResamplePolicy policy) {
  return policy == ResamplePolicy::Always ? "always" : "when_unseen";
}

ResamplePolicy parse_resample_policy(std::string_view text) {
  if (text == "always") return ResamplePolicy::Always;
  if (text == "when_unseen") return ResamplePolicy::WhenUnseen;
  throw InvalidArgument("unknown resample policy '" + std::string(text) + "'");
}

void TrainingConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidArgument("eta must be > 0");
  if (!(lambda >= 0.0 && lambda < 1.0)) throw InvalidArgument("lambda must lie in [0, 1)");
  if (!(nu >= 0.0 && nu < 1.0)) throw InvalidArgument("nu must lie in [0, 1)");
  if (!(delta_theta_min >= 0.0)) throw InvalidArgument("delta_theta_min must be >= 0");
  if (!(h_max > 0.0) || !(j_max > 0.0)) throw InvalidArgument("h_max and j_max must be > 0");
  if (!(init_range >= 0.0) || !std::isfinite(init_range)) throw InvalidArgument("init_range must be >= 0");
  if (init == InitKind::FromModel && !initial) throw InvalidArgument("init from model needs a machine");
  if (validate_ranges) {
    if (lambda < 1e-5 || lambda > 1e-2) throw InvalidArgument("lambda outside [1e-5, 1e-2]");
    if (nu > 0.9) throw InvalidArgument("nu above 0.9");
  }
  sampler.validate();
}

ResamplePolicy TrainingConfig::resample_policy() const {
  if (resample) return *resample;
  return gradient_mode == GradientMode::Exact ? ResamplePolicy::Always : ResamplePolicy::WhenUnseen;
}

// ---------------------------------------------------------------------------
// Config JSON

using nlohmann::json;

std::string training_config_to_json(const TrainingConfig& cfg) {
  json j;
  j["eta"] = cfg.eta;
  j["lambda"] = cfg.lambda;
  j["nu"] = cfg.nu;
  j["max_steps"] = cfg.max_steps;
  j["delta_theta_min"] = cfg.delta_theta_min;
  j["h_max"] = cfg.h_max;
  j["j_max"] = cfg.j_max;
  j["gradient_mode"] = std::string(to_string(cfg.gradient_mode));
  j["sampler"] = {{"beta", cfg.sampler.beta},
                  {"num_reads", cfg.sampler.num_reads},
                  {"burn_in", cfg.sampler.burn_in},
                  {"thinning", cfg.sampler.thinning},
                  {"seed", cfg.sampler.seed},
                  {"backend", std::string(to_string(cfg.sampler.backend))},
                  {"exhaustive", cfg.sampler.exhaustive},
                  {"enumeration_cap", cfg.sampler.enumeration_cap},
                  {"endpoint", cfg.sampler.endpoint}};
  j["init"] = cfg.init == InitKind::UniformRandom ? "uniform" : "from_model";
  j["init_range"] = cfg.init_range;
  j["seed"] = cfg.seed;
  if (cfg.resample) j["resample"] = std::string(to_string(*cfg.resample));
  j["loss_every"] = cfg.loss_every;
  j["record_parameters"] = cfg.record_parameters;
  j["validate_ranges"] = cfg.validate_ranges;
  return j.dump(2);
}

namespace {

template <typename T>
void read_key(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> known,
                    const char* where) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ParseError(std::string("unknown key '") + key + "' in " + where);
    }
  }
}

}  // namespace

TrainingConfig training_config_from_json(const std::string& text) {
  TrainingConfig cfg;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw ParseError("training config must be a JSON object");
    reject_unknown(j,
                   {"eta", "lambda", "nu", "max_steps", "delta_theta_min", "h_max", "j_max",
                    "gradient_mode", "sampler", "init", "init_range", "seed", "resample",
                    "loss_every", "record_parameters", "validate_ranges"},
                   "training config");
    read_key(j, "eta", cfg.eta);
    read_key(j, "lambda", cfg.lambda);
    read_key(j, "nu", cfg.nu);
    read_key(j, "max_steps", cfg.max_steps);
    read_key(j, "delta_theta_min", cfg.delta_theta_min);
    read_key(j, "h_max", cfg.h_max);
    read_key(j, "j_max", cfg.j_max);
    if (j.contains("gradient_mode")) {
      cfg.gradient_mode = parse_gradient_mode(j.at("gradient_mode").get<std::string>());
    }
    if (j.contains("sampler")) {
      const auto& s = j.at("sampler");
      reject_unknown(s,
                     {"beta", "num_reads", "burn_in", "thinning", "seed", "backend",
                      "exhaustive", "enumeration_cap", "endpoint"},
                     "sampler config");
      read_key(s, "beta", cfg.sampler.beta);
      read_key(s, "num_reads", cfg.sampler.num_reads);
      read_key(s, "burn_in", cfg.sampler.burn_in);
      read_key(s, "thinning", cfg.sampler.thinning);
      read_key(s, "seed", cfg.sampler.seed);
      if (s.contains("backend")) cfg.sampler.backend = parse_backend(s.at("backend").get<std::string>());
      read_key(s, "exhaustive", cfg.sampler.exhaustive);
      read_key(s, "enumeration_cap", cfg.sampler.enumeration_cap);
      read_key(s, "endpoint", cfg.sampler.endpoint);
    }
    if (j.contains("init")) {
      const auto init = j.at("init").get<std::string>();
      if (init == "uniform") {
        cfg.init = InitKind::UniformRandom;
      } else if (init == "from_model") {
        cfg.init = InitKind::FromModel;
      } else {
        throw ParseError("unknown init '" + init + "'");
      }
    }
    read_key(j, "init_range", cfg.init_range);
    read_key(j, "seed", cfg.seed);
    if (j.contains("resample")) cfg.resample = parse_resample_policy(j.at("resample").get<std::string>());
    read_key(j, "loss_every", cfg.loss_every);
    read_key(j, "record_parameters", cfg.record_parameters);
    read_key(j, "validate_ranges", cfg.validate_ranges);
  } catch (const json::exception& e) {
    throw ParseError(std::string("training config: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("training config: ") + e.what());
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Architecture

Architecture parse_architecture(std::string_view text) {
  Partition p{};
  bool saw_v = false, saw_io = false, saw_h = false;
  std::size_t i = 0;
  auto fail = [&] { return InvalidArgument("bad architecture '" + std::string(text) + "'"); };
  while (i < text.size()) {
    std::size_t value = 0, digits = 0;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
      value = value * 10 + static_cast<std::size_t>(text[i] - '0');
      ++i;
      ++digits;
    }
    if (digits == 0 || i == text.size()) throw fail();
    switch (text[i++]) {
      case 'v':
        if (saw_v || saw_io) throw fail();
        saw_v = true;
        p.inputs = value;
        break;
      case 'i':
        if (saw_v || p.inputs) throw fail();
        saw_io = true;
        p.inputs = value;
        break;
      case 'o':
        if (saw_v || p.outputs) throw fail();
        saw_io = true;
        p.outputs = value;
        break;
      case 'h':
        if (saw_h) throw fail();
        saw_h = true;
        p.hidden = value;
        break;
      default:
        throw fail();
    }
  }
  if (p.visible() == 0) throw fail();
  if (p.total() > 63) throw InvalidArgument("architecture wider than 63 nodes");
  return Architecture{p};
}

std::string to_string(const Architecture& arch) {
  const auto& p = arch.partition;
  std::string out;
  if (p.outputs == 0) {
    out = std::to_string(p.inputs) + "v";
  } else {
    out = std::to_string(p.inputs) + "i" + std::to_string(p.outputs) + "o";
  }
  return out + std::to_string(p.hidden) + "h";
}

// ---------------------------------------------------------------------------
// Gradients

std::vector<double> GradientEstimate::flat() const {
  std::vector<double> out(d_bias);
  out.insert(out.end(), d_coupling.begin(), d_coupling.end());
  return out;
}

GradientEstimate GradientEstimate::from_flat(const BoltzmannMachine& bm, std::span<const double> g) {
  if (g.size() != bm.num_parameters()) throw InvalidArgument("gradient length differs from machine");
  GradientEstimate out;
  out.d_bias.assign(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(bm.size()));
  out.d_coupling.assign(g.begin() + static_cast<std::ptrdiff_t>(bm.size()), g.end());
  return out;
}

double GradientEstimate::max_abs() const {
  double m = 0.0;
  for (double v : d_bias) m = std::max(m, std::abs(v));
  for (double v : d_coupling) m = std::max(m, std::abs(v));
  return m;
}

namespace {

/// Weighted first and second moments of node bits over the full machine.
class PhaseSums {
 public:
  explicit PhaseSums(std::size_t n) : n_(n), mean_(n, 0.0), pair_(n * n, 0.0) {}

  /// Adds weight * E[...] for a state whose `clamped` nodes are fixed to
  /// `bits` and whose `free_nodes` follow the distribution with moments `m`.
  void add(double weight, std::size_t clamped, std::span<const std::int8_t> bits,
           std::span<const std::size_t> free_nodes, const Moments& m) {
    for (std::size_t a = 0; a < clamped; ++a) {
      if (!bits[a]) continue;
      mean_[a] += weight;
      for (std::size_t b = a + 1; b < clamped; ++b) {
        if (bits[b]) pair_[a * n_ + b] += weight;
      }
      for (std::size_t f = 0; f < free_nodes.size(); ++f) {
        at(a, free_nodes[f]) += weight * m.mean[f];
      }
    }
    for (std::size_t f = 0; f < free_nodes.size(); ++f) {
      mean_[free_nodes[f]] += weight * m.mean[f];
      for (std::size_t g = f + 1; g < free_nodes.size(); ++g) {
        at(free_nodes[f], free_nodes[g]) += weight * m.second(f, g);
      }
    }
  }

  /// E[dE/dtheta] in the machine's basis: s_i for biases, s_k s_l for couplings.
  void write(const BoltzmannMachine& bm, std::vector<double>& d_bias,
             std::vector<double>& d_coupling) const {
    const bool pm = bm.basis() == Basis::PlusMinus;
    d_bias.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) d_bias[i] = pm ? 2.0 * mean_[i] - 1.0 : mean_[i];
    const auto& cs = bm.couplings();
    d_coupling.resize(cs.size());
    for (std::size_t c = 0; c < cs.size(); ++c) {
      const double p = pair_[cs[c].k * n_ + cs[c].l];
      d_coupling[c] = pm ? 4.0 * p - 2.0 * mean_[cs[c].k] - 2.0 * mean_[cs[c].l] + 1.0 : p;
    }
  }

 private:
  double& at(std::size_t a, std::size_t b) {
    return a < b ? pair_[a * n_ + b] : pair_[b * n_ + a];
  }

  std::size_t n_;
  std::vector<double> mean_;
  std::vector<double> pair_;  // upper triangle used
};

Moments empty_moments() { return Moments{}; }

/// Bit moments of the sample states, restricted to rows accepted by `keep`
/// and to columns [first, width).
template <typename Keep>
std::pair<Moments, double> sample_moments(const SampleSet& ss, std::size_t first, Keep keep) {
  const std::size_t w = ss.width() - first;
  Moments m;
  m.width = w;
  m.mean.assign(w, 0.0);
  m.pair.assign(w * w, 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < ss.states.size(); ++r) {
    const auto& v = ss.states[r].values;
    if (!keep(v)) continue;
    const double c = ss.counts[r];
    total += c;
    for (std::size_t a = 0; a < w; ++a) {
      if (v[first + a] != 1) continue;
      m.mean[a] += c;
      for (std::size_t b = a + 1; b < w; ++b) {
        if (v[first + b] == 1) m.pair[a * w + b] += c;
      }
    }
  }
  if (total > 0.0) {
    for (auto& x : m.mean) x /= total;
    for (auto& x : m.pair) x /= total;
  }
  for (std::size_t a = 0; a < w; ++a) {
    m.pair[a * w + a] = m.mean[a];
    for (std::size_t b = a + 1; b < w; ++b) m.pair[b * w + a] = m.pair[a * w + b];
  }
  return {std::move(m), total};
}

std::vector<std::int8_t> to_basis(std::span<const std::int8_t> bits, Basis basis) {
  std::vector<std::int8_t> out(bits.begin(), bits.end());
  if (basis == Basis::PlusMinus) {
    for (auto& v : out) v = v ? 1 : -1;
  }
  return out;
}

std::vector<std::size_t> iota_nodes(std::size_t first, std::size_t last) {
  std::vector<std::size_t> out;
  for (std::size_t i = first; i < last; ++i) out.push_back(i);
  return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Exact free-node distribution of the machine with its first `bits.size()`
/// nodes clamped. Returns the clamp result and the free-node probability table.
struct ClampedTable {
  ClampResult clamp;
  std::vector<double> probs;
  Moments moments;
};

ClampedTable exact_clamped(const BoltzmannMachine& bm, std::span<const std::int8_t> bits,
                           double beta, std::size_t cap) {
  ClampedTable out;
  out.clamp = clamp_visible(bm, to_basis(bits, bm.basis()));
  const std::size_t w = out.clamp.reduced.size();
  if (w == 0) {
    out.probs = {1.0};
    out.moments = empty_moments();
    return out;
  }
  EnergyTable table(out.clamp.reduced, cap);
  out.probs = table.boltzmann(beta);
  out.moments = moments_from_table(out.probs, w);
  return out;
}

Moments sampled_clamped(const BoltzmannMachine& bm, std::span<const std::int8_t> bits,
                        const SamplerConfig& cfg, std::uint64_t salt, Sampler& sampler,
                        std::vector<std::size_t>& free_nodes) {
  auto cr = clamp_visible(bm, to_basis(bits, bm.basis()));
  free_nodes = cr.free_nodes;
  if (cr.reduced.size() == 0) return empty_moments();
  SamplerConfig call = cfg;
  call.seed = mix_seed(cfg.seed, salt);
  const auto ss = sampler.sample(cr.reduced, call);
  return sample_moments(ss, 0, [](const auto&) { return true; }).first;
}

void check_visible(const BoltzmannMachine& bm, const Dataset& data) {
  if (data.width() != bm.num_visible()) {
    throw InvalidArgument("dataset width " + std::to_string(data.width()) +
                          " differs from visible node count " + std::to_string(bm.num_visible()));
  }
}

void check_io(const BoltzmannMachine& bm, const Dataset& data) {
  if (!data.io_split()) throw InvalidArgument("function training needs an input/output split");
  if (data.io_split()->inputs != bm.num_inputs() || data.io_split()->outputs != bm.num_outputs()) {
    throw InvalidArgument("dataset split differs from machine partition");
  }
  if (bm.num_outputs() == 0) throw InvalidArgument("machine has no output nodes");
}

/// One exact pass: gradient plus the loss of the current machine.
struct ExactPass {
  GradientEstimate grad;
  double loss = 0.0;
};

ExactPass exact_dkl(const BoltzmannMachine& bm, const Dataset& data, double beta, std::size_t cap) {
  check_visible(bm, data);
  const std::size_t n = bm.size();
  const std::size_t m = bm.num_visible();

  PhaseSums data_phase(n), model_phase(n);
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto ct = exact_clamped(bm, data.row(r), beta, cap);
    data_phase.add(data.weights()[r], m, data.row(r), ct.clamp.free_nodes, ct.moments);
  }

  EnergyTable table(bm, cap);
  const auto p = table.boltzmann(beta);
  const auto all = iota_nodes(0, n);
  model_phase.add(1.0, 0, {}, all, moments_from_table(p, n));

  ExactPass out;
  std::vector<double> db, dc;
  data_phase.write(bm, out.grad.d_bias, out.grad.d_coupling);
  model_phase.write(bm, db, dc);
  for (std::size_t i = 0; i < db.size(); ++i) out.grad.d_bias[i] -= db[i];
  for (std::size_t i = 0; i < dc.size(); ++i) out.grad.d_coupling[i] -= dc[i];

  const auto visible = iota_nodes(0, m);
  out.loss = kl_divergence(data.distribution(), marginalize(p, n, visible));
  return out;
}

ExactPass exact_ncll(const BoltzmannMachine& bm, const Dataset& data, double beta, std::size_t cap) {
  check_io(bm, data);
  const std::size_t n = bm.size();
  const std::size_t mi = bm.num_inputs();
  const std::size_t mo = bm.num_outputs();
  const auto out_nodes = iota_nodes(0, mo);

  PhaseSums clamped_io(n), clamped_in(n);
  double loss = 0.0;
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto in = exact_clamped(bm, data.inputs(r), beta, cap);
    clamped_in.add(1.0, mi, data.inputs(r), in.clamp.free_nodes, in.moments);
    const auto cond = marginalize(in.probs, in.clamp.reduced.size(), out_nodes);
    loss -= std::log(cond.probability(encode_state(data.outputs(r), Basis::ZeroOne)));

    const auto io = exact_clamped(bm, data.row(r), beta, cap);
    clamped_io.add(1.0, mi + mo, data.row(r), io.clamp.free_nodes, io.moments);
  }

  ExactPass out;
  std::vector<double> db, dc;
  clamped_io.write(bm, out.grad.d_bias, out.grad.d_coupling);
  clamped_in.write(bm, db, dc);
  for (std::size_t i = 0; i < db.size(); ++i) out.grad.d_bias[i] -= db[i];
  for (std::size_t i = 0; i < dc.size(); ++i) out.grad.d_coupling[i] -= dc[i];
  out.loss = loss;
  return out;
}

GradientEstimate difference(const BoltzmannMachine& bm, const PhaseSums& plus, const PhaseSums& minus) {
  GradientEstimate out;
  std::vector<double> db, dc;
  plus.write(bm, out.d_bias, out.d_coupling);
  minus.write(bm, db, dc);
  for (std::size_t i = 0; i < db.size(); ++i) out.d_bias[i] -= db[i];
  for (std::size_t i = 0; i < dc.size(); ++i) out.d_coupling[i] -= dc[i];
  return out;
}

GradientEstimate sampled_dkl(const BoltzmannMachine& bm, const Dataset& data,
                             const SamplerConfig& cfg, Sampler& sampler, ResamplePolicy policy) {
  check_visible(bm, data);
  const std::size_t n = bm.size();
  const std::size_t m = bm.num_visible();

  SamplerConfig full = cfg;
  full.seed = mix_seed(cfg.seed, 0);
  const auto model = sampler.sample(bm, full);
  if (model.width() != n) throw ProtocolError("sampler returned states of the wrong width");

  PhaseSums data_phase(n), model_phase(n);
  const auto all = iota_nodes(0, n);
  model_phase.add(1.0, 0, {}, all, sample_moments(model, 0, [](const auto&) { return true; }).first);

  const auto hidden = iota_nodes(m, n);
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto row = to_basis(data.row(r), bm.basis());
    if (policy == ResamplePolicy::WhenUnseen) {
      auto [hm, seen] = sample_moments(model, m, [&](const std::vector<std::int8_t>& v) {
        return std::equal(row.begin(), row.end(), v.begin());
      });
      if (seen > 0.0) {
        data_phase.add(data.weights()[r], m, data.row(r), hidden, hm);
        continue;
      }
    }
    std::vector<std::size_t> free_nodes;
    const auto hm = sampled_clamped(bm, data.row(r), cfg, r + 1, sampler, free_nodes);
    data_phase.add(data.weights()[r], m, data.row(r), free_nodes, hm);
  }
  return difference(bm, data_phase, model_phase);
}

GradientEstimate sampled_ncll(const BoltzmannMachine& bm, const Dataset& data,
                              const SamplerConfig& cfg, Sampler& sampler) {
  check_io(bm, data);
  const std::size_t n = bm.size();
  const std::size_t mi = bm.num_inputs();
  const std::size_t mv = bm.num_visible();

  PhaseSums clamped_io(n), clamped_in(n);
  std::vector<std::size_t> free_nodes;
  for (std::size_t r = 0; r < data.size(); ++r) {
    auto m_in = sampled_clamped(bm, data.inputs(r), cfg, 2 * r + 1, sampler, free_nodes);
    clamped_in.add(1.0, mi, data.inputs(r), free_nodes, m_in);
    auto m_io = sampled_clamped(bm, data.row(r), cfg, 2 * r + 2, sampler, free_nodes);
    clamped_io.add(1.0, mv, data.row(r), free_nodes, m_io);
  }
  return difference(bm, clamped_io, clamped_in);
}

}  // namespace

GradientEstimate grad_dkl(const BoltzmannMachine& bm, const Dataset& data, GradientMode mode,
                          const SamplerConfig& cfg, Sampler* sampler, ResamplePolicy policy) {
  cfg.validate();
  if (mode == GradientMode::Exact) return exact_dkl(bm, data, cfg.beta, cfg.enumeration_cap).grad;
  std::unique_ptr<Sampler> owned;
  if (!sampler) {
    owned = make_sampler(cfg);
    sampler = owned.get();
  }
  return sampled_dkl(bm, data, cfg, *sampler, policy);
}

GradientEstimate grad_ncll(const BoltzmannMachine& bm, const Dataset& data, GradientMode mode,
                           const SamplerConfig& cfg, Sampler* sampler) {
  cfg.validate();
  if (mode == GradientMode::Exact) return exact_ncll(bm, data, cfg.beta, cfg.enumeration_cap).grad;
  std::unique_ptr<Sampler> owned;
  if (!sampler) {
    owned = make_sampler(cfg);
    sampler = owned.get();
  }
  return sampled_ncll(bm, data, cfg, *sampler);
}

// ---------------------------------------------------------------------------
// Update rule

MomentumStep momentum_update(std::span<const double> theta, std::span<const double> grad,
                             std::span<const double> prev_delta, const TrainingConfig& cfg,
                             std::size_t num_biases) {
  if (grad.size() != theta.size() || prev_delta.size() != theta.size()) {
    throw InvalidArgument("momentum_update: length mismatch");
  }
  if (num_biases > theta.size()) throw InvalidArgument("momentum_update: bias count too large");
  MomentumStep out;
  out.theta.resize(theta.size());
  out.delta.resize(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double d = -cfg.eta * grad[i] - cfg.lambda * theta[i] + cfg.nu * prev_delta[i];
    const double cap = i < num_biases ? cfg.h_max : cfg.j_max;
    out.delta[i] = d;
    out.theta[i] = std::clamp(theta[i] + d, -cap, cap);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trace

void TrainingTrace::append(TraceRecord record) {
  if (!records_.empty() && record.step <= records_.back().step) {
    throw InvalidArgument("trace steps must increase");
  }
  records_.push_back(std::move(record));
}

double TrainingTrace::final_loss() const {
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    if (std::isfinite(it->loss)) return it->loss;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::string TrainingTrace::to_csv() const {
  std::ostringstream out;
  out.precision(12);
  out << "step,loss,delta_inf,seconds\n";
  for (const auto& r : records_) {
    out << r.step << ",";
    if (std::isnan(r.loss)) {
      out << "nan";
    } else {
      out << r.loss;
    }
    out << "," << r.delta_inf << "," << r.seconds << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Trainers

BoltzmannMachine initial_machine(const Architecture& arch, const TrainingConfig& cfg) {
  const Bounds bounds{cfg.h_max, cfg.j_max, true};
  if (cfg.init == InitKind::FromModel) {
    if (!cfg.initial) throw InvalidArgument("init from model needs a machine");
    BoltzmannMachine bm = *cfg.initial;
    if (bm.partition() != arch.partition) {
      throw InvalidArgument("initial machine partition differs from architecture");
    }
    bm.set_bounds(Bounds{cfg.h_max, cfg.j_max, false});
    auto theta = bm.parameters();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double cap = i < bm.size() ? cfg.h_max : cfg.j_max;
      theta[i] = std::clamp(theta[i], -cap, cap);
    }
    bm.set_parameters(theta);
    bm.set_bounds(bounds);
    return bm;
  }
  BoltzmannMachine bm = BoltzmannMachine::complete(arch.partition, Basis::ZeroOne, bounds);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> dist(-cfg.init_range, cfg.init_range);
  auto theta = bm.parameters();
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double cap = i < bm.size() ? cfg.h_max : cfg.j_max;
    theta[i] = std::clamp(dist(rng), -cap, cap);
  }
  bm.set_parameters(theta);
  return bm;
}

namespace {

/// Forwards to another sampler while counting full-graph and clamped calls.
class CountingSampler final : public Sampler {
 public:
  CountingSampler(Sampler& inner, std::size_t full_size) : inner_(inner), full_size_(full_size) {}

  SampleSet sample(const BoltzmannMachine& bm, const SamplerConfig& cfg) override {
    ++(bm.size() == full_size_ ? full : clamped);
    return inner_.sample(bm, cfg);
  }

  std::size_t full = 0;
  std::size_t clamped = 0;

 private:
  Sampler& inner_;
  std::size_t full_size_;
};

enum class Objective { Distribution, Function };

TrainingResult train(const Dataset& data, const Architecture& arch, const TrainingConfig& cfg,
                     Sampler* sampler, Objective objective) {
  cfg.validate();
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();

  TrainingResult result;
  BoltzmannMachine bm = initial_machine(arch, cfg);
  if (objective == Objective::Distribution) {
    check_visible(bm, data);
  } else {
    check_io(bm, data);
  }

  std::unique_ptr<Sampler> owned;
  std::unique_ptr<CountingSampler> counter;
  if (cfg.gradient_mode == GradientMode::Sampled) {
    if (!sampler) {
      owned = make_sampler(cfg.sampler);
      sampler = owned.get();
    }
    counter = std::make_unique<CountingSampler>(*sampler, bm.size());
  }

  const double beta = cfg.sampler.beta;
  const std::size_t cap = cfg.sampler.enumeration_cap;
  auto exact_loss = [&](const BoltzmannMachine& m) {
    if (m.size() > cap) return std::numeric_limits<double>::quiet_NaN();
    ExactModel model(m, cap);
    return objective == Objective::Distribution ? model.kl(data, beta) : model.ncll(data, beta);
  };

  auto theta = bm.parameters();
  std::vector<double> prev(theta.size(), 0.0);
  for (std::size_t step = 1; step <= cfg.max_steps; ++step) {
    const bool want_loss = cfg.loss_every > 0 && (step - 1) % cfg.loss_every == 0;
    double loss = std::numeric_limits<double>::quiet_NaN();
    GradientEstimate grad;
    if (cfg.gradient_mode == GradientMode::Exact) {
      auto pass = objective == Objective::Distribution ? exact_dkl(bm, data, beta, cap)
                                                       : exact_ncll(bm, data, beta, cap);
      grad = std::move(pass.grad);
      if (want_loss) loss = pass.loss;
    } else {
      SamplerConfig call = cfg.sampler;
      call.seed = mix_seed(cfg.sampler.seed, step);
      grad = objective == Objective::Distribution
                 ? sampled_dkl(bm, data, call, *counter, cfg.resample_policy())
                 : sampled_ncll(bm, data, call, *counter);
      if (want_loss) loss = exact_loss(bm);
    }

    const auto upd = momentum_update(theta, grad.flat(), prev, cfg, bm.size());
    double delta_inf = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      delta_inf = std::max(delta_inf, std::abs(upd.theta[i] - theta[i]));
    }
    theta = upd.theta;
    prev = upd.delta;
    bm.set_parameters(theta);

    TraceRecord rec;
    rec.step = step;
    rec.loss = loss;
    rec.delta_inf = delta_inf;
    rec.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    if (cfg.record_parameters) rec.parameters = theta;
    result.trace.append(std::move(rec));
    result.steps = step;
    if (delta_inf <= cfg.delta_theta_min) {
      result.converged = true;
      break;
    }
  }
  if (counter) {
    result.full_sampler_calls = counter->full;
    result.clamped_sampler_calls = counter->clamped;
  }
  result.final_loss = exact_loss(bm);
  result.machine = std::move(bm);
  return result;
}

}  // namespace

TrainingResult train_distribution(const Dataset& data, const Architecture& arch,
                                  const TrainingConfig& cfg, Sampler* sampler) {
  return train(data, arch, cfg, sampler, Objective::Distribution);
}

TrainingResult train_function_approximator(const Dataset& data, const Architecture& arch,
                                           const TrainingConfig& cfg, Sampler* sampler) {
  return train(data, arch, cfg, sampler, Objective::Function);
}

GradientEstimate finite_difference_gradient(
    const std::function<double(const BoltzmannMachine&)>& loss, const BoltzmannMachine& bm,
    double step) {
  if (!(step > 0.0)) throw InvalidArgument("finite difference step must be > 0");
  BoltzmannMachine probe = bm;
  Bounds loose = bm.bounds();
  loose.enforced = false;
  probe.set_bounds(loose);
  const auto theta = bm.parameters();
  std::vector<double> g(theta.size());
  auto shifted = theta;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    shifted[i] = theta[i] + step;
    probe.set_parameters(shifted);
    const double up = loss(probe);
    shifted[i] = theta[i] - step;
    probe.set_parameters(shifted);
    const double down = loss(probe);
    shifted[i] = theta[i];
    g[i] = (up - down) / (2.0 * step);
  }
  return GradientEstimate::from_flat(bm, g);
}

}  // namespace qbm
