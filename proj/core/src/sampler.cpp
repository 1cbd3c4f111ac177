#include "qbm/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "json.hpp"
#include "qbm/energy_table.hpp"
#include "qbm/error.hpp"
#include "qbm/remote.hpp"

namespace qbm {

std::string_view to_string(Backend backend) {
  switch (backend) {
    case Backend::Exact: return "exact";
    case Backend::Gibbs: return "gibbs";
    case Backend::Remote: return "remote";
  }
  return "exact";
}

Backend parse_backend(std::string_view text) {
  if (text == "exact") return Backend::Exact;
  if (text == "gibbs") return Backend::Gibbs;
  if (text == "remote") return Backend::Remote;
  throw InvalidArgument("unknown sampler backend '" + std::string(text) + "'");
}

void SamplerConfig::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta must be finite and >= 0");
  if (num_reads == 0 && !exhaustive) throw InvalidArgument("num_reads must be >= 1");
  if (thinning == 0) throw InvalidArgument("thinning must be >= 1");
}

double SampleSet::total_weight() const {
  double total = 0.0;
  for (double c : counts) total += c;
  return total;
}

void SampleSet::validate() const {
  if (states.size() != counts.size()) throw InvalidArgument("sample set: states/counts length mismatch");
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].size() != width()) throw InvalidArgument("sample set: ragged states");
    states[i].validate();
    if (i > 0 && !(states[i - 1].values < states[i].values)) {
      throw InvalidArgument("sample set: states must be distinct and sorted");
    }
    if (exhaustive) {
      if (!(counts[i] >= 0.0)) throw InvalidArgument("sample set: negative weight");
    } else if (!(counts[i] >= 1.0) || counts[i] != std::floor(counts[i])) {
      throw InvalidArgument("sample set: counts must be positive integers");
    }
  }
  if (exhaustive) {
    if (std::abs(total_weight() - 1.0) > 1e-9) throw InvalidArgument("sample set: weights must sum to 1");
  } else if (total_weight() != static_cast<double>(num_reads)) {
    throw InvalidArgument("sample set: counts do not sum to num_reads");
  }
}

namespace {

using Tally = std::map<std::vector<std::int8_t>, double>;

SampleSet from_tally(const Tally& tally, Basis basis) {
  SampleSet ss;
  ss.states.reserve(tally.size());
  ss.counts.reserve(tally.size());
  for (const auto& [values, count] : tally) {
    SpinState s;
    s.values = values;
    s.basis = basis;
    ss.states.push_back(std::move(s));
    ss.counts.push_back(count);
  }
  return ss;
}

}  // namespace

SampleSet merge(const SampleSet& a, const SampleSet& b) {
  if (a.states.empty()) return b;
  if (b.states.empty()) return a;
  if (a.width() != b.width() || a.states.front().basis != b.states.front().basis) {
    throw InvalidArgument("merge: sample sets describe different machines");
  }
  if (a.exhaustive != b.exhaustive) throw InvalidArgument("merge: cannot mix exhaustive and drawn sets");
  Tally tally;
  for (const auto* ss : {&a, &b}) {
    for (std::size_t i = 0; i < ss->states.size(); ++i) tally[ss->states[i].values] += ss->counts[i];
  }
  SampleSet out = from_tally(tally, a.states.front().basis);
  out.beta = a.beta;
  out.num_reads = a.num_reads + b.num_reads;
  out.backend_id = a.backend_id == b.backend_id ? a.backend_id : a.backend_id + "+" + b.backend_id;
  out.exhaustive = a.exhaustive;
  if (out.exhaustive) {
    const double total = out.total_weight();
    for (auto& c : out.counts) c /= total;
  }
  return out;
}

Distribution empirical_distribution(const SampleSet& ss,
                                    std::span<const std::size_t> projection) {
  std::map<StateCode, double> mass;
  double total = 0.0;
  for (std::size_t i = 0; i < ss.states.size(); ++i) {
    StateCode code = 0;
    for (auto node : projection) {
      if (node >= ss.states[i].size()) throw InvalidArgument("projection node out of range");
      code = (code << 1) | (ss.states[i].values[node] == 1 ? 1u : 0u);
    }
    mass[code] += ss.counts[i];
    total += ss.counts[i];
  }
  std::vector<StateCode> support;
  std::vector<double> probs;
  for (const auto& [code, m] : mass) {
    support.push_back(code);
    probs.push_back(m / total);
  }
  return Distribution(projection.size(), std::move(support), std::move(probs));
}

Distribution empirical_distribution(const SampleSet& ss) {
  std::vector<std::size_t> all(ss.width());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return empirical_distribution(ss, all);
}

SampleSet exact_sample(const BoltzmannMachine& bm, const SamplerConfig& cfg) {
  cfg.validate();
  EnergyTable table(bm, cfg.enumeration_cap);
  auto probs = table.boltzmann(cfg.beta);

  SampleSet ss;
  ss.beta = cfg.beta;
  ss.backend_id = "exact";
  if (cfg.exhaustive) {
    ss.exhaustive = true;
    ss.num_reads = 0;
    ss.states.reserve(probs.size());
    for (std::size_t code = 0; code < probs.size(); ++code) {
      ss.states.push_back(decode_state(code, bm.size(), bm.basis()));
    }
    ss.counts = std::move(probs);
    return ss;
  }

  std::mt19937_64 rng(cfg.seed);
  std::discrete_distribution<std::size_t> pick(probs.begin(), probs.end());
  std::map<StateCode, double> counts;
  for (std::size_t r = 0; r < cfg.num_reads; ++r) counts[pick(rng)] += 1.0;
  for (const auto& [code, c] : counts) {
    ss.states.push_back(decode_state(code, bm.size(), bm.basis()));
    ss.counts.push_back(c);
  }
  ss.num_reads = cfg.num_reads;
  return ss;
}

SampleSet gibbs_sample(const BoltzmannMachine& bm, const SamplerConfig& cfg) {
  cfg.validate();
  const std::size_t n = bm.size();
  const double lo = bm.basis() == Basis::ZeroOne ? 0.0 : -1.0;
  const double step = 1.0 - lo;

  std::vector<std::vector<std::pair<std::size_t, double>>> neighbours(n);
  for (const auto& c : bm.couplings()) {
    if (c.value == 0.0) continue;
    neighbours[c.k].emplace_back(c.l, c.value);
    neighbours[c.l].emplace_back(c.k, c.value);
  }

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::int8_t> state(n);
  for (auto& v : state) v = unit(rng) < 0.5 ? std::int8_t{1} : static_cast<std::int8_t>(lo);

  const auto biases = bm.biases();
  auto sweep = [&] {
    for (std::size_t k = 0; k < n; ++k) {
      double field = biases[k];
      for (const auto& [l, j] : neighbours[k]) field += j * state[l];
      const double delta_e = step * field;  // E(s_k = 1) - E(s_k = lo)
      const double p_one = 1.0 / (1.0 + std::exp(cfg.beta * delta_e));
      state[k] = unit(rng) < p_one ? std::int8_t{1} : static_cast<std::int8_t>(lo);
    }
  };

  for (std::size_t s = 0; s < cfg.burn_in; ++s) sweep();
  Tally tally;
  for (std::size_t r = 0; r < cfg.num_reads; ++r) {
    for (std::size_t s = 0; s < cfg.thinning; ++s) sweep();
    tally[state] += 1.0;
  }
  SampleSet ss = from_tally(tally, bm.basis());
  ss.beta = cfg.beta;
  ss.num_reads = cfg.num_reads;
  ss.backend_id = "gibbs";
  return ss;
}

std::unique_ptr<Sampler> make_sampler(const SamplerConfig& cfg) {
  switch (cfg.backend) {
    case Backend::Exact: return std::make_unique<ExactSampler>();
    case Backend::Gibbs: return std::make_unique<GibbsSampler>();
    case Backend::Remote: return std::make_unique<RemoteSampler>(cfg.endpoint);
  }
  throw InvalidArgument("unknown backend");
}

// ---------------------------------------------------------------------------

using nlohmann::json;

std::string sample_set_to_json(const SampleSet& ss) {
  json j;
  j["beta"] = ss.beta;
  j["num_reads"] = ss.num_reads;
  j["backend_id"] = ss.backend_id;
  j["exhaustive"] = ss.exhaustive;
  j["basis"] = std::string(to_string(ss.states.empty() ? Basis::ZeroOne : ss.states.front().basis));
  auto states = json::array();
  for (const auto& s : ss.states) {
    auto row = json::array();
    for (auto v : s.values) row.push_back(int(v));
    states.push_back(std::move(row));
  }
  j["states"] = std::move(states);
  if (ss.exhaustive) {
    j["counts"] = ss.counts;
  } else {
    auto counts = json::array();
    for (double c : ss.counts) counts.push_back(static_cast<std::uint64_t>(c));
    j["counts"] = std::move(counts);
  }
  return j.dump() + "\n";
}

SampleSet sample_set_from_json(const std::string& text) {
  try {
    const auto j = json::parse(text);
    SampleSet ss;
    ss.beta = j.at("beta").get<double>();
    ss.num_reads = j.at("num_reads").get<std::size_t>();
    ss.backend_id = j.value("backend_id", std::string{});
    ss.exhaustive = j.value("exhaustive", false);
    const Basis basis = parse_basis(j.value("basis", std::string("01")));
    Tally tally;
    const auto& states = j.at("states");
    const auto& counts = j.at("counts");
    if (states.size() != counts.size()) throw ParseError("sample set: states/counts length mismatch");
    for (std::size_t i = 0; i < states.size(); ++i) {
      tally[states[i].get<std::vector<std::int8_t>>()] += counts[i].get<double>();
    }
    SampleSet out = from_tally(tally, basis);
    out.beta = ss.beta;
    out.num_reads = ss.num_reads;
    out.backend_id = ss.backend_id;
    out.exhaustive = ss.exhaustive;
    out.validate();
    return out;
  } catch (const json::exception& e) {
    throw ParseError(std::string("sample set JSON: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what());
  }
}

}  // namespace qbm
