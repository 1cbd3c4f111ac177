#include "commands.hpp"

#include <csignal>
#include <cstdio>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

#include "qbm/error.hpp"
#include "qbm/fixtures.hpp"
#include "qbm/metrics.hpp"
#include "qbm/remote.hpp"
#include "qbm/sampler.hpp"

namespace qbm::cli {

namespace {

std::string bits_of(std::span<const std::int8_t> values) {
  std::string s;
  for (auto v : values) s += static_cast<char>('0' + v);
  return s;
}

std::string fmt_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

fs::path manifest_path_for(const fs::path& out) {
  return out.parent_path() / (out.filename().string() + ".manifest.json");
}

void emit(const std::string& out, const std::string& text, RunManifest& manifest) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  write_text(out, text);
  manifest.add_output(out);
  manifest.write(manifest_path_for(out));
}

std::pair<std::size_t, std::size_t> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) {
      const auto n = std::stoul(text);
      return {n, n};
    }
    return {std::stoul(text.substr(0, colon)), std::stoul(text.substr(colon + 1))};
  } catch (const std::logic_error&) {
    throw UsageError("size range must be n or lo:hi, got '" + text + "'");
  }
}

BoltzmannMachine random_complete(std::size_t nodes, std::mt19937_64& rng, double range = 1.0) {
  Bounds loose;
  loose.enforced = false;
  auto bm = BoltzmannMachine::complete(Partition{nodes, 0, 0}, Basis::ZeroOne, loose);
  std::uniform_real_distribution<double> u(-range, range);
  auto theta = bm.parameters();
  for (auto& t : theta) t = u(rng);
  bm.set_parameters(theta);
  return bm;
}

TrainingConfig build_config(const TrainOptions& o, RunManifest& manifest) {
  TrainingConfig cfg;
  if (!o.config.empty()) {
    if (!fs::exists(o.config)) throw UsageError("config file not found: " + o.config);
    manifest.add_input(o.config);
    cfg = training_config_from_json(read_file(o.config));
  }
  if (o.beta) cfg.sampler.beta = *o.beta;
  if (o.eta) cfg.eta = *o.eta;
  if (o.lambda) cfg.lambda = *o.lambda;
  if (o.nu) cfg.nu = *o.nu;
  if (o.h_max) cfg.h_max = *o.h_max;
  if (o.j_max) cfg.j_max = *o.j_max;
  if (o.init_range) cfg.init_range = *o.init_range;
  if (o.steps) cfg.max_steps = *o.steps;
  if (o.reads) cfg.sampler.num_reads = *o.reads;
  if (o.gradient) cfg.gradient_mode = parse_gradient_mode(*o.gradient);
  if (o.backend) cfg.sampler.backend = parse_backend(*o.backend);
  if (o.endpoint) cfg.sampler.endpoint = *o.endpoint;
  if (o.init_model) {
    cfg.init = InitKind::FromModel;
    cfg.initial = resolve_model(*o.init_model, &manifest).machine;
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int cmd_train(const TrainOptions& o) {
  RunManifest manifest("train");
  if (o.mode != "distribution" && o.mode != "function") {
    throw UsageError("--mode must be 'distribution' or 'function'");
  }
  if (o.seeds == 0) throw UsageError("--seeds must be at least 1");
  const auto data = resolve_dataset(o.dataset, &manifest);
  const auto arch = parse_architecture(o.arch);
  const auto base = build_config(o, manifest);

  std::vector<TrainingResult> results(o.seeds);
  parallel_for(o.seeds, o.jobs, [&](std::size_t k) {
    auto cfg = base;
    cfg.seed = o.seed + k;
    results[k] = o.mode == "distribution" ? train_distribution(data, arch, cfg)
                                          : train_function_approximator(data, arch, cfg);
  });

  const fs::path out = o.out;
  json runs = json::array();
  std::size_t best = 0;
  for (std::size_t k = 0; k < o.seeds; ++k) {
    const auto& r = results[k];
    const std::uint64_t seed = o.seed + k;
    manifest.add_seed(seed);
    const fs::path dir = out / ("seed_" + std::to_string(seed));
    write_text(dir / "trace.csv", r.trace.to_csv());
    const ModelMetadata meta{{"dataset", data.name().empty() ? o.dataset : data.name()},
                             {"arch", to_string(arch)},
                             {"mode", o.mode},
                             {"seed", std::to_string(seed)},
                             {"trained_beta", fmt_double(base.sampler.beta)},
                             {"final_loss", fmt_double(r.final_loss)}};
    save_model(dir / "model.json", r.machine, meta);
    manifest.add_outputs({dir / "trace.csv", dir / "model.json"});
    runs.push_back({{"seed", seed},
                    {"steps", r.steps},
                    {"converged", r.converged},
                    {"final_loss", r.final_loss},
                    {"full_sampler_calls", r.full_sampler_calls},
                    {"clamped_sampler_calls", r.clamped_sampler_calls}});
    if (!(results[best].final_loss <= r.final_loss)) best = k;
  }
  fs::copy_file(out / ("seed_" + std::to_string(o.seed + best)) / "model.json",
                out / "best_model.json", fs::copy_options::overwrite_existing);
  const json summary{{"loss", o.mode == "distribution" ? "dkl" : "ncll"},
                     {"best_seed", o.seed + best},
                     {"best_final_loss", results[best].final_loss},
                     {"runs", runs}};
  write_json(out / "summary.json", summary);
  manifest.add_outputs({out / "best_model.json", out / "summary.json"});
  manifest.set_config({{"dataset", o.dataset},
                       {"arch", o.arch},
                       {"mode", o.mode},
                       {"seeds", o.seeds},
                       {"first_seed", o.seed},
                       {"training", json::parse(training_config_to_json(base))}});
  manifest.write(out / "manifest.json");
  std::cout << summary.dump(2) << "\n";
  return kOk;
}

std::string sweep_csv(const BoltzmannMachine& bm, const Dataset* data,
                      const std::vector<double>& grid) {
  const ExactModel model(bm);
  const std::size_t m = bm.num_visible();
  const bool conditionals = data && data->io_split() && bm.num_outputs() > 0;
  std::vector<StateCode> states;
  if (data) {
    for (std::size_t r = 0; r < data->size(); ++r) states.push_back(encode_state(data->row(r), Basis::ZeroOne));
  } else if (m <= 10) {
    for (StateCode c = 0; c < (StateCode{1} << m); ++c) states.push_back(c);
  }

  std::ostringstream csv;
  csv << "beta";
  if (data) csv << ",dkl,dkl_d1,dkl_d2";
  csv << ",ground_prob";
  for (StateCode c : states) csv << ",p_" << decode_state(c, m, Basis::ZeroOne).to_bitstring();
  if (conditionals) {
    for (std::size_t r = 0; r < data->size(); ++r) csv << ",c_" << bits_of(data->row(r));
    csv << ",c_min";
  }
  csv << "\n";

  for (double beta : grid) {
    csv << fmt_double(beta);
    if (data) {
      const auto [d1, d2] = model.kl_beta_derivatives(*data, beta);
      csv << "," << fmt_double(model.kl(*data, beta)) << "," << fmt_double(d1) << ","
          << fmt_double(d2);
    }
    csv << "," << fmt_double(model.ground_state_probability(beta));
    const auto p = model.visible(beta);
    for (StateCode c : states) csv << "," << fmt_double(p.probability(c));
    if (conditionals) {
      double lowest = 1.0;
      for (std::size_t r = 0; r < data->size(); ++r) {
        const double c = model.conditional(beta, data->inputs(r))
                             .probability(encode_state(data->outputs(r), Basis::ZeroOne));
        lowest = std::min(lowest, c);
        csv << "," << fmt_double(c);
      }
      csv << "," << fmt_double(lowest);
    }
    csv << "\n";
  }
  return csv.str();
}

int cmd_sweep_beta(const SweepOptions& o) {
  RunManifest manifest("sweep-beta");
  const auto model = resolve_model(o.model, &manifest);
  std::optional<Dataset> data;
  if (!o.dataset.empty()) data = resolve_dataset(o.dataset, &manifest);
  const auto grid = parse_beta_grid(o.beta_grid);
  manifest.set_config({{"model", o.model}, {"dataset", o.dataset}, {"beta_grid", o.beta_grid}});
  emit(o.out, sweep_csv(model.machine, data ? &*data : nullptr, grid), manifest);
  return kOk;
}

json fit_beta_table(const FitOptions& o, const std::string& endpoint) {
  const auto [lo, hi] = parse_range(o.sizes);
  if (lo < 1 || hi < lo) throw UsageError("size range must satisfy 1 <= lo <= hi");
  const auto grid = parse_beta_grid(o.beta_grid);
  const std::size_t count = hi - lo + 1;
  std::vector<json> rows(count);
  parallel_for(count, o.jobs, [&](std::size_t i) {
    const std::size_t n = lo + i;
    std::mt19937_64 rng(o.seed * 1000003ULL + n);
    const auto bm = random_complete(n, rng);
    SamplerConfig cfg;
    cfg.beta = o.beta;
    cfg.num_reads = o.reads;
    cfg.seed = o.seed + n;
    cfg.backend = parse_backend(o.backend);
    cfg.endpoint = endpoint;
    const auto ss = make_sampler(cfg)->sample(bm, cfg);
    const auto fit = fit_beta(ss, bm, grid);
    rows[i] = {{"size", n}, {"beta_star", fit.beta_star}, {"distance", fit.distance}};
  });
  return rows;
}

int cmd_fit_beta(const FitOptions& o) {
  RunManifest manifest("fit-beta");
  json report;
  if (!o.samples.empty()) {
    if (o.model.empty()) throw UsageError("--samples needs --model");
    if (!fs::exists(o.samples)) throw UsageError("sample file not found: " + o.samples);
    manifest.add_input(o.samples);
    const auto model = resolve_model(o.model, &manifest);
    const auto ss = sample_set_from_json(read_file(o.samples));
    const auto fit = fit_beta(ss, model.machine, parse_beta_grid(o.beta_grid));
    json curve = json::array();
    for (const auto& [b, d] : fit.curve) curve.push_back({b, d});
    report = {{"beta_star", fit.beta_star}, {"distance", fit.distance}, {"curve", curve}};
  } else {
    std::unique_ptr<MockAnnealerServer> mock;
    FitOptions opts = o;
    std::string endpoint = o.endpoint;
    if (o.spawn_mock) {
      MockServerOptions mo;
      mo.beta = o.mock_beta;
      mo.drift = o.drift;
      mo.seed = o.seed;
      mock = std::make_unique<MockAnnealerServer>(mo);
      mock->start();
      endpoint = mock->endpoint();
      opts.backend = "remote";
    }
    report = {{"backend", opts.backend}, {"sampler_beta", o.beta}, {"reads", o.reads},
              {"rows", fit_beta_table(opts, endpoint)}};
    if (mock) {
      for (auto& row : report["rows"]) {
        row["mock_effective_beta"] = mock->effective_beta(row["size"].get<std::size_t>());
      }
      report["synthetic"] = true;
      report["note"] = "mock annealer; beta drift is synthetic, compare shape only";
      report["mock_beta"] = o.mock_beta;
      report["drift"] = o.drift;
      mock->stop();
    }
  }
  manifest.set_config({{"samples", o.samples}, {"model", o.model}, {"backend", o.backend},
                       {"sizes", o.sizes}, {"beta", o.beta}, {"reads", o.reads},
                       {"seed", o.seed}, {"spawn_mock", o.spawn_mock}, {"mock_beta", o.mock_beta},
                       {"drift", o.drift}, {"beta_grid", o.beta_grid}});
  manifest.add_seed(o.seed);
  emit(o.out, report.dump(2) + "\n", manifest);
  return kOk;
}

json verify_report(const VerifyOptions& o, const fs::path& counterexample_dir) {
  if (o.min_nodes < 1 || o.max_nodes < o.min_nodes) {
    throw UsageError("node range must satisfy 1 <= min <= max");
  }
  const auto grid = parse_beta_grid(o.beta_grid);
  std::mt19937_64 rng(o.seed);
  std::vector<BoltzmannMachine> machines;
  for (std::size_t i = 0; i < o.machines; ++i) {
    const std::size_t n = o.min_nodes + rng() % (o.max_nodes - o.min_nodes + 1);
    machines.push_back(random_complete(n, rng));
  }
  if (o.include_flat) machines.emplace_back(Partition{o.min_nodes, 0, 0});

  std::size_t passed = 0, non_strict = 0, f_ground = 0, f_decay = 0, f_order = 0;
  double max_beta_c = 0.0;
  json counterexamples = json::array();
  for (std::size_t i = 0; i < machines.size(); ++i) {
    const ExactModel model(machines[i]);
    const auto r = check_propositions(model, grid);
    non_strict += r.all_ground;
    f_ground += !r.ground_monotone;
    f_decay += !r.excited_decay;
    f_order += !r.decay_order;
    max_beta_c = std::max(max_beta_c, r.beta_c);
    if (r.passed()) {
      ++passed;
    } else if (!counterexample_dir.empty()) {
      const auto path = counterexample_dir / ("counterexample_" + std::to_string(i) + ".json");
      fs::create_directories(counterexample_dir);
      save_model(path, machines[i], {{"index", std::to_string(i)}});
      counterexamples.push_back(path.string());
    }
  }
  return {{"machines", machines.size()},
          {"passed", passed},
          {"failed", machines.size() - passed},
          {"non_strict", non_strict},
          {"failures",
           {{"ground_monotone", f_ground}, {"excited_decay", f_decay}, {"decay_order", f_order}}},
          {"max_beta_c", max_beta_c},
          {"counterexamples", counterexamples}};
}

int cmd_verify_propositions(const VerifyOptions& o) {
  RunManifest manifest("verify-propositions");
  const fs::path dir = o.out.empty() ? fs::path{} : fs::path(o.out).parent_path() / "counterexamples";
  const auto report = verify_report(o, dir);
  for (const auto& p : report["counterexamples"]) manifest.add_output(p.get<std::string>());
  manifest.add_seed(o.seed);
  manifest.set_config({{"machines", o.machines}, {"min_nodes", o.min_nodes},
                       {"max_nodes", o.max_nodes}, {"include_flat", o.include_flat},
                       {"beta_grid", o.beta_grid}});
  emit(o.out, report.dump(2) + "\n", manifest);
  return kOk;
}

int cmd_sample(const SampleOptions& o) {
  RunManifest manifest("sample");
  const auto model = resolve_model(o.model, &manifest);
  SamplerConfig cfg;
  cfg.backend = parse_backend(o.backend);
  cfg.beta = o.beta;
  cfg.num_reads = o.reads;
  cfg.exhaustive = o.exhaustive;
  cfg.seed = o.seed;
  cfg.burn_in = o.burn_in;
  cfg.thinning = o.thinning;
  cfg.endpoint = o.endpoint;
  cfg.validate();
  const auto ss = make_sampler(cfg)->sample(model.machine, cfg);

  double total = 0.0, mean = 0.0, lowest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ss.states.size(); ++i) {
    const double e = energy(model.machine, ss.states[i]);
    total += ss.counts[i];
    mean += ss.counts[i] * e;
    lowest = std::min(lowest, e);
  }
  const json summary{{"backend", o.backend},
                     {"distinct_states", ss.states.size()},
                     {"total_weight", total},
                     {"num_reads", ss.num_reads},
                     {"mean_energy", total > 0 ? mean / total : 0.0},
                     {"min_energy", lowest}};
  manifest.add_seed(o.seed);
  manifest.set_config({{"model", o.model}, {"backend", o.backend}, {"beta", o.beta},
                       {"reads", o.reads}, {"exhaustive", o.exhaustive}, {"seed", o.seed},
                       {"burn_in", o.burn_in}, {"thinning", o.thinning}});
  if (o.out.empty()) {
    std::cout << sample_set_to_json(ss) << "\n";
  } else {
    emit(o.out, sample_set_to_json(ss) + "\n", manifest);
    std::cout << summary.dump(2) << "\n";
  }
  return kOk;
}

int cmd_serve_mock(const ServeOptions& o) {
  MockServerOptions mo;
  mo.beta = o.beta;
  mo.drift = o.drift;
  mo.max_nodes = o.max_nodes;
  mo.seed = o.seed;
  MockAnnealerServer server(mo);
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  server.start(o.host, o.port);
  std::cout << json{{"endpoint", server.endpoint()}, {"beta", o.beta}, {"drift", o.drift}}.dump()
            << std::endl;
  int sig = 0;
  sigwait(&set, &sig);
  server.stop();
  std::cerr << json{{"stopped", true}, {"requests_served", server.requests_served()}}.dump() << "\n";
  return kOk;
}

int cmd_export_fixtures(const ExportOptions& o) {
  const fs::path root = o.out;
  for (const auto& name : fixture_names()) {
    const auto f = load_fixture_file(name);
    fs::create_directories(root / "fixtures");
    save_model(root / "fixtures" / (name + ".json"), f.machine, f.metadata);
    std::cout << (root / "fixtures" / (name + ".json")).string() << "\n";
  }
  for (const char* name : {"and", "or", "xor", "adder2", "two_phase"}) {
    const auto path = root / "datasets" / (std::string(name) + ".csv");
    fs::create_directories(path.parent_path());
    save_dataset(path, dataset_by_name(name));
    std::cout << path.string() << "\n";
  }
  return kOk;
}

}  // namespace qbm::cli
