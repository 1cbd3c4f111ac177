#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "commands.hpp"
#include "qbm/error.hpp"

using namespace qbm::cli;

namespace {

void add_train(CLI::App& app, TrainOptions& o) {
  auto* c = app.add_subcommand("train", "Train a machine on a dataset");
  c->add_option("--dataset", o.dataset, "CSV file or built-in name (and, or, xor, adder2, two_phase[:n])")->required();
  c->add_option("--arch", o.arch, "Architecture such as 3v1h or 4i3o10h")->required();
  c->add_option("--mode", o.mode, "distribution or function")->capture_default_str();
  c->add_option("--seeds", o.seeds, "Number of seeded runs")->capture_default_str();
  c->add_option("--seed", o.seed, "First seed")->capture_default_str();
  c->add_option("--config", o.config, "Training config JSON");
  c->add_option("--beta", o.beta, "Training inverse temperature");
  c->add_option("--eta", o.eta, "Learning rate");
  c->add_option("--lambda", o.lambda, "Weight decay");
  c->add_option("--nu", o.nu, "Momentum");
  c->add_option("--steps", o.steps, "Maximum steps");
  c->add_option("--h-max", o.h_max, "Bias bound");
  c->add_option("--j-max", o.j_max, "Coupling bound");
  c->add_option("--init-range", o.init_range, "Uniform init half-width");
  c->add_option("--init-model", o.init_model, "Start from a model file or fixture:<name>");
  c->add_option("--gradient", o.gradient, "exact or sampled");
  c->add_option("--backend", o.backend, "exact, gibbs or remote");
  c->add_option("--reads", o.reads, "Reads per sampler call");
  c->add_option("--endpoint", o.endpoint, "Remote sampler URL");
  c->add_option("--out", o.out, "Output directory")->capture_default_str();
  c->add_option("--jobs", o.jobs, "Parallel seeds")->capture_default_str();
}

void add_sweep(CLI::App& app, SweepOptions& o) {
  auto* c = app.add_subcommand("sweep-beta", "Tabulate a model over inverse temperature");
  c->add_option("--model", o.model, "Model file or fixture:<name>")->required();
  c->add_option("--dataset", o.dataset, "Dataset for D_KL and conditionals");
  c->add_option("--beta-grid", o.beta_grid, "lo:hi:n[:lin|log]")->capture_default_str();
  c->add_option("--out", o.out, "CSV path (stdout when omitted)");
}

void add_fit(CLI::App& app, FitOptions& o) {
  auto* c = app.add_subcommand("fit-beta", "Estimate the effective inverse temperature of a sampler");
  c->add_option("--samples", o.samples, "SampleSet JSON to fit against --model");
  c->add_option("--model", o.model, "Model file or fixture:<name>");
  c->add_option("--backend", o.backend, "exact, gibbs or remote")->capture_default_str();
  c->add_option("--sizes", o.sizes, "Graph sizes lo:hi")->capture_default_str();
  c->add_option("--beta", o.beta, "Sampler inverse temperature")->capture_default_str();
  c->add_option("--reads", o.reads, "Reads per size")->capture_default_str();
  c->add_option("--seed", o.seed)->capture_default_str();
  c->add_option("--endpoint", o.endpoint, "Remote sampler URL");
  c->add_flag("--spawn-mock", o.spawn_mock, "Start an in-process mock annealer");
  c->add_option("--mock-beta", o.mock_beta, "Mock base inverse temperature")->capture_default_str();
  c->add_option("--drift", o.drift, "Mock size drift: beta / (1 + drift * nodes)")->capture_default_str();
  c->add_option("--beta-grid", o.beta_grid, "lo:hi:n[:lin|log]")->capture_default_str();
  c->add_option("--out", o.out, "Report path (stdout when omitted)");
  c->add_option("--jobs", o.jobs, "Parallel sizes")->capture_default_str();
}

void add_verify(CLI::App& app, VerifyOptions& o) {
  auto* c = app.add_subcommand("verify-propositions", "Check ground/excited-state behaviour on random machines");
  c->add_option("--machines", o.machines)->capture_default_str();
  c->add_option("--min-nodes", o.min_nodes)->capture_default_str();
  c->add_option("--max-nodes", o.max_nodes)->capture_default_str();
  c->add_option("--seed", o.seed)->capture_default_str();
  c->add_flag("--include-flat", o.include_flat, "Append an all-ground-state machine");
  c->add_option("--beta-grid", o.beta_grid, "lo:hi:n[:lin|log]")->capture_default_str();
  c->add_option("--out", o.out, "Report path (stdout when omitted)");
}

void add_sample(CLI::App& app, SampleOptions& o) {
  auto* c = app.add_subcommand("sample", "Draw samples from a model");
  c->add_option("--model", o.model, "Model file or fixture:<name>")->required();
  c->add_option("--backend", o.backend, "exact, gibbs or remote")->capture_default_str();
  c->add_option("--beta", o.beta)->capture_default_str();
  c->add_option("--reads", o.reads)->capture_default_str();
  c->add_flag("--exhaustive", o.exhaustive, "Exact backend: every state with its probability");
  c->add_option("--seed", o.seed)->capture_default_str();
  c->add_option("--burn-in", o.burn_in)->capture_default_str();
  c->add_option("--thinning", o.thinning)->capture_default_str();
  c->add_option("--endpoint", o.endpoint, "Remote sampler URL");
  c->add_option("--out", o.out, "SampleSet path (stdout when omitted)");
}

void add_serve(CLI::App& app, ServeOptions& o) {
  auto* c = app.add_subcommand("serve-mock", "Serve the mock annealer over HTTP until interrupted");
  c->add_option("--host", o.host)->capture_default_str();
  c->add_option("--port", o.port)->capture_default_str();
  c->add_option("--beta", o.beta)->capture_default_str();
  c->add_option("--drift", o.drift)->capture_default_str();
  c->add_option("--max-nodes", o.max_nodes)->capture_default_str();
  c->add_option("--seed", o.seed)->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boltzmann machine training and analysis"};
  app.require_subcommand(1);
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());

  TrainOptions train;
  train.jobs = hw;
  SweepOptions sweep;
  FitOptions fit;
  fit.jobs = hw;
  VerifyOptions verify;
  SampleOptions sample;
  ServeOptions serve;
  ExportOptions exp;
  ReproduceOptions repro;
  repro.jobs = hw;

  add_train(app, train);
  add_sweep(app, sweep);
  add_fit(app, fit);
  add_verify(app, verify);
  add_sample(app, sample);
  add_serve(app, serve);
  auto* e = app.add_subcommand("export-fixtures", "Write built-in fixtures and datasets to disk");
  e->add_option("--out", exp.out, "Root directory")->capture_default_str();
  auto* r = app.add_subcommand("reproduce", "Run the full desk-scale pipeline");
  r->add_option("--out", repro.out)->capture_default_str();
  r->add_option("--jobs", repro.jobs)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    std::cerr << error_json("usage", err.what()) << "\n";
    return kUsage;
  }

  try {
    const auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "train") return cmd_train(train);
    if (name == "sweep-beta") return cmd_sweep_beta(sweep);
    if (name == "fit-beta") return cmd_fit_beta(fit);
    if (name == "verify-propositions") return cmd_verify_propositions(verify);
    if (name == "sample") return cmd_sample(sample);
    if (name == "serve-mock") return cmd_serve_mock(serve);
    if (name == "export-fixtures") return cmd_export_fixtures(exp);
    if (name == "reproduce") return cmd_reproduce(repro);
  } catch (const UsageError& err) {
    std::cerr << error_json("usage", err.what()) << "\n";
    return kUsage;
  } catch (const qbm::TransportError& err) {
    std::cerr << error_json("transport", err.what()) << "\n";
    return kTransport;
  } catch (const qbm::ProtocolError& err) {
    std::cerr << error_json("protocol", err.what()) << "\n";
    return kTransport;
  } catch (const qbm::ParseError& err) {
    std::cerr << error_json("parse", err.what()) << "\n";
    return kUsage;
  } catch (const qbm::InvalidArgument& err) {
    std::cerr << error_json("invalid_argument", err.what()) << "\n";
    return kUsage;
  } catch (const qbm::CapacityError& err) {
    std::cerr << error_json("capacity", err.what()) << "\n";
    return kUsage;
  } catch (const std::exception& err) {
    std::cerr << error_json("internal", err.what()) << "\n";
    return kInternal;
  }
  return kInternal;
}
