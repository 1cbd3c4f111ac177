#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "common.hpp"
#include "qbm/training.hpp"

namespace qbm::cli {

struct TrainOptions {
  std::string dataset;
  std::string arch;
  std::string mode = "distribution";
  std::size_t seeds = 1;
  std::uint64_t seed = 0;
  std::string config;  // TrainingConfig JSON file
  std::optional<double> beta, eta, lambda, nu, h_max, j_max, init_range;
  std::optional<std::size_t> steps, reads;
  std::optional<std::string> gradient, backend, endpoint, init_model;
  std::string out = "runs/train";
  std::size_t jobs = 1;
};

struct SweepOptions {
  std::string model;
  std::string dataset;
  std::string beta_grid = "0.1:10:40";
  std::string out;  // CSV path; stdout when empty
};

struct FitOptions {
  std::string samples;  // SampleSet JSON; with `model`
  std::string model;
  std::string backend = "gibbs";
  std::string sizes = "4:10";
  double beta = 3.0;
  std::size_t reads = 10000;
  std::uint64_t seed = 0;
  std::string endpoint;
  bool spawn_mock = false;
  double mock_beta = 3.0;
  double drift = 0.0;
  std::string beta_grid = "0.1:20:60";
  std::string out;
  std::size_t jobs = 1;
};

struct VerifyOptions {
  std::size_t machines = 200;
  std::size_t min_nodes = 2;
  std::size_t max_nodes = 10;
  std::uint64_t seed = 0;
  bool include_flat = false;
  std::string beta_grid = "0.1:50:60";
  std::string out;
};

struct SampleOptions {
  std::string model;
  std::string backend = "exact";
  double beta = 1.0;
  std::size_t reads = 1000;
  bool exhaustive = false;
  std::uint64_t seed = 0;
  std::size_t burn_in = 1000;
  std::size_t thinning = 10;
  std::string endpoint;
  std::string out;
};

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  double beta = 3.0;
  double drift = 0.0;
  std::size_t max_nodes = 20;
  std::uint64_t seed = 0;
};

struct ExportOptions {
  std::string out = ".";
};

struct ReproduceOptions {
  std::string out = "runs/reproduce";
  std::size_t jobs = 1;
};

int cmd_train(const TrainOptions& o);
int cmd_sweep_beta(const SweepOptions& o);
int cmd_fit_beta(const FitOptions& o);
int cmd_verify_propositions(const VerifyOptions& o);
int cmd_sample(const SampleOptions& o);
int cmd_serve_mock(const ServeOptions& o);
int cmd_export_fixtures(const ExportOptions& o);
int cmd_reproduce(const ReproduceOptions& o);

/// Sweep table as CSV: D_KL, its beta derivatives, visible probabilities and
/// conditionals of the dataset rows.
std::string sweep_csv(const BoltzmannMachine& bm, const Dataset* data,
                      const std::vector<double>& grid);

/// (size, beta*, distance) per size using random complete machines.
json fit_beta_table(const FitOptions& o, const std::string& endpoint);

/// Ensemble report over random machines.
json verify_report(const VerifyOptions& o, const fs::path& counterexample_dir);

}  // namespace qbm::cli
