#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qbm/dataset.hpp"
#include "qbm/model_io.hpp"

namespace qbm::cli {

using nlohmann::json;
namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kInternal = 1, kUsage = 2, kTransport = 3 };

/// Usage or input problem detected by the tool itself.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Provenance record written next to every command's outputs.
class RunManifest {
 public:
  explicit RunManifest(std::string command);

  void set_config(json config) { config_ = std::move(config); }
  void add_seed(std::uint64_t seed) { seeds_.push_back(seed); }
  void add_input(const fs::path& path);
  void add_input_bytes(const std::string& label, const std::string& bytes);
  void add_output(const fs::path& path) { outputs_.push_back(path.string()); }
  void add_outputs(const std::vector<fs::path>& paths);

  json to_json() const;
  /// Stamps the finish time and writes atomically.
  void write(const fs::path& path);

 private:
  std::string command_;
  json config_ = json::object();
  std::vector<std::uint64_t> seeds_;
  json inputs_ = json::object();
  std::vector<std::string> outputs_;
  std::string started_;
  std::string finished_;
};

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(const std::string& bytes);
std::string utc_timestamp();

/// "lo:hi:n" (log spaced) or "lo:hi:n:lin".
std::vector<double> parse_beta_grid(const std::string& text);

/// Existing file path, or a built-in name such as "and" or "two_phase:6".
Dataset resolve_dataset(const std::string& spec, RunManifest* manifest = nullptr);

/// Model file path, or "fixture:<name>".
ModelFile resolve_model(const std::string& spec, RunManifest* manifest = nullptr);

void write_json(const fs::path& path, const json& j);
void write_text(const fs::path& path, const std::string& text);

/// Runs body(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& body);

/// Machine-readable error line for stderr.
std::string error_json(const std::string& kind, const std::string& message);

}  // namespace qbm::cli
