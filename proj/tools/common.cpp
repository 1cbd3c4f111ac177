#include "common.hpp"

#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "qbm/error.hpp"
#include "qbm/fixtures.hpp"
#include "qbm/metrics.hpp"

namespace qbm::cli {

RunManifest::RunManifest(std::string command)
    : command_(std::move(command)), started_(utc_timestamp()) {}

void RunManifest::add_input(const fs::path& path) {
  inputs_[path.string()] = fnv1a_hex(read_file(path));
}

void RunManifest::add_input_bytes(const std::string& label, const std::string& bytes) {
  inputs_[label] = fnv1a_hex(bytes);
}

void RunManifest::add_outputs(const std::vector<fs::path>& paths) {
  for (const auto& p : paths) add_output(p);
}

json RunManifest::to_json() const {
  return {{"command", command_},
          {"config", config_},
          {"seeds", seeds_},
          {"inputs", inputs_},
          {"outputs", outputs_},
          {"started", started_},
          {"finished", finished_},
          {"hash", "fnv1a64"}};
}

void RunManifest::write(const fs::path& path) {
  finished_ = utc_timestamp();
  add_output(path);
  write_json(path, to_json());
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<double> parse_beta_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() != 3 && parts.size() != 4) {
    throw UsageError("beta grid must be lo:hi:n or lo:hi:n:lin, got '" + text + "'");
  }
  double lo = 0, hi = 0;
  long n = 0;
  try {
    std::size_t used = 0;
    lo = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument("lo");
    hi = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("hi");
    n = std::stol(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("n");
  } catch (const std::logic_error&) {
    throw UsageError("beta grid '" + text + "' has a non-numeric field");
  }
  if (n < 1 || !(hi >= lo) || lo < 0) throw UsageError("beta grid needs 0 <= lo <= hi and n >= 1");
  if (parts.size() == 4) {
    if (parts[3] == "lin") return linear_beta_grid(lo, hi, static_cast<std::size_t>(n));
    if (parts[3] != "log") throw UsageError("beta grid spacing must be 'log' or 'lin'");
  }
  if (lo <= 0) throw UsageError("log-spaced beta grid needs lo > 0");
  return log_beta_grid(lo, hi, static_cast<std::size_t>(n));
}

Dataset resolve_dataset(const std::string& spec, RunManifest* manifest) {
  if (fs::exists(spec)) {
    if (manifest) manifest->add_input(spec);
    return load_dataset(spec);
  }
  if (spec.find('/') != std::string::npos || spec.ends_with(".csv")) {
    throw UsageError("dataset file not found: " + spec);
  }
  return dataset_by_name(spec);
}

ModelFile resolve_model(const std::string& spec, RunManifest* manifest) {
  if (spec.starts_with("fixture:")) {
    auto f = load_fixture_file(spec.substr(8));
    if (manifest) manifest->add_input_bytes(spec, model_to_json(f.machine, f.metadata));
    return f;
  }
  if (!fs::exists(spec)) throw UsageError("model file not found: " + spec);
  if (manifest) manifest->add_input(spec);
  return load_model(spec);
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file_atomic(path, text);
}

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& body) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::string error_json(const std::string& kind, const std::string& message) {
  return json{{"error", {{"kind", kind}, {"message", message}}}}.dump();
}

}  // namespace qbm::cli
