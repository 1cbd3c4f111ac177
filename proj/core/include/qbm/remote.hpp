#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "qbm/sampler.hpp"

namespace qbm {

/// Environment variable consulted when no endpoint is given explicitly.
inline constexpr const char* kRemoteEndpointEnv = "QBM_REMOTE_ENDPOINT";

// Wire protocol for POST /v1/sample.
//   request:  {"basis": "pm1", "biases": [...], "couplings": [[k, l, v], ...],
//              "num_reads": int}
//   response: {"samples": [[+-1, ...], ...], "counts": [int, ...],
//              "energies": [real, ...]}   (energies optional)
// HTTP 413 signals a problem larger than the backend accepts.

/// Request body for a machine already in the PlusMinus basis.
std::string encode_sample_request(const BoltzmannMachine& pm_machine,
                                  std::size_t num_reads);
/// Validates a response body; throws ProtocolError on any violation.
/// Returned states are in the PlusMinus basis.
SampleSet decode_sample_response(const std::string& body, std::size_t width,
                                 std::size_t num_reads);

/// Client for a remote annealer-like sampling service.
///
/// The machine is converted to the PlusMinus basis before submission and
/// returned states are mapped back to the caller's basis. The returned
/// `beta` is the caller's assumed value: the service does not report one.
class RemoteSampler final : public Sampler {
 public:
  /// Empty endpoint falls back to $QBM_REMOTE_ENDPOINT.
  explicit RemoteSampler(std::string endpoint, double timeout_seconds = 30.0);

  SampleSet sample(const BoltzmannMachine& bm, const SamplerConfig& cfg) override;
  const std::string& endpoint() const noexcept { return endpoint_; }

 private:
  std::string endpoint_;
  double timeout_seconds_;
};

SampleSet remote_sample(const BoltzmannMachine& bm, const SamplerConfig& cfg,
                        const std::string& endpoint);

/// Test double for the remote service, backed by exact enumeration.
struct MockServerOptions {
  /// Inverse temperature the mock "anneals" at.
  double beta = 3.0;
  /// Synthetic size dependence: effective beta = beta / (1 + drift * nodes).
  double drift = 0.0;
  std::size_t max_nodes = kDefaultEnumerationCap;
  std::uint64_t seed = 0;
  /// Fault injection for protocol tests.
  enum class Fault { None, WrongSampleLength, BadJson, ServerError } fault = Fault::None;
};

class MockAnnealerServer {
 public:
  explicit MockAnnealerServer(MockServerOptions options = {});
  ~MockAnnealerServer();
  MockAnnealerServer(const MockAnnealerServer&) = delete;
  MockAnnealerServer& operator=(const MockAnnealerServer&) = delete;

  /// Binds (port 0 picks a free port) and serves on a background thread.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  /// Serves on the calling thread until stop() is called elsewhere.
  void listen_blocking(const std::string& host, int port);
  void stop();

  std::string endpoint() const;
  double effective_beta(std::size_t nodes) const;
  std::size_t requests_served() const noexcept { return served_.load(); }

  /// Handles one request body; exposed so the protocol can be tested
  /// without sockets. Returns (HTTP status, body).
  std::pair<int, std::string> handle(const std::string& body);

 private:
  struct Impl;
  MockServerOptions options_;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  std::string host_;
  int port_ = 0;
  std::atomic<std::size_t> served_{0};
  std::mutex mutex_;
};

}  // namespace qbm
