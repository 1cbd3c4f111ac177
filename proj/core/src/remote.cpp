#include "qbm/remote.hpp"

#include <chrono>
#include <cstdlib>
#include <map>

#include "httplib.h"
#include "json.hpp"
#include "qbm/error.hpp"

namespace qbm {

using nlohmann::json;

std::string encode_sample_request(const BoltzmannMachine& pm_machine, std::size_t num_reads) {
  if (pm_machine.basis() != Basis::PlusMinus) {
    throw InvalidArgument("remote requests carry PlusMinus machines");
  }
  json j;
  j["basis"] = "pm1";
  j["biases"] = std::vector<double>(pm_machine.biases().begin(), pm_machine.biases().end());
  auto couplings = json::array();
  for (const auto& c : pm_machine.couplings()) couplings.push_back(json::array({c.k, c.l, c.value}));
  j["couplings"] = std::move(couplings);
  j["num_reads"] = num_reads;
  return j.dump();
}

SampleSet decode_sample_response(const std::string& body, std::size_t width,
                                 std::size_t num_reads) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("response is not JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("samples") || !j.contains("counts")) {
    throw ProtocolError("response lacks samples/counts");
  }
  const auto& samples = j["samples"];
  const auto& counts = j["counts"];
  if (!samples.is_array() || !counts.is_array() || samples.size() != counts.size()) {
    throw ProtocolError("samples and counts must be arrays of equal length");
  }
  if (j.contains("energies") &&
      (!j["energies"].is_array() || j["energies"].size() != samples.size())) {
    throw ProtocolError("energies must match samples in length");
  }

  std::map<std::vector<std::int8_t>, double> tally;
  std::size_t total = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& row = samples[i];
    if (!row.is_array() || row.size() != width) {
      throw ProtocolError("sample " + std::to_string(i) + " has length " +
                          std::to_string(row.is_array() ? row.size() : 0) +
                          ", expected " + std::to_string(width));
    }
    std::vector<std::int8_t> values(width);
    for (std::size_t k = 0; k < width; ++k) {
      if (!row[k].is_number_integer()) throw ProtocolError("sample entries must be integers");
      const auto v = row[k].get<int>();
      if (v != -1 && v != 1) throw ProtocolError("sample entries must be +-1");
      values[k] = static_cast<std::int8_t>(v);
    }
    if (!counts[i].is_number_integer() || counts[i].get<long long>() < 1) {
      throw ProtocolError("counts must be positive integers");
    }
    const auto c = counts[i].get<std::size_t>();
    total += c;
    tally[std::move(values)] += static_cast<double>(c);
  }
  if (total != num_reads) {
    throw ProtocolError("counts sum to " + std::to_string(total) + ", requested " +
                        std::to_string(num_reads));
  }

  SampleSet ss;
  for (auto& [values, c] : tally) {
    SpinState s;
    s.values = values;
    s.basis = Basis::PlusMinus;
    ss.states.push_back(std::move(s));
    ss.counts.push_back(c);
  }
  ss.num_reads = num_reads;
  return ss;
}

// ---------------------------------------------------------------------------

RemoteSampler::RemoteSampler(std::string endpoint, double timeout_seconds)
    : endpoint_(std::move(endpoint)), timeout_seconds_(timeout_seconds) {
  if (endpoint_.empty()) {
    if (const char* env = std::getenv(kRemoteEndpointEnv)) endpoint_ = env;
  }
}

SampleSet RemoteSampler::sample(const BoltzmannMachine& bm, const SamplerConfig& cfg) {
  if (bm.size() == 0) throw InvalidArgument("cannot sample an empty machine");
  cfg.validate();
  if (endpoint_.empty()) {
    throw InvalidArgument(std::string("no remote endpoint configured (set ") +
                          kRemoteEndpointEnv + ")");
  }

  const BoltzmannMachine pm = bm.basis() == Basis::PlusMinus ? bm : convert_basis(bm);
  const std::string request = encode_sample_request(pm, cfg.num_reads);

  httplib::Client client(endpoint_);
  const auto timeout = std::chrono::duration<double>(timeout_seconds_);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  auto res = client.Post("/v1/sample", request, "application/json");
  if (!res) {
    throw TransportError("remote sampler at " + endpoint_ + " unreachable: " +
                         httplib::to_string(res.error()));
  }
  if (res->status == 413) {
    throw CapacityError("remote sampler rejected a " + std::to_string(bm.size()) + "-node problem");
  }
  if (res->status >= 500) {
    throw TransportError("remote sampler returned HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw ProtocolError("remote sampler returned HTTP " + std::to_string(res->status) +
                        ": " + res->body);
  }

  SampleSet pm_set = decode_sample_response(res->body, bm.size(), cfg.num_reads);
  SampleSet out;
  if (bm.basis() == Basis::PlusMinus) {
    out = std::move(pm_set);
  } else {
    // {-1,+1} -> {0,1} is monotone, so lexicographic order is preserved.
    out.counts = std::move(pm_set.counts);
    out.states.reserve(pm_set.states.size());
    for (const auto& s : pm_set.states) out.states.push_back(convert_state(s));
    out.num_reads = pm_set.num_reads;
  }
  out.beta = cfg.beta;
  out.backend_id = "remote:" + endpoint_;
  return out;
}

SampleSet remote_sample(const BoltzmannMachine& bm, const SamplerConfig& cfg,
                        const std::string& endpoint) {
  RemoteSampler sampler(endpoint);
  return sampler.sample(bm, cfg);
}

// ---------------------------------------------------------------------------

struct MockAnnealerServer::Impl {
  httplib::Server server;
};

MockAnnealerServer::MockAnnealerServer(MockServerOptions options)
    : options_(options), impl_(std::make_unique<Impl>()) {
  impl_->server.Post("/v1/sample", [this](const httplib::Request& req, httplib::Response& res) {
    auto [status, body] = handle(req.body);
    res.status = status;
    res.set_content(body, "application/json");
  });
}

MockAnnealerServer::~MockAnnealerServer() { stop(); }

double MockAnnealerServer::effective_beta(std::size_t nodes) const {
  return options_.beta / (1.0 + options_.drift * static_cast<double>(nodes));
}

std::pair<int, std::string> MockAnnealerServer::handle(const std::string& body) {
  const auto request_index = served_++;
  json req;
  try {
    req = json::parse(body);
  } catch (const json::parse_error&) {
    return {400, R"({"error":"request is not JSON"})"};
  }
  try {
    if (req.at("basis").get<std::string>() != "pm1") {
      return {400, R"({"error":"basis must be pm1"})"};
    }
    const auto biases = req.at("biases").get<std::vector<double>>();
    const auto num_reads = req.at("num_reads").get<std::size_t>();
    if (biases.size() > options_.max_nodes) {
      return {413, R"({"error":"problem too large"})"};
    }
    Bounds loose;
    loose.enforced = false;
    BoltzmannMachine bm(Partition{0, 0, biases.size()}, Basis::PlusMinus, loose);
    for (std::size_t i = 0; i < biases.size(); ++i) bm.set_bias(i, biases[i]);
    for (const auto& c : req.at("couplings")) {
      bm.set_coupling(c.at(0).get<std::size_t>(), c.at(1).get<std::size_t>(), c.at(2).get<double>());
    }

    if (options_.fault == MockServerOptions::Fault::BadJson) return {200, "{\"samples\": [[1,"};
    if (options_.fault == MockServerOptions::Fault::ServerError) return {503, R"({"error":"busy"})"};

    SamplerConfig cfg;
    cfg.beta = effective_beta(bm.size());
    cfg.num_reads = num_reads;
    cfg.seed = options_.seed + request_index;
    cfg.enumeration_cap = options_.max_nodes;
    const SampleSet ss = exact_sample(bm, cfg);

    json res;
    res["samples"] = json::array();
    res["counts"] = json::array();
    res["energies"] = json::array();
    for (std::size_t i = 0; i < ss.states.size(); ++i) {
      auto values = ss.states[i].values;
      if (options_.fault == MockServerOptions::Fault::WrongSampleLength) values.push_back(1);
      res["samples"].push_back(values);
      res["counts"].push_back(static_cast<std::uint64_t>(ss.counts[i]));
      res["energies"].push_back(energy(bm, ss.states[i]));
    }
    return {200, res.dump()};
  } catch (const std::exception& e) {
    return {400, json{{"error", e.what()}}.dump()};
  }
}

int MockAnnealerServer::start(const std::string& host, int port) {
  std::lock_guard lock(mutex_);
  if (thread_.joinable()) throw Error("mock server already running");
  host_ = host;
  port_ = port == 0 ? impl_->server.bind_to_any_port(host) : port;
  if (port != 0 && !impl_->server.bind_to_port(host, port)) port_ = -1;
  if (port_ < 0) throw TransportError("mock server could not bind " + host);
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port_;
}

void MockAnnealerServer::listen_blocking(const std::string& host, int port) {
  host_ = host;
  port_ = port;
  if (!impl_->server.listen(host, port)) {
    throw TransportError("mock server could not listen on " + host + ":" + std::to_string(port));
  }
}

void MockAnnealerServer::stop() {
  std::lock_guard lock(mutex_);
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockAnnealerServer::endpoint() const {
  return "http://" + host_ + ":" + std::to_string(port_);
}

}  // namespace qbm
