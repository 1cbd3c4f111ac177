#include "qbm/model_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qbm/error.hpp"

namespace qbm {

using nlohmann::json;

std::string model_to_json(const BoltzmannMachine& bm, const ModelMetadata& metadata) {
  json j;
  j["basis"] = std::string(to_string(bm.basis()));
  j["m_I"] = bm.num_inputs();
  j["m_O"] = bm.num_outputs();
  j["n"] = bm.num_hidden();
  j["biases"] = std::vector<double>(bm.biases().begin(), bm.biases().end());
  auto couplings = json::array();
  for (const auto& c : bm.couplings()) couplings.push_back(json::array({c.k, c.l, c.value}));
  j["couplings"] = std::move(couplings);
  j["h_max"] = bm.bounds().h_max;
  j["j_max"] = bm.bounds().j_max;
  j["enforce_bounds"] = bm.bounds().enforced;
  if (!metadata.empty()) j["metadata"] = metadata;
  return j.dump(2) + "\n";
}

ModelFile model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  }
  try {
    Partition part{j.at("m_I").get<std::size_t>(), j.at("m_O").get<std::size_t>(),
                   j.at("n").get<std::size_t>()};
    Bounds bounds{j.value("h_max", 1.0), j.value("j_max", 1.0),
                  j.value("enforce_bounds", true)};
    // Load unchecked, then validate once so the error names the offending class.
    Bounds loose = bounds;
    loose.enforced = false;
    BoltzmannMachine bm(part, parse_basis(j.at("basis").get<std::string>()), loose);

    const auto biases = j.at("biases").get<std::vector<double>>();
    if (biases.size() != part.total()) {
      throw ParseError("model JSON: biases length " + std::to_string(biases.size()) +
                       " != node count " + std::to_string(part.total()));
    }
    for (std::size_t i = 0; i < biases.size(); ++i) bm.set_bias(i, biases[i]);
    for (const auto& entry : j.at("couplings")) {
      if (!entry.is_array() || entry.size() != 3) {
        throw ParseError("model JSON: coupling entries must be [k, l, value]");
      }
      bm.set_coupling(entry[0].get<std::size_t>(), entry[1].get<std::size_t>(),
                      entry[2].get<double>());
    }
    bm.set_bounds(bounds);

    ModelFile out{std::move(bm), {}};
    if (j.contains("metadata")) {
      for (const auto& [key, value] : j["metadata"].items()) {
        out.metadata[key] = value.is_string() ? value.get<std::string>() : value.dump();
      }
    }
    return out;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const BoltzmannMachine& bm,
                const ModelMetadata& metadata) {
  write_file_atomic(path, model_to_json(bm, metadata));
}

ModelFile load_model(const std::filesystem::path& path) {
  return model_from_json(read_file(path));
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << contents;
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace qbm
