#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "qbm/ising.hpp"

namespace qbm {

/// Free-form provenance attached to saved models (dataset id, seed,
/// reported training beta, caveats). Values are stored as JSON strings.
using ModelMetadata = std::map<std::string, std::string>;

struct ModelFile {
  BoltzmannMachine machine;
  ModelMetadata metadata;
};

/// Model format:
///   {"basis": "01"|"pm1", "m_I": int, "m_O": int, "n": int,
///    "biases": [...], "couplings": [[k, l, value], ...],
///    "h_max": real, "j_max": real, "enforce_bounds": bool,
///    "metadata": {...}}
/// `enforce_bounds` and `metadata` are optional on input.
std::string model_to_json(const BoltzmannMachine& bm,
                          const ModelMetadata& metadata = {});
ModelFile model_from_json(const std::string& text);

void save_model(const std::filesystem::path& path, const BoltzmannMachine& bm,
                const ModelMetadata& metadata = {});
ModelFile load_model(const std::filesystem::path& path);

/// Writes `contents` to a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace qbm
