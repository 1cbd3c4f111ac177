#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qbm/model_io.hpp"

namespace qbm {

/// Bundled reference machines, all in the ZeroOne basis with bound
/// enforcement disabled:
///   fig4a_xor_ground           XOR machine whose ground states are the data
///   fig4b_xor_trained          gradient-trained XOR machine
///   fig7a_and                  AND-gate function approximator
///   table3_two_phase           10 visible + 8 hidden, single-boundary data
///   table4_adder_function      2-bit adder, function approximator
///   table5_adder_distribution  2-bit adder, distribution-trained
/// Table values are published in 1e-4 units and scaled on load.
std::vector<std::string> fixture_names();

/// Machine plus metadata ("source", "dataset", "trained_beta", "caveat").
ModelFile load_fixture_file(std::string_view name);
BoltzmannMachine load_fixture(std::string_view name);

}  // namespace qbm
