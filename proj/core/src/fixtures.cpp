#include "qbm/fixtures.hpp"

#include <array>
#include <functional>
#include <map>

#include "qbm/error.hpp"

namespace qbm {

namespace {

// 18x18 upper triangle, row-major, 1e-4 units.
constexpr std::array<int, 171> kTable3TwoPhase = {
    7009, -9446, -4488, -392, -918, 1762, 1967, 2256, 2911, 1935, -3519, 2152, 5159, -329, 1238, -146, 2742, 4321,
    6927, -9555, -3119, -1885, 984, 1944, 2216, 2024, 946, -4469, 1052, 7119, 2408, 1518, 369, 3999, 2524,
    6546, -7917, -2526, -39, -1300, 823, 540, 1529, -4151, 3168, 5857, -242, 2070, 2206, 5279, 3935,
    2176, -6351, -2532, -1320, -58, 887, -831, -2895, 3605, 7262, 516, 1932, 69, 6981, 5151,
    4953, -8388, -4282, -2942, 295, -1597, -1135, 3144, 4633, 1975, 508, 668, 4561, 7515,
    3723, -9747, -4126, -873, -1271, 162, 5440, 3709, 1110, -2177, -613, 3087, 6950,
    7447, -9664, -3826, -1666, 1104, 5864, 1671, 1570, -4787, -780, 2767, 3082,
    8708, -9827, -6112, -21, 5564, 1466, 1168, -5490, 846, 739, 2666,
    -8, -10000, 555, 5624, -300, 2914, -5560, -1283, 778, 4185,
    1141, -101, 3150, -3195, 1092, -4924, 112, -1851, -366,
    7293, 2351, 1420, 785, -848, 1482, 751, 1185,
    -6076, -7248, -1570, 1920, 1674, -3135, -5219,
    -8765, -2469, -265, 868, -6644, -8203,
    1248, 2644, -1203, 1251, -2923,
    6754, 2002, 1893, 1262,
    5498, 1390, 1628,
    -7724, -8370,
    -5756,
};

// 17x17 upper triangle, row-major, 1e-4 units.
constexpr std::array<int, 153> kTable4AdderFunction = {
    7388, 1673, 403, 1804, -10000, -1099, 3941, -4622, -4148, -4683, -2312, 1966, -5299, 2105, -5598, 2222, 2365,
    5546, -27, 909, -3553, 27, -622, -3041, -4952, -808, -2131, -575, -112, -2668, -757, -5554, 5716,
    -1313, -765, -9831, -2594, -1880, 8027, 3455, 2541, -2504, 6611, -1098, -637, 2159, -3021, -940,
    8349, -5823, -585, -3950, -5099, 6058, -1130, 2169, -7715, 4310, -6061, -156, 2999, 6243,
    4358, 9143, 4360, 3205, -4261, -752, -595, -1433, 219, 4846, -1109, 457, 6712,
    -5516, 1903, -3466, 996, 2507, 742, 4412, 3241, -128, -4531, -171, -898,
    1380, -413, -4725, -5755, 2427, 4392, -4545, 5817, -4866, -2200, -7568,
    -1569, 4807, -577, -395, -796, -2633, 3799, 4702, -1537, 3292,
    1274, 3303, 4542, 2661, 2408, -423, 3445, 2003, -1049,
    9421, 4099, 1761, -4561, -824, -3707, 2405, -1580,
    -9482, -4292, 3708, -5064, 5116, -3102, -6825,
    -10693, -4500, -5952, 4610, -1515, -4579,
    10075, -2927, -5589, 2537, -8234,
    -4459, -662, 3866, -4704,
    -137, -330, -786,
    4713, 4098,
    6301,
};

// The published distribution-trained adder table is identical, entry for
// entry, to the function-approximator table; both labels load this data.
constexpr const auto& kTable5AdderDistribution = kTable4AdderFunction;

template <std::size_t N>
BoltzmannMachine from_upper_triangle(const std::array<int, N>& entries, Partition part,
                                     Bounds bounds) {
  bounds.enforced = false;
  BoltzmannMachine bm = BoltzmannMachine::complete(part, Basis::ZeroOne, bounds);
  const std::size_t n = part.total();
  if (n * (n + 1) / 2 != N) throw InvalidArgument("fixture table size mismatch");
  std::size_t idx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double value = entries[idx++] * 1e-4;
      if (i == j) {
        bm.set_bias(i, value);
      } else {
        bm.set_coupling(i, j, value);
      }
    }
  }
  return bm;
}

/// Three visible nodes (2 in, 1 out) and one hidden node with the couplings
/// shown in-figure: vv pairs (1,2), (1,3), (2,3) and vh pairs v_i - h1.
BoltzmannMachine gate_machine(std::array<double, 4> biases, std::array<double, 3> vv,
                              std::array<double, 3> vh) {
  Bounds loose;
  loose.enforced = false;
  BoltzmannMachine bm(Partition{2, 1, 1}, Basis::ZeroOne, loose);
  for (std::size_t i = 0; i < 4; ++i) bm.set_bias(i, biases[i]);
  bm.set_coupling(0, 1, vv[0]);
  bm.set_coupling(0, 2, vv[1]);
  bm.set_coupling(1, 2, vv[2]);
  for (std::size_t i = 0; i < 3; ++i) bm.set_coupling(i, 3, vh[i]);
  return bm;
}

ModelFile make_fixture(std::string_view name) {
  if (name == "fig4a_xor_ground") {
    return {gate_machine({0.25, 0.25, 0.25, 1.0}, {0.5, 0.5, 0.5}, {-1.0, -1.0, -1.0}),
            {{"source", "XOR ground-state machine (in-figure values)"}, {"dataset", "xor"}}};
  }
  if (name == "fig4b_xor_trained") {
    return {gate_machine({0.2250, 0.0928, 0.2250, 0.9104}, {-0.3329, 0.3090, -0.3329},
                         {-0.8482, 1.0, -0.8482}),
            {{"source", "trained XOR machine (in-figure values)"}, {"dataset", "xor"}}};
  }
  if (name == "fig7a_and") {
    return {gate_machine({0.3111, 0.3011, 0.6791, 0.2706}, {0.5737, -0.6829, -0.6727},
                         {-0.6101, -0.6026, 0.3585}),
            {{"source", "AND-gate function approximator (in-figure values)"}, {"dataset", "and"}}};
  }
  if (name == "table3_two_phase") {
    return {from_upper_triangle(kTable3TwoPhase, Partition{10, 0, 8}, Bounds{1.0, 1.0, false}),
            {{"source", "two-phase distribution machine, 1e-4 units"},
             {"dataset", "two_phase"},
             {"trained_beta", "2"},
             {"caveat", "entry v9-v10 printed as -1.0000; loaded as -1.0"}}};
  }
  if (name == "table4_adder_function") {
    return {from_upper_triangle(kTable4AdderFunction, Partition{4, 3, 10}, Bounds{2.0, 1.0, false}),
            {{"source", "2-bit adder trained as function approximator, 1e-4 units"},
             {"dataset", "adder2"},
             {"trained_beta", "5"},
             {"caveat", "published table identical to table5_adder_distribution"}}};
  }
  if (name == "table5_adder_distribution") {
    return {from_upper_triangle(kTable5AdderDistribution, Partition{4, 3, 10}, Bounds{2.0, 1.0, false}),
            {{"source", "2-bit adder trained as distribution, 1e-4 units"},
             {"dataset", "adder2"},
             {"trained_beta", "5"},
             {"caveat", "published table identical to table4_adder_function"}}};
  }
  throw InvalidArgument("unknown fixture '" + std::string(name) + "'");
}

}  // namespace

std::vector<std::string> fixture_names() {
  return {"fig4a_xor_ground", "fig4b_xor_trained", "fig7a_and",
          "table3_two_phase", "table4_adder_function", "table5_adder_distribution"};
}

ModelFile load_fixture_file(std::string_view name) { return make_fixture(name); }

BoltzmannMachine load_fixture(std::string_view name) { return make_fixture(name).machine; }

}  // namespace qbm
