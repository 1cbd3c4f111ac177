#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "qbm/energy_table.hpp"
#include "qbm/error.hpp"
#include "qbm/fixtures.hpp"
#include "qbm/ising.hpp"
#include "support.hpp"

using namespace qbm;

namespace {

// Independent reference: dense double sum over i < j.
double reference_energy(const BoltzmannMachine& bm, const std::vector<std::int8_t>& s) {
  const auto n = bm.size();
  double e = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    e += bm.bias(i) * s[i];
    for (std::size_t j = i + 1; j < n; ++j) e += bm.coupling(i, j) * s[i] * s[j];
  }
  return e;
}

std::vector<double> boltzmann_by_hand(const BoltzmannMachine& bm, double beta) {
  std::vector<double> p;
  double z = 0.0;
  for (const auto& s : enumerate_states(bm.size(), bm.basis())) {
    p.push_back(std::exp(-beta * reference_energy(bm, s.values)));
    z += p.back();
  }
  for (auto& v : p) v /= z;
  return p;
}

}  // namespace

TEST(Energy, AllZeroStateIsZero) {
  std::mt19937_64 rng(1);
  auto bm = support::random_machine(5, rng);
  EXPECT_EQ(energy(bm, SpinState({0, 0, 0, 0, 0}, Basis::ZeroOne)), 0.0);
}

TEST(Energy, SingleNodeBias) {
  BoltzmannMachine bm(Partition{1, 0, 0});
  bm.set_bias(0, 0.5);
  EXPECT_DOUBLE_EQ(energy(bm, SpinState({1}, Basis::ZeroOne)), 0.5);
}

TEST(Energy, AndGateFixtureState) {
  const auto bm = load_fixture("fig7a_and");
  const double expected = 0.3111 + 0.3011 + 0.6791 + 0.5737 - 0.6829 - 0.6727;
  EXPECT_NEAR(energy(bm, SpinState({1, 1, 1, 0}, Basis::ZeroOne)), expected, 1e-12);
  EXPECT_NEAR(expected, 0.5094, 1e-12);
}

TEST(Energy, MatchesReferenceOnRandomMachines) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto bm = support::random_machine(6, rng);
    for (const auto& s : enumerate_states(6)) {
      EXPECT_NEAR(energy(bm, s), reference_energy(bm, s.values), 1e-12);
    }
  }
}

TEST(Energy, RejectsMismatchedState) {
  BoltzmannMachine bm(Partition{2, 0, 0});
  EXPECT_THROW(energy(bm, SpinState({1}, Basis::ZeroOne)), InvalidArgument);
  EXPECT_THROW(energy(bm, SpinState({1, -1}, Basis::PlusMinus)), InvalidArgument);
  EXPECT_THROW(SpinState({2, 0}, Basis::ZeroOne).validate(), InvalidArgument);
}

TEST(Machine, CouplingsAreSymmetricAndSelfCouplingRejected) {
  BoltzmannMachine bm(Partition{3, 0, 0});
  bm.set_coupling(2, 0, 0.25);
  EXPECT_DOUBLE_EQ(bm.coupling(0, 2), 0.25);
  EXPECT_DOUBLE_EQ(bm.coupling(2, 0), 0.25);
  EXPECT_EQ(bm.couplings().front().k, 0u);
  EXPECT_EQ(bm.coupling(0, 1), 0.0);
  EXPECT_FALSE(bm.has_coupling(0, 1));
  EXPECT_THROW(bm.set_coupling(1, 1, 0.1), InvalidArgument);
  EXPECT_THROW(bm.set_coupling(0, 3, 0.1), InvalidArgument);
}

TEST(Machine, BoundsEnforced) {
  BoltzmannMachine bm(Partition{2, 0, 0}, Basis::ZeroOne, Bounds{1.0, 0.5, true});
  EXPECT_THROW(bm.set_bias(0, 1.5), InvalidArgument);
  EXPECT_THROW(bm.set_coupling(0, 1, -0.6), InvalidArgument);
  EXPECT_NO_THROW(bm.set_coupling(0, 1, -0.5));
  EXPECT_THROW(bm.set_bias(0, std::nan("")), InvalidArgument);
  bm.set_bounds(Bounds{1.0, 0.5, false});
  EXPECT_NO_THROW(bm.set_bias(0, 3.0));
  EXPECT_THROW(bm.set_bounds(Bounds{1.0, 0.5, true}), InvalidArgument);
}

TEST(Machine, PartitionOrderAndParameters) {
  auto bm = BoltzmannMachine::complete(Partition{2, 1, 2});
  EXPECT_EQ(bm.size(), 5u);
  EXPECT_EQ(bm.num_visible(), 3u);
  EXPECT_EQ(bm.couplings().size(), 10u);
  EXPECT_EQ(bm.num_parameters(), 15u);
  std::vector<double> theta(15);
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = 0.01 * static_cast<double>(i);
  bm.set_parameters(theta);
  EXPECT_EQ(bm.parameters(), theta);
  EXPECT_DOUBLE_EQ(bm.bias(4), 0.04);
  EXPECT_DOUBLE_EQ(bm.coupling(0, 1), 0.05);
  EXPECT_THROW(bm.set_parameters(std::vector<double>(3)), InvalidArgument);
}

TEST(States, EncodeDecodeLexicographic) {
  EXPECT_EQ(encode_state(std::vector<std::int8_t>{1, 0, 0}, Basis::ZeroOne), 4u);
  EXPECT_EQ(encode_state(std::vector<std::int8_t>{-1, 1}, Basis::PlusMinus), 1u);
  EXPECT_EQ(decode_state(6, 3, Basis::ZeroOne).values, (std::vector<std::int8_t>{1, 1, 0}));
  EXPECT_EQ(decode_state(2, 2, Basis::PlusMinus).values, (std::vector<std::int8_t>{1, -1}));
}

TEST(States, ConvertState) {
  EXPECT_EQ(convert_state(SpinState({0, 1, 0}, Basis::ZeroOne)),
            SpinState({-1, 1, -1}, Basis::PlusMinus));
  EXPECT_EQ(convert_state(SpinState({0, 0, 0, 0}, Basis::ZeroOne)).values,
            (std::vector<std::int8_t>{-1, -1, -1, -1}));
  std::mt19937_64 rng(3);
  std::bernoulli_distribution coin(0.5);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::int8_t> v(9);
    for (auto& x : v) x = coin(rng) ? 1 : 0;
    const SpinState s(v, Basis::ZeroOne);
    EXPECT_EQ(convert_state(convert_state(s)), s);
  }
}

TEST(Enumeration, SmallCountsAndOrder) {
  auto r1 = enumerate_states(1);
  std::vector<SpinState> got(r1.begin(), r1.end());
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].values, std::vector<std::int8_t>{0});
  EXPECT_EQ(got[1].values, std::vector<std::int8_t>{1});
  EXPECT_EQ(enumerate_states(2).size(), 4u);
  std::vector<SpinState> two(enumerate_states(2).begin(), enumerate_states(2).end());
  EXPECT_EQ(two[1].values, (std::vector<std::int8_t>{0, 1}));
}

TEST(Enumeration, EighteenNodesDistinct) {
  const auto range = enumerate_states(18);
  EXPECT_EQ(range.size(), 262144u);
  std::set<StateCode> seen;
  for (auto it = range.begin(); it != range.end(); ++it) seen.insert(it.code());
  EXPECT_EQ(seen.size(), 262144u);
  // Spot-check decoding at both ends.
  EXPECT_EQ((*range.begin()).values, std::vector<std::int8_t>(18, 0));
}

TEST(Enumeration, SliceIsRestartable) {
  const auto range = enumerate_states(4);
  const auto part = range.slice(5, 9);
  EXPECT_EQ(part.size(), 4u);
  EXPECT_EQ((*part.begin()).values, (std::vector<std::int8_t>{0, 1, 0, 1}));
}

TEST(Enumeration, CapExceeded) {
  EXPECT_THROW(enumerate_states(25), CapacityError);
  EXPECT_THROW(enumerate_states(10, Basis::ZeroOne, 8), CapacityError);
  BoltzmannMachine big(Partition{25, 0, 0});
  EXPECT_THROW(ground_states(big), CapacityError);
}

TEST(Clamp, NothingClampedIsIdentity) {
  std::mt19937_64 rng(11);
  auto bm = support::random_machine(Partition{2, 1, 2}, rng);
  auto cr = clamp_visible(bm, {});
  EXPECT_DOUBLE_EQ(cr.offset, 0.0);
  EXPECT_EQ(cr.reduced.parameters(), bm.parameters());
  EXPECT_EQ(cr.reduced.partition(), bm.partition());
}

TEST(Clamp, ZeroClampKillsInteraction) {
  BoltzmannMachine bm(Partition{2, 0, 0});
  bm.set_bias(1, 0.3);
  bm.set_coupling(0, 1, 0.7);
  const std::vector<std::int8_t> zero{0};
  auto cr = clamp_visible(bm, zero);
  EXPECT_DOUBLE_EQ(cr.offset, 0.0);
  EXPECT_DOUBLE_EQ(cr.reduced.bias(0), 0.3);
}

TEST(Clamp, AndFixtureHiddenBias) {
  const auto bm = load_fixture("fig7a_and");
  const std::vector<std::int8_t> v{1, 1, 1};
  auto cr = clamp_visible(bm, v);
  ASSERT_EQ(cr.reduced.size(), 1u);
  EXPECT_NEAR(cr.reduced.bias(0), 0.2706 - 0.6101 - 0.6026 + 0.3585, 1e-12);
  EXPECT_NEAR(cr.reduced.bias(0), -0.5836, 1e-12);
  EXPECT_NEAR(cr.offset, 0.5094, 1e-12);
  EXPECT_EQ(cr.reduced.num_hidden(), 1u);
}

TEST(Clamp, EnergyIdentityExhaustive) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    auto bm = support::random_machine(Partition{3, 2, 4}, rng);
    std::vector<std::int8_t> v(5);
    for (auto& x : v) x = static_cast<std::int8_t>(rng() & 1);
    auto cr = clamp_visible(bm, v);
    for (const auto& h : enumerate_states(cr.reduced.size())) {
      std::vector<std::int8_t> full(v);
      full.insert(full.end(), h.values.begin(), h.values.end());
      EXPECT_NEAR(reference_energy(bm, full), cr.offset + energy(cr.reduced, h), 1e-12);
    }
  }
}

TEST(Clamp, ArbitrarySubsetAndPlusMinus) {
  std::mt19937_64 rng(9);
  auto bm = convert_basis(support::random_machine(6, rng));
  const std::vector<std::size_t> nodes{4, 1};
  const std::vector<std::int8_t> values{-1, 1};
  auto cr = clamp(bm, nodes, values);
  EXPECT_EQ(cr.free_nodes, (std::vector<std::size_t>{0, 2, 3, 5}));
  for (const auto& h : enumerate_states(4, Basis::PlusMinus)) {
    std::vector<std::int8_t> full(6);
    for (std::size_t f = 0; f < 4; ++f) full[cr.free_nodes[f]] = h.values[f];
    full[4] = -1;
    full[1] = 1;
    EXPECT_NEAR(reference_energy(bm, full), cr.offset + energy(cr.reduced, h), 1e-12);
  }
  const std::vector<std::int8_t> bad{0, 1};
  EXPECT_THROW(clamp(bm, nodes, bad), InvalidArgument);
}

TEST(Clamp, PreservesFreeEnergyGaps) {
  std::mt19937_64 rng(21);
  auto bm = support::random_machine(Partition{3, 0, 3}, rng);
  const std::vector<std::int8_t> v{1, 0, 1};
  auto cr = clamp_visible(bm, v);
  std::vector<double> full_e, red_e;
  for (const auto& h : enumerate_states(3)) {
    std::vector<std::int8_t> s(v);
    s.insert(s.end(), h.values.begin(), h.values.end());
    full_e.push_back(reference_energy(bm, s));
    red_e.push_back(energy(cr.reduced, h));
  }
  for (std::size_t i = 1; i < full_e.size(); ++i) {
    EXPECT_NEAR(full_e[i] - full_e[0], red_e[i] - red_e[0], 1e-12);
  }
}

TEST(Basis, SingleNode) {
  BoltzmannMachine bm(Partition{1, 0, 0});
  bm.set_bias(0, 1.0);
  auto pm = convert_basis(bm);
  EXPECT_EQ(pm.basis(), Basis::PlusMinus);
  EXPECT_DOUBLE_EQ(pm.bias(0), 0.5);
}

TEST(Basis, TwoNodeExample) {
  BoltzmannMachine bm(Partition{2, 0, 0}, Basis::ZeroOne, Bounds{1, 1, false});
  bm.set_coupling(0, 1, 4.0);
  auto pm = convert_basis(bm);
  EXPECT_DOUBLE_EQ(pm.coupling(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(pm.bias(0), 1.0);
  EXPECT_DOUBLE_EQ(pm.bias(1), 1.0);
  std::vector<double> e01, epm;
  for (const auto& s : enumerate_states(2)) e01.push_back(energy(bm, s));
  for (const auto& s : enumerate_states(2, Basis::PlusMinus)) epm.push_back(energy(pm, s));
  EXPECT_EQ(e01, (std::vector<double>{0, 0, 0, 4}));
  EXPECT_EQ(epm, (std::vector<double>{-1, -1, -1, 3}));
}

TEST(Basis, PreservesBoltzmannProbabilities) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    auto bm = support::random_machine(1 + trial % 8, rng);
    auto pm = convert_basis(bm);
    for (double beta : {0.5, 1.0, 2.0}) {
      const auto a = boltzmann_by_hand(bm, beta);
      const auto b = boltzmann_by_hand(pm, beta);
      for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
    }
  }
}

TEST(Basis, RoundTripIdentity) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    auto bm = support::random_machine(Partition{2, 2, 3}, rng);
    auto back = convert_basis(convert_basis(bm));
    EXPECT_EQ(back.basis(), Basis::ZeroOne);
    EXPECT_EQ(back.partition(), bm.partition());
    const auto a = bm.parameters();
    const auto b = back.parameters();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  }
}

TEST(GroundStates, FlatMachine) {
  BoltzmannMachine bm(Partition{3, 0, 0});
  auto gs = ground_states(bm);
  EXPECT_EQ(gs.states.size(), 8u);
  EXPECT_EQ(gs.e_min, 0.0);
}

TEST(GroundStates, SingleNodePositiveBias) {
  BoltzmannMachine bm(Partition{1, 0, 0});
  bm.set_bias(0, 1.0);
  auto gs = ground_states(bm);
  ASSERT_EQ(gs.states.size(), 1u);
  EXPECT_EQ(gs.states[0].values, std::vector<std::int8_t>{0});
  EXPECT_EQ(gs.e_min, 0.0);
}

TEST(GroundStates, XorFixtureVisibleProjection) {
  const auto bm = load_fixture("fig4a_xor_ground");
  auto gs = ground_states(bm);
  std::set<std::string> visible;
  for (const auto& s : gs.states) visible.insert(s.to_bitstring().substr(0, 3));
  EXPECT_EQ(visible, (std::set<std::string>{"000", "011", "101", "110"}));
  EXPECT_EQ(gs.states.size(), 4u);
  EXPECT_NEAR(gs.e_min, 0.0, 1e-12);
}

TEST(EnergyTable, MatchesDirectEnergies) {
  std::mt19937_64 rng(23);
  for (auto basis : {Basis::ZeroOne, Basis::PlusMinus}) {
    auto bm = support::random_machine(7, rng);
    if (basis == Basis::PlusMinus) bm = convert_basis(bm);
    EnergyTable table(bm);
    std::size_t i = 0;
    for (const auto& s : enumerate_states(7, basis)) {
      EXPECT_NEAR(table.energies()[i++], reference_energy(bm, s.values), 1e-12);
    }
    const auto p = table.boltzmann(1.3);
    const auto q = boltzmann_by_hand(bm, 1.3);
    for (std::size_t k = 0; k < p.size(); ++k) EXPECT_NEAR(p[k], q[k], 1e-12);
  }
}
