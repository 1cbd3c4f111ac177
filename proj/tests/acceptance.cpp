// Acceptance suite: one PASS/FAIL line per criterion.
//
//   qbm_acceptance                 run all criteria
//   qbm_acceptance --criterion N   run one criterion
//
// Exit status is non-zero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "qbm/dataset.hpp"
#include "qbm/fixtures.hpp"
#include "qbm/metrics.hpp"
#include "qbm/sampler.hpp"
#include "qbm/training.hpp"
#include "support.hpp"

using namespace qbm;

namespace {

// Pinned tolerances.
constexpr double kGradRelTol = 1e-6;
constexpr double kGradRelFloor = 1e-3;
constexpr double kFdStep = 1e-5;
constexpr double kClampTol = 1e-12;
constexpr double kBasisTol = 1e-12;
constexpr double kXorDklAt10 = 0.05;
constexpr double kTwoPhaseLo = 1.5, kTwoPhaseHi = 3.0;
constexpr double kAndBestDkl = 1e-2;
constexpr double kAndSpread = 10.0;
constexpr double kAdderLo = 0.15, kAdderHi = 0.45;
constexpr double kFitExactRel = 0.02;
constexpr double kFitGibbsRel = 0.10;
constexpr double kCurvatureFloor = -1e-9;
constexpr double kGibbsHellinger = 0.02;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Dataset random_dataset(std::size_t width, std::size_t rows, std::mt19937_64& rng,
                       std::optional<IoSplit> split = std::nullopt) {
  std::uniform_int_distribution<StateCode> pick(0, (StateCode{1} << width) - 1);
  std::uniform_real_distribution<double> w(0.1, 1.0);
  std::set<StateCode> codes;
  while (codes.size() < std::min<std::size_t>(rows, std::size_t{1} << width)) codes.insert(pick(rng));
  std::vector<std::vector<std::int8_t>> out;
  std::vector<double> weights;
  double total = 0.0;
  for (StateCode c : codes) {
    out.push_back(decode_state(c, width, Basis::ZeroOne).values);
    weights.push_back(w(rng));
    total += weights.back();
  }
  for (double& x : weights) x /= total;
  return Dataset(std::move(out), std::move(weights), split);
}

// 1. Exact gradients against central differences.
Outcome gradients() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int m = 0; m < 20; ++m) {
    const std::size_t visible = 2 + m % 4;
    const std::size_t hidden = 1 + m % 3;  // up to 8 nodes
    SamplerConfig cfg;
    cfg.beta = 0.5 + 0.25 * (m % 5);
    if (m % 2 == 0) {
      auto bm = support::random_machine(Partition{visible, 0, hidden}, rng);
      const auto data = random_dataset(visible, 1 + m % 5, rng);
      auto g = grad_dkl(bm, data, GradientMode::Exact, cfg).flat();
      for (auto& v : g) v *= cfg.beta;
      const auto fd = finite_difference_gradient(
          [&](const BoltzmannMachine& x) { return ExactModel(x).kl(data, cfg.beta); }, bm, kFdStep);
      worst = std::max(worst, support::max_rel_error(g, fd.flat(), kGradRelFloor));
    } else {
      const std::size_t in = 1 + visible / 2, out = visible + 1 - in;
      auto bm = support::random_machine(Partition{in, out, hidden}, rng);
      const auto data = random_dataset(in + out, 2 + m % 4, rng, IoSplit{in, out});
      auto g = grad_ncll(bm, data, GradientMode::Exact, cfg).flat();
      for (auto& v : g) v *= cfg.beta;
      const auto fd = finite_difference_gradient(
          [&](const BoltzmannMachine& x) { return ExactModel(x).ncll(data, cfg.beta); }, bm, kFdStep);
      worst = std::max(worst, support::max_rel_error(g, fd.flat(), kGradRelFloor));
    }
  }
  const double t = seconds_since(t0);
  return {worst <= kGradRelTol && t < 30.0,
          fmt("max rel error %.2e (tol %.0e), %.2f s", worst, kGradRelTol, t)};
}

// 2. energy(bm, v+h) == offset + energy(reduced, h).
Outcome clamping() {
  std::mt19937_64 rng(202);
  double worst = 0.0;
  for (int m = 0; m < 20; ++m) {
    const std::size_t n = 2 + m % 9;
    const auto bm = support::random_machine(n, rng);
    std::vector<std::size_t> nodes;
    for (std::size_t i = 0; i < n; ++i) if (rng() % 2) nodes.push_back(i);
    if (nodes.size() == n) nodes.pop_back();
    std::vector<std::int8_t> values;
    for (std::size_t i = 0; i < nodes.size(); ++i) values.push_back(static_cast<std::int8_t>(rng() % 2));
    const auto c = clamp(bm, nodes, values);
    for (const auto& h : enumerate_states(c.reduced.size(), Basis::ZeroOne)) {
      std::vector<std::int8_t> full(n);
      for (std::size_t i = 0; i < nodes.size(); ++i) full[nodes[i]] = values[i];
      for (std::size_t i = 0; i < c.free_nodes.size(); ++i) full[c.free_nodes[i]] = h.values[i];
      worst = std::max(worst, std::abs(energy(bm, full) - (c.offset + energy(c.reduced, h))));
    }
  }
  return {worst <= kClampTol, fmt("max abs deviation %.2e (tol %.0e)", worst, kClampTol)};
}

// 3. Probabilities unchanged by the basis conversion.
Outcome basis_invariance() {
  std::mt19937_64 rng(303);
  double worst = 0.0;
  for (int m = 0; m < 20; ++m) {
    const auto bm = support::random_machine(1 + m % 8, rng);
    const auto pm = convert_basis(bm);
    for (double beta : {0.5, 1.0, 2.0}) {
      const auto a = ExactModel(bm).joint(beta);
      const auto b = ExactModel(pm).joint(beta);
      for (std::size_t i = 0; i < a.size(); ++i) {
        const auto s = decode_state(i, bm.size(), Basis::ZeroOne);
        const auto j = encode_state(convert_state(s).values, Basis::PlusMinus);
        worst = std::max(worst, std::abs(a[i] - b[j]));
      }
    }
  }
  return {worst <= kBasisTol, fmt("max abs deviation %.2e (tol %.0e)", worst, kBasisTol)};
}

// 4. XOR ground-state machine.
Outcome xor_fixture() {
  const auto t0 = Clock::now();
  const auto bm = load_fixture("fig4a_xor_ground");
  const auto data = logic_gate(Gate::Xor);
  std::set<std::string> projections;
  for (const auto& s : ground_states(bm).states) {
    std::string bits;
    for (std::size_t i = 0; i < 3; ++i) bits += static_cast<char>('0' + s.values[i]);
    projections.insert(bits);
  }
  const bool ground_ok = projections == std::set<std::string>{"000", "011", "101", "110"};
  const ExactModel model(bm);
  bool decreasing = true;
  double prev = model.kl(data, 0.5);
  double first_rise = 0.0;
  for (double beta : linear_beta_grid(0.5, 10.0, 381)) {
    if (beta == 0.5) continue;
    const double d = model.kl(data, beta);
    if (!(d < prev) && decreasing) {
      decreasing = false;
      first_rise = beta;
    }
    prev = d;
  }
  const double at10 = model.kl(data, 10.0);
  const double t = seconds_since(t0);
  std::string detail = fmt("ground projections %s; D_KL(10) = %.4f (tol < %.2f); ",
                           ground_ok ? "exact" : "wrong", at10, kXorDklAt10);
  detail += decreasing ? "strictly decreasing" : fmt("not decreasing at beta %.3f", first_rise);
  detail += fmt("; %.2f s", t);
  return {ground_ok && decreasing && at10 < kXorDklAt10 && t < 1.0, detail};
}

// 5. Published two-phase machine.
Outcome two_phase_fixture() {
  const auto t0 = Clock::now();
  const ExactModel model(load_fixture("table3_two_phase"));
  const auto grid = linear_beta_grid(0.5, 6.0, 23);
  const auto best = minimize_kl_over_beta(model, two_phase(), grid);
  const double t = seconds_since(t0);
  const bool ok = best.interior && best.beta >= kTwoPhaseLo && best.beta <= kTwoPhaseHi && t < 120.0;
  return {ok, fmt("argmin beta %.3f (D_KL %.4f), want [%.1f, %.1f]; %.2f s", best.beta, best.dkl,
                  kTwoPhaseLo, kTwoPhaseHi, t)};
}

// 6. AND-gate distribution training over 5 seeds.
Outcome and_training() {
  const auto t0 = Clock::now();
  std::vector<double> finals;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TrainingConfig cfg;  // eta 0.1, lambda 1e-5, nu 0.6, 1000 steps
    cfg.sampler.beta = 10.0;
    cfg.seed = seed;
    finals.push_back(train_distribution(logic_gate(Gate::And), parse_architecture("3v1h"), cfg).final_loss);
  }
  const double best = *std::min_element(finals.begin(), finals.end());
  const double spread = *std::max_element(finals.begin(), finals.end()) / best;
  const double t = seconds_since(t0);
  std::string detail = "final D_KL";
  for (double f : finals) detail += fmt(" %.3e", f);
  detail += fmt("; best %.2e (tol %.0e), spread %.1fx (want >= %.0fx); %.2f s", best, kAndBestDkl,
                spread, kAndSpread, t);
  return {best <= kAndBestDkl && spread >= kAndSpread && t < 120.0, detail};
}

// 7. Adder function approximator conditionals.
Outcome adder_conditionals() {
  const auto t0 = Clock::now();
  const ExactModel model(load_fixture("table4_adder_function"));
  const auto data = adder2();
  double lowest = 1.0;
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto out = data.outputs(r);
    lowest = std::min(lowest, model.conditional(5.0, data.inputs(r)).probability(
                                  encode_state(out, Basis::ZeroOne)));
  }
  const double t = seconds_since(t0);
  return {lowest >= kAdderLo && lowest <= kAdderHi && t < 10.0,
          fmt("min conditional %.4f at beta 5, want [%.2f, %.2f] (reference ~0.3; parameter table "
              "shared with the distribution machine); %.2f s",
              lowest, kAdderLo, kAdderHi, t)};
}

// 8. Inverse temperature recovery.
Outcome beta_recovery() {
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> pick_beta(0.5, 5.0);
  const auto grid = log_beta_grid(0.1, 20.0, 60);
  double worst_exact = 0.0;
  for (int m = 0; m < 10; ++m) {
    const auto bm = support::random_machine(3 + m % 6, rng);
    SamplerConfig cfg;
    cfg.beta = pick_beta(rng);
    cfg.exhaustive = true;
    const auto fit = fit_beta(exact_sample(bm, cfg), bm, grid);
    worst_exact = std::max(worst_exact, std::abs(fit.beta_star - cfg.beta) / cfg.beta);
  }
  double worst_gibbs = 0.0;
  for (int m = 0; m < 5; ++m) {
    const auto bm = support::random_machine(6, rng);
    SamplerConfig cfg;
    cfg.beta = 3.0;
    cfg.num_reads = 100000;
    cfg.backend = Backend::Gibbs;
    cfg.seed = 8000 + m;
    const auto fit = fit_beta(gibbs_sample(bm, cfg), bm, grid);
    worst_gibbs = std::max(worst_gibbs, std::abs(fit.beta_star - 3.0) / 3.0);
  }
  return {worst_exact <= kFitExactRel && worst_gibbs <= kFitGibbsRel,
          fmt("exhaustive worst rel %.2e (tol %.2f); Gibbs worst rel %.3f (tol %.2f)", worst_exact,
              kFitExactRel, worst_gibbs, kFitGibbsRel)};
}

// Smallest doubling beta past which every excited state loses mass, or 0.
// d ln p(s)/d beta = <E> - E(s); <E> falls monotonically, so one sign change suffices.
double corollary_beta(const ExactModel& model) {
  const auto e = model.table().energies();
  double e1 = INFINITY;
  for (double x : e) if (x > model.table().min() + 1e-9 * std::max(1.0, std::abs(x))) e1 = std::min(e1, x);
  for (double beta = 0.125; beta <= 1e6; beta *= 2.0) {
    const auto p = model.joint(beta);
    double mean = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) mean += p[i] * e[i];
    if (mean < e1) return beta;
  }
  return 0.0;
}

// 9. Ground-state monotonicity, eventual excited-state decay, curvature at fitted optima.
Outcome propositions() {
  std::mt19937_64 rng(909);
  const auto grid = log_beta_grid(0.1, 50.0, 60);
  int prop1_bad = 0, cor3_bad = 0, skipped = 0;
  for (int m = 0; m < 200; ++m) {
    const auto bm = support::random_machine(2 + m % 9, rng);
    const ExactModel model(bm);
    if (model.ground_state_count() == (std::size_t{1} << bm.size())) {
      ++skipped;
      continue;
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
      if (!(model.excited_log_mass(grid[i]) < model.excited_log_mass(grid[i - 1]))) {
        ++prop1_bad;
        break;
      }
    }
    if (corollary_beta(model) == 0.0) ++cor3_bad;
  }
  const std::vector<std::pair<const char*, Dataset>> trained{
      {"fig4b_xor_trained", logic_gate(Gate::Xor)},
      {"fig7a_and", logic_gate(Gate::And)},
      {"table3_two_phase", two_phase()},
      {"table4_adder_function", adder2()},
      {"table5_adder_distribution", adder2()}};
  std::string curv;
  bool curv_ok = true;
  const auto kl_grid = log_beta_grid(0.1, 100.0, 60);
  for (const auto& [name, data] : trained) {
    const ExactModel model(load_fixture(name));
    const auto best = minimize_kl_over_beta(model, data, kl_grid);
    if (!best.interior) {
      curv += fmt(" %s:no-interior-min", name);
      continue;
    }
    const double d2 = model.kl_beta_derivatives(data, best.beta).second;
    curv_ok = curv_ok && d2 >= kCurvatureFloor;
    curv += fmt(" %s:%.3g@%.2f", name, d2, best.beta);
  }
  return {prop1_bad == 0 && cor3_bad == 0 && curv_ok,
          fmt("ground-mass counterexamples %d, excited-decay counterexamples %d (%d flat skipped); d2 D_KL:",
              prop1_bad, cor3_bad, skipped) + curv};
}

// 10. Gibbs sampler against the exact joint.
Outcome gibbs_convergence() {
  std::vector<double> distances;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    const auto bm = support::random_machine(6, rng);
    SamplerConfig cfg;
    cfg.beta = 1.0;
    cfg.num_reads = 100000;
    cfg.backend = Backend::Gibbs;
    cfg.seed = seed;
    std::vector<std::size_t> all{0, 1, 2, 3, 4, 5};
    distances.push_back(hellinger(empirical_distribution(gibbs_sample(bm, cfg)),
                                  model_probability(bm, 1.0, all)));
  }
  std::sort(distances.begin(), distances.end());
  const double median = 0.5 * (distances[4] + distances[5]);
  return {median <= kGibbsHellinger,
          fmt("median Hellinger %.4f (tol %.2f), max %.4f", median, kGibbsHellinger, distances.back())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"gradient oracle equivalence", gradients},
      {"clamping identity", clamping},
      {"basis invariance", basis_invariance},
      {"XOR ground-state fixture", xor_fixture},
      {"two-phase beta window", two_phase_fixture},
      {"AND-gate training", and_training},
      {"adder conditionals", adder_conditionals},
      {"beta recovery", beta_recovery},
      {"propositions suite", propositions},
      {"sampler convergence", gibbs_convergence}};

  int only = 0;
  if (argc == 3 && std::string(argv[1]) == "--criterion") only = std::atoi(argv[2]);
  if ((argc != 1 && argc != 3) || only < 0 || only > static_cast<int>(criteria.size())) {
    std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
    return 2;
  }

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<int>(i) + 1 != only) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
