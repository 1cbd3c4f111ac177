#include <chrono>
#include <iostream>

#include "commands.hpp"
#include "qbm/fixtures.hpp"
#include "qbm/metrics.hpp"
#include "qbm/remote.hpp"

namespace qbm::cli {

namespace {

class Pipeline {
 public:
  Pipeline(fs::path root, std::size_t jobs) : root_(std::move(root)), jobs_(jobs), manifest_("reproduce") {}

  void stage(const std::string& name, const std::function<json()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    std::cerr << "[reproduce] " << name << " ..." << std::flush;
    json result = body();
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result["seconds"] = s;
    summary_[name] = result;
    std::cerr << " " << s << " s\n";
  }

  fs::path file(const std::string& rel) {
    const auto p = root_ / rel;
    manifest_.add_output(p);
    return p;
  }

  TrainingResult train(const std::string& rel, const Dataset& data, const std::string& arch,
                       bool function, TrainingConfig cfg) {
    const auto a = parse_architecture(arch);
    auto r = function ? train_function_approximator(data, a, cfg) : train_distribution(data, a, cfg);
    write_text(file(rel + "/trace.csv"), r.trace.to_csv());
    save_model(file(rel + "/model.json"), r.machine,
               {{"dataset", data.name()},
                {"arch", arch},
                {"mode", function ? "function" : "distribution"},
                {"seed", std::to_string(cfg.seed)},
                {"trained_beta", std::to_string(cfg.sampler.beta)}});
    manifest_.add_seed(cfg.seed);
    return r;
  }

  void sweep(const std::string& rel, const BoltzmannMachine& bm, const Dataset& data,
             const std::vector<double>& grid) {
    write_text(file(rel), sweep_csv(bm, &data, grid));
  }

  std::size_t jobs() const { return jobs_; }

  void finish() {
    write_json(file("summary.json"), summary_);
    manifest_.set_config({{"pipeline", "desk-scale"}, {"jobs", jobs_}});
    manifest_.write(root_ / "manifest.json");
    std::cout << summary_.dump(2) << "\n";
  }

 private:
  fs::path root_;
  std::size_t jobs_;
  RunManifest manifest_;
  json summary_ = json::object();
};

json kl_minimum(const BoltzmannMachine& bm, const Dataset& data, const std::vector<double>& grid) {
  const auto m = minimize_kl_over_beta(ExactModel(bm), data, grid);
  return {{"beta", m.beta}, {"dkl", m.dkl}, {"interior", m.interior}};
}

}  // namespace

int cmd_reproduce(const ReproduceOptions& o) {
  Pipeline p(o.out, o.jobs);
  const auto wide = log_beta_grid(0.1, 100.0, 60);
  const auto unit = linear_beta_grid(1.0, 10.0, 37);

  p.stage("two_phase", [&] {
    const auto data = two_phase();
    const auto fixture = load_fixture("table3_two_phase");
    p.sweep("two_phase/fixture_sweep.csv", fixture, data, linear_beta_grid(0.25, 8.0, 32));
    TrainingConfig cfg;
    cfg.sampler.beta = 2.0;
    const auto r = p.train("two_phase/train_beta2", data, "10v8h", false, cfg);
    p.sweep("two_phase/trained_sweep.csv", r.machine, data, linear_beta_grid(0.25, 8.0, 32));
    return json{{"fixture_min", kl_minimum(fixture, data, linear_beta_grid(0.5, 6.0, 23))},
                {"trained_initial_dkl", r.trace.records().front().loss},
                {"trained_final_dkl", r.final_loss},
                {"trained_min", kl_minimum(r.machine, data, wide)}};
  });

  p.stage("xor", [&] {
    const auto data = logic_gate(Gate::Xor);
    const auto ground = load_fixture("fig4a_xor_ground");
    const auto trained = load_fixture("fig4b_xor_trained");
    p.sweep("xor/ground_sweep.csv", ground, data, wide);
    p.sweep("xor/trained_sweep.csv", trained, data, wide);
    return json{{"ground_dkl_at_10", ExactModel(ground).kl(data, 10.0)},
                {"ground_dkl_at_100", ExactModel(ground).kl(data, 100.0)},
                {"trained_min", kl_minimum(trained, data, wide)}};
  });

  p.stage("or_hidden", [&] {
    // Per-size training beta from a drifting mock annealer (synthetic).
    MockServerOptions mo;
    mo.beta = 10.0;
    mo.drift = 0.05;
    const MockAnnealerServer mock(mo);
    const auto data = logic_gate(Gate::Or);
    const std::vector<std::size_t> hidden{1, 2, 5, 10};
    std::vector<json> rows(hidden.size());
    parallel_for(hidden.size(), p.jobs(), [&](std::size_t i) {
      TrainingConfig cfg;
      cfg.sampler.beta = mock.effective_beta(3 + hidden[i]);
      const auto arch = "3v" + std::to_string(hidden[i]) + "h";
      const auto a = parse_architecture(arch);
      const auto r = train_distribution(data, a, cfg);
      rows[i] = {{"hidden", hidden[i]}, {"training_beta", cfg.sampler.beta},
                 {"final_dkl", r.final_loss}, {"min", kl_minimum(r.machine, data, wide)}};
      rows[i]["sweep"] = sweep_csv(r.machine, &data, wide);
      rows[i]["trace"] = r.trace.to_csv();
    });
    json out = json::array();
    for (auto& row : rows) {
      const auto tag = "or_hidden/h" + std::to_string(row["hidden"].get<std::size_t>());
      write_text(p.file(tag + "_sweep.csv"), row["sweep"].get<std::string>());
      write_text(p.file(tag + "_trace.csv"), row["trace"].get<std::string>());
      row.erase("sweep");
      row.erase("trace");
      out.push_back(row);
    }
    return json{{"note", "training beta per size from a synthetic drift model"}, {"runs", out}};
  });

  p.stage("and_function", [&] {
    const auto data = logic_gate(Gate::And);
    p.sweep("and_function/fixture_sweep.csv", load_fixture("fig7a_and"), data, unit);
    TrainingConfig cfg;
    cfg.sampler.beta = 3.0;
    const auto r = p.train("and_function/train_beta3", data, "2i1o1h", true, cfg);
    p.sweep("and_function/trained_sweep.csv", r.machine, data, unit);
    double lowest = 1.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      lowest = std::min(lowest, conditional_probability(r.machine, 3.0, data.inputs(i))
                                    .probability(encode_state(data.outputs(i), Basis::ZeroOne)));
    }
    return json{{"final_ncll", r.final_loss}, {"min_conditional_at_3", lowest}};
  });

  p.stage("and_seeds", [&] {
    const auto data = logic_gate(Gate::And);
    std::vector<TrainingResult> results(5);
    parallel_for(5, p.jobs(), [&](std::size_t k) {
      TrainingConfig cfg;
      cfg.sampler.beta = 10.0;
      cfg.seed = k;
      results[k] = train_distribution(data, parse_architecture("3v1h"), cfg);
    });
    json finals = json::array();
    for (std::size_t k = 0; k < 5; ++k) {
      write_text(p.file("and_seeds/seed_" + std::to_string(k) + "_trace.csv"), results[k].trace.to_csv());
      finals.push_back(results[k].final_loss);
    }
    return json{{"training_beta", 10.0}, {"final_dkl", finals}};
  });

  p.stage("beta_fit", [&] {
    FitOptions fo;
    fo.sizes = "4:10";
    fo.beta = 3.0;
    fo.reads = 20000;
    fo.jobs = p.jobs();
    fo.backend = "gibbs";
    const auto local = fit_beta_table(fo, "");
    MockServerOptions mo;
    mo.beta = 10.0;
    mo.drift = 0.05;
    MockAnnealerServer mock(mo);
    mock.start();
    fo.backend = "remote";
    fo.jobs = 1;
    auto remote = fit_beta_table(fo, mock.endpoint());
    for (auto& row : remote) row["mock_effective_beta"] = mock.effective_beta(row["size"].get<std::size_t>());
    mock.stop();
    write_json(p.file("beta_fit/local.json"), local);
    write_json(p.file("beta_fit/mock_remote.json"), remote);
    return json{{"local", local}, {"mock_remote", remote},
                {"note", "mock remote drift is synthetic; shape check only"}};
  });

  p.stage("adder", [&] {
    const auto data = adder2();
    const auto fn = load_fixture("table4_adder_function");
    const auto dist = load_fixture("table5_adder_distribution");
    p.sweep("adder/function_sweep.csv", fn, data, unit);
    p.sweep("adder/distribution_sweep.csv", dist, data, unit);
    double lowest = 1.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      lowest = std::min(lowest, conditional_probability(fn, 5.0, data.inputs(i))
                                    .probability(encode_state(data.outputs(i), Basis::ZeroOne)));
    }
    return json{{"min_conditional_at_5", lowest},
                {"caveat", "function and distribution tables are identical as published"}};
  });

  p.stage("propositions", [&] {
    VerifyOptions vo;
    auto report = verify_report(vo, fs::path(o.out) / "propositions_counterexamples");
    write_json(p.file("propositions.json"), report);
    return report;
  });

  p.finish();
  return kOk;
}

}  // namespace qbm::cli
