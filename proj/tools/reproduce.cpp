#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>

#include "cli.hpp"
#include "mucs/amp.hpp"
#include "mucs/instance.hpp"
#include "mucs/phase.hpp"
#include "mucs/state_evolution.hpp"

namespace mucs::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

json params_json(const ReplicaParams& p) {
  return {{"alpha", p.alpha}, {"rho", p.rho}, {"delta", p.delta}, {"eta", p.eta}};
}

std::vector<double> log_space(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) {
    out[k] = n == 1 ? lo : std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * k / (n - 1));
  }
  return out;
}

std::vector<double> lin_space(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) out[k] = n == 1 ? lo : lo + (hi - lo) * k / (n - 1);
  return out;
}

class Manifest {
 public:
  Manifest(std::string figure, std::string scale, fs::path dir)
      : figure_(std::move(figure)), scale_(std::move(scale)), dir_(std::move(dir)) {}

  /// Runs one preset entry; body returns the file names it wrote.
  void run(const std::string& name, json params, const std::function<std::vector<std::string>()>& body) {
    const auto start = std::chrono::steady_clock::now();
    json entry{{"name", name}, {"params", std::move(params)}};
    try {
      entry["files"] = body();
      entry["status"] = "ok";
    } catch (const std::exception& e) {
      entry["status"] = "failed";
      entry["error"] = e.what();
      ++failures_;
      std::cerr << "mucs: error[run]: " << name << ": " << e.what() << "\n";
    }
    entry["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << name << ": " << entry["status"].get<std::string>() << " (" << entry["seconds"].get<double>()
              << " s)\n";
    runs_.push_back(std::move(entry));
  }

  int finish(double total_seconds) const {
    const json doc{{"tool", "mucs"},         {"version", kVersion},
                   {"figure", figure_},       {"scale", scale_},
                   {"total_seconds", total_seconds}, {"failures", failures_},
                   {"runs", runs_}};
    csv::write_atomic(dir_ / "manifest.json", doc.dump(2) + "\n");
    return failures_ ? kNumericalFailure : kOk;
  }

  const fs::path& dir() const { return dir_; }

 private:
  std::string figure_;
  std::string scale_;
  fs::path dir_;
  json runs_ = json::array();
  int failures_ = 0;
};

csv::Header preset_header(const std::string& figure, const std::string& scale, const std::string& run) {
  csv::Header h = base_header("reproduce");
  h.emplace_back("figure", figure);
  h.emplace_back("scale", scale);
  h.emplace_back("run", run);
  return h;
}

struct AmpPoint {
  ReplicaParams params;
  Index n = 10000;
  std::uint64_t seed = 1;
  int max_iters = 300;
};

AmpReport run_amp(const AmpPoint& pt) {
  GenerateOptions gen;
  gen.storage = MatrixStorage::SolverOnly;
  const ProblemInstance inst = generate(pt.n, pt.params.alpha, SignalPrior(pt.params.rho),
                                        NoiseModel{pt.params.delta, pt.params.eta}, pt.seed, gen);
  AmpConfig cfg;
  cfg.max_iters = pt.max_iters;
  return amp_run(inst, SignalPrior(pt.params.rho), cfg, inst.s);
}

void fig1(Manifest& man, bool full, const std::string& scale) {
  GridSpec grid;
  grid.points = full ? 2048 : 512;
  for (double rho : {0.1, 0.2, 0.25, 0.3, 0.33, 0.4}) {
    const ReplicaParams p{0.5, rho, 1e-10, 1e-4};
    const std::string name = "rho" + tag(rho);
    man.run(name, params_json(p), [&] {
      csv::Header h = preset_header("fig1", scale, name);
      append_params(h, p);
      h.emplace_back("points", std::to_string(grid.points));
      const std::string pot = "potential_" + name + ".csv";
      const std::string de = "de_" + name + ".csv";
      csv::write_atomic(man.dir() / pot, csv::potential_curve(scan_potential(p, grid), h));
      csv::write_atomic(man.dir() / de, csv::de_trajectory(de_run(p, DeConfig{.max_iters = 20000}), h));
      return std::vector<std::string>{pot, de};
    });
  }
}

void fig2(Manifest& man, bool full, const std::string& scale, unsigned threads) {
  const std::vector<double> rhos{0.1, 0.2, 0.25, 0.3};
  const std::vector<double> etas = log_space(1e-8, 1.0, full ? 65 : 17);
  SweepOptions curve_opt;
  curve_opt.extract_lines = false;
  curve_opt.threads = threads;
  PhaseGrid curves{SweepAxis::Rho, rhos, SweepAxis::Eta, etas, ReplicaParams{0.5, 0.1, 1e-10, 1e-4}};
  man.run("curves", {{"alpha", 0.5}, {"delta", 1e-10}, {"rho", rhos}, {"eta", etas}}, [&] {
    const PhaseDiagram d = sweep_phase_diagram(curves, curve_opt);
    if (!d.failures.empty()) throw NumericalError(d.failures.front().message);
    csv::Header h = preset_header("fig2", scale, "curves");
    csv::write_atomic(man.dir() / "curves.csv", csv::phase_points(d.points, h));
    return std::vector<std::string>{"curves.csv"};
  });

  const Index n = full ? 20000 : 10000;
  for (double rho : {0.1, 0.2}) {
    for (double eta : {1e-4, 1e-2}) {
      const ReplicaParams p{0.5, rho, 1e-10, eta};
      const std::string name = "amp_rho" + tag(rho) + "_eta" + tag(eta);
      json params = params_json(p);
      params["n"] = n;
      params["seed"] = 1;
      man.run(name, params, [&] {
        const AmpReport report = run_amp({p, n, 1});
        csv::Header h = preset_header("fig2", scale, name);
        append_params(h, p);
        h.emplace_back("n", std::to_string(n));
        h.emplace_back("seed", "1");
        h.emplace_back("bayes_mse", csv::number(bayes_mse(p)));
        const std::string file = name + ".csv";
        csv::write_atomic(man.dir() / file, csv::amp_report(report, h));
        return std::vector<std::string>{file};
      });
    }
  }

  PhaseGrid inset{SweepAxis::Eta, log_space(1e-8, 1e-2, full ? 13 : 4), SweepAxis::Rho,
                  lin_space(0.02, 0.5, full ? 49 : 25), ReplicaParams{0.5, 0.1, 1e-10, 1e-4}};
  SweepOptions inset_opt;
  inset_opt.threads = threads;
  man.run("inset", {{"alpha", 0.5}, {"delta", 1e-10}, {"eta", inset.x}, {"rho", inset.y}}, [&] {
    const PhaseDiagram d = sweep_phase_diagram(inset, inset_opt);
    for (const auto& f : d.failures) std::cerr << "mucs: warning[point]: " << f.message << "\n";
    csv::Header h = preset_header("fig2", scale, "inset");
    csv::write_atomic(man.dir() / "inset_points.csv", csv::phase_points(d.points, h));
    csv::write_atomic(man.dir() / "inset_lines.csv", csv::transition_lines(d.lines, h));
    return std::vector<std::string>{"inset_points.csv", "inset_lines.csv"};
  });
}

void fig3(Manifest& man, bool full, const std::string& scale, unsigned threads) {
  const int count = full ? 40 : 20;
  const std::vector<double> alphas = lin_space(0.05, 1.0, count);
  const std::vector<double> ratios = lin_space(0.05, 1.0, count);
  SweepOptions opt;
  opt.threads = threads;
  const std::pair<std::string, ReplicaParams> cases[] = {
      {"noisy", ReplicaParams{0.5, 0.1, 1e-4, 1e-6}},
      {"noiseless", ReplicaParams{0.5, 0.1, 0.0, 0.0}},
  };
  for (const auto& [name, fixed] : cases) {
    PhaseGrid grid{SweepAxis::Alpha, alphas, SweepAxis::RhoOverAlpha, ratios, fixed};
    man.run(name, {{"delta", fixed.delta}, {"eta", fixed.eta}, {"alpha", alphas}, {"rho_over_alpha", ratios}}, [&] {
      const PhaseDiagram d = sweep_phase_diagram(grid, opt);
      for (const auto& f : d.failures) std::cerr << "mucs: warning[point]: " << f.message << "\n";
      csv::Header h = preset_header("fig3", scale, name);
      h.emplace_back("delta", csv::number(fixed.delta));
      h.emplace_back("eta", csv::number(fixed.eta));
      const std::string points = name + "_points.csv";
      const std::string lines = name + "_lines.csv";
      csv::write_atomic(man.dir() / points, csv::phase_points(d.points, h));
      csv::write_atomic(man.dir() / lines, csv::transition_lines(d.lines, h));
      return std::vector<std::string>{points, lines};
    });
  }
}

void fig4(Manifest& man, bool full, const std::string& scale) {
  const Index n = full ? 25000 : 10000;
  const std::vector<double> etas = full ? std::vector<double>{1e-6, 1e-4, 1e-2} : std::vector<double>{1e-4, 1e-2};
  for (double eta : etas) {
    const ReplicaParams p{0.5, 0.1, 1e-10, eta};
    const std::string name = "eta" + tag(eta);
    json params = params_json(p);
    params["n"] = n;
    params["seed"] = 1;
    man.run(name, params, [&] {
      csv::Header h = preset_header("fig4", scale, name);
      append_params(h, p);
      h.emplace_back("n", std::to_string(n));
      h.emplace_back("seed", "1");
      const std::string amp = "amp_" + name + ".csv";
      const std::string de = "de_" + name + ".csv";
      csv::write_atomic(man.dir() / amp, csv::amp_report(run_amp({p, n, 1}), h));
      csv::write_atomic(man.dir() / de, csv::de_trajectory(de_run(p), h));
      return std::vector<std::string>{amp, de};
    });
  }
}

}  // namespace

int cmd_reproduce(const ReproduceArgs& args) {
  const bool full = args.scale == "full";
  const auto start = std::chrono::steady_clock::now();
  Manifest man(args.figure, args.scale, args.out_dir);
  if (args.figure == "fig1") {
    fig1(man, full, args.scale);
  } else if (args.figure == "fig2") {
    fig2(man, full, args.scale, args.threads);
  } else if (args.figure == "fig3") {
    fig3(man, full, args.scale, args.threads);
  } else if (args.figure == "fig4") {
    fig4(man, full, args.scale);
  } else {
    throw DomainError("unknown figure '" + args.figure + "'");
  }
  return man.finish(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
}

}  // namespace mucs::cli
