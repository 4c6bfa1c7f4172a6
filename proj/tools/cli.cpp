#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <tuple>

#include "mucs/amp.hpp"
#include "mucs/instance.hpp"
#include "mucs/phase.hpp"
#include "mucs/state_evolution.hpp"

namespace mucs::cli {
namespace {

namespace fs = std::filesystem;

struct Model {
  double alpha = 0.5;
  double rho = 0.1;
  double delta = 1e-10;
  double eta = 1e-4;

  ReplicaParams params() const { return {alpha, rho, delta, eta}; }
};

/// Accepts integers written in scientific notation ("1e4") and rewrites them
/// as plain digits before CLI11 converts them.
CLI::Validator sci_integer() {
  return CLI::Validator(
      [](std::string& s) -> std::string {
        if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos) return {};
        std::size_t used = 0;
        double value = 0.0;
        try {
          value = std::stod(s, &used);
        } catch (const std::exception&) {
          return "expected an integer, got '" + s + "'";
        }
        if (used != s.size() || value < 0 || value != std::floor(value) || value > 9007199254740992.0) {
          return "expected a non-negative integer, got '" + s + "'";
        }
        s = std::to_string(static_cast<unsigned long long>(value));
        return {};
      },
      "INT", "sci_integer");
}

void add_model_options(CLI::App* sub, Model& m) {
  sub->add_option("--alpha", m.alpha, "Sampling rate M/N")->capture_default_str();
  sub->add_option("--rho", m.rho, "Signal density")->capture_default_str();
  sub->add_option("--delta", m.delta, "Measurement noise variance")->capture_default_str();
  sub->add_option("--eta", m.eta, "Matrix uncertainty")->capture_default_str();
}

/// Config files hold plain "key = value" lines; keys without a section belong
/// to whichever subcommand is running.
class SubcommandConfig : public CLI::ConfigTOML {
 public:
  explicit SubcommandConfig(const CLI::App* app) : app_(app) {}

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigTOML::from_config(input);
    const auto subs = app_->get_subcommands();
    if (subs.empty()) return items;
    for (auto& item : items) {
      if (item.parents.empty() && item.name != "++" && item.name != "--") item.parents = {subs.front()->get_name()};
    }
    return items;
  }

 private:
  const CLI::App* app_;
};

std::string stem_with(const std::string& out, const std::string& suffix) {
  fs::path p(out);
  fs::path stem = p.parent_path() / p.stem();
  return stem.string() + suffix;
}

void warn(const std::string& kind, const std::string& message) {
  std::cerr << "mucs: warning[" << kind << "]: " << message << "\n";
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  Model model;
  std::uint64_t n = 1000;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_generate(const GenerateArgs& a) {
  NoiseModel noise{a.model.delta, a.model.eta};
  const ProblemInstance inst =
      generate(static_cast<Index>(a.n), a.model.alpha, SignalPrior(a.model.rho), noise, a.seed);
  save_instance(inst, a.out);
  std::cout << "wrote " << a.out << " (N=" << inst.n() << ", M=" << inst.m() << ")\n";
  return kOk;
}

// ---------------------------------------------------------------- amp

struct AmpArgs {
  Model model;
  std::uint64_t n = 10000;
  std::uint64_t seed = 1;
  std::string instance;
  std::string rule = "robust";
  std::string timing = "fresh";
  int max_iters = 1000;
  double tol = 1e-12;
  double damping = 0.0;
  std::string out = "amp.csv";
  std::string estimate_out;
};

int cmd_amp(const AmpArgs& a) {
  AmpConfig cfg;
  cfg.variance_rule = parse_variance_rule(a.rule);
  if (a.timing == "fresh") {
    cfg.robust_timing = RobustTiming::Fresh;
  } else if (a.timing == "lagged") {
    cfg.robust_timing = RobustTiming::Lagged;
  } else {
    throw DomainError("unknown robust timing '" + a.timing + "' (fresh, lagged)");
  }
  cfg.max_iters = a.max_iters;
  cfg.tol = a.tol;
  cfg.damping = a.damping;
  cfg.validate();

  ProblemInstance inst;
  if (!a.instance.empty()) {
    inst = load_instance(a.instance);
  } else {
    GenerateOptions gen;
    gen.storage = MatrixStorage::SolverOnly;
    inst = generate(static_cast<Index>(a.n), a.model.alpha, SignalPrior(a.model.rho),
                    NoiseModel{a.model.delta, a.model.eta}, a.seed, gen);
  }
  const AmpReport report = amp_run(inst, SignalPrior(inst.rho), cfg, inst.s);

  csv::Header header = base_header("amp");
  header.emplace_back("instance", a.instance.empty() ? "generated" : a.instance);
  header.emplace_back("n", std::to_string(inst.n()));
  header.emplace_back("m", std::to_string(inst.m()));
  header.emplace_back("alpha", csv::number(a.instance.empty() ? a.model.alpha : inst.alpha()));
  header.emplace_back("rho", csv::number(inst.rho));
  header.emplace_back("delta", csv::number(inst.noise.delta));
  header.emplace_back("eta", csv::number(inst.noise.eta));
  header.emplace_back("seed", std::to_string(inst.seed));
  header.emplace_back("variance_rule", to_string(cfg.variance_rule));
  header.emplace_back("robust_timing", a.timing);
  header.emplace_back("max_iters", std::to_string(cfg.max_iters));
  header.emplace_back("tol", csv::number(cfg.tol));
  header.emplace_back("damping", csv::number(cfg.damping));
  csv::Header result = header;
  result.emplace_back("converged", report.converged ? "true" : "false");
  result.emplace_back("iterations", std::to_string(report.iterations));
  const double final_mse = report.mse_per_iter.empty() ? report.initial_mse : report.mse_per_iter.back();
  result.emplace_back("final_mse", csv::number(final_mse));

  const std::string estimate_path = a.estimate_out.empty() ? stem_with(a.out, ".estimate.csv") : a.estimate_out;
  csv::write_atomic(a.out, csv::amp_report(report, result));
  csv::write_atomic(estimate_path, csv::estimate(report.final_estimate, report.final_variance, result));
  std::cout << "iterations = " << report.iterations << "\nconverged = " << (report.converged ? "true" : "false")
            << "\nfinal_mse = " << csv::number(final_mse) << "\n";
  if (!report.converged) warn("not-converged", "AMP stopped after max_iters without meeting tol");
  return kOk;
}

// ---------------------------------------------------------------- potential

struct PotentialArgs {
  Model model;
  int points = 512;
  double e_min = 0.0;
  std::string out = "potential.csv";
};

int cmd_potential(const PotentialArgs& a) {
  const ReplicaParams p = a.model.params();
  GridSpec grid;
  grid.points = a.points;
  grid.e_min = a.e_min;
  const PotentialCurve curve = scan_potential(p, grid);
  csv::Header header = base_header("potential");
  append_params(header, p);
  header.emplace_back("points", std::to_string(a.points));
  header.emplace_back("e_min", csv::number(a.e_min > 0 ? a.e_min : default_e_min(p)));
  csv::write_atomic(a.out, csv::potential_curve(curve, header));
  const int g = curve.global_index();
  for (int k = 0; k < static_cast<int>(curve.maxima.size()); ++k) {
    std::cout << "maximum E = " << csv::number(curve.maxima[k].e) << " phi = " << csv::number(curve.maxima[k].phi)
              << (k == g ? " (global)" : "") << "\n";
  }
  if (curve.plateau) std::cout << "flat potential\n";
  return kOk;
}

// ---------------------------------------------------------------- de

struct DeArgs {
  Model model;
  DeConfig cfg;
  std::string out = "de.csv";
};

int cmd_de(const DeArgs& a) {
  const ReplicaParams p = a.model.params();
  const DeTrajectory traj = de_run(p, a.cfg);
  csv::Header header = base_header("de");
  append_params(header, p);
  header.emplace_back("max_iters", std::to_string(a.cfg.max_iters));
  header.emplace_back("tol", csv::number(a.cfg.tol));
  header.emplace_back("e_start", csv::number(a.cfg.e_start > 0 ? a.cfg.e_start : p.rho));
  csv::write_atomic(a.out, csv::de_trajectory(traj, header));
  std::cout << "status = " << to_string(traj.status) << "\nfixed_point = " << csv::number(traj.fixed_point)
            << "\niterations = " << traj.e_seq.size() - 1 << "\n";
  if (!traj.converged()) warn("not-converged", std::string("density evolution ended with status ") + to_string(traj.status));
  return kOk;
}

// ---------------------------------------------------------------- phase

struct PhaseArgs {
  Model model;
  std::string fix;
  std::string grid = "alpha:0.05:1:20,rho_over_alpha:0.05:1:20";
  double resolution = 1e-3;
  int points = 256;
  unsigned threads = 0;
  bool no_lines = false;
  std::string out = "phase.csv";
  std::string lines_out;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = s.find(sep, start);
    parts.push_back(s.substr(start, end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return parts;
}

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw DomainError("bad number '" + text + "' in " + what);
  return value;
}

ReplicaParams apply_fix(ReplicaParams p, const std::string& fix) {
  if (fix.empty()) return p;
  std::vector<std::pair<SweepAxis, double>> items;
  for (const auto& item : split(fix, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw DomainError("--fix entries look like key=value, got '" + item + "'");
    items.emplace_back(parse_axis(item.substr(0, eq)), parse_number(item.substr(eq + 1), "--fix"));
  }
  // alpha first, so rho_over_alpha sees the final alpha.
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& x, const auto& y) { return x.first == SweepAxis::Alpha && y.first != SweepAxis::Alpha; });
  for (const auto& [axis, value] : items) p = with_axis(p, axis, value);
  return p;
}

std::pair<SweepAxis, std::vector<double>> parse_axis_range(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 4) throw DomainError("--grid axes look like name:lo:hi:count, got '" + text + "'");
  const SweepAxis axis = parse_axis(parts[0]);
  const double lo = parse_number(parts[1], "--grid");
  const double hi = parse_number(parts[2], "--grid");
  const double count = parse_number(parts[3], "--grid");
  if (!(count >= 1) || count != std::floor(count)) throw DomainError("--grid count must be a positive integer");
  const bool log_scale = axis == SweepAxis::Delta || axis == SweepAxis::Eta;
  if (log_scale && !(lo > 0 && hi > 0)) throw DomainError("--grid delta/eta ranges are log-spaced and need lo, hi > 0");
  const int n = static_cast<int>(count);
  std::vector<double> values(n);
  for (int k = 0; k < n; ++k) {
    const double t = n == 1 ? 0.0 : double(k) / (n - 1);
    values[k] = log_scale ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))) : lo + t * (hi - lo);
  }
  return {axis, values};
}

int cmd_phase(const PhaseArgs& a) {
  const auto axes = split(a.grid, ',');
  if (axes.size() != 2) throw DomainError("--grid needs exactly two axes separated by ','");
  PhaseGrid grid;
  std::tie(grid.x_axis, grid.x) = parse_axis_range(axes[0]);
  std::tie(grid.y_axis, grid.y) = parse_axis_range(axes[1]);
  grid.fixed = apply_fix(a.model.params(), a.fix);

  SweepOptions opt;
  opt.resolution = a.resolution;
  opt.classify.grid.points = a.points;
  opt.threads = a.threads;
  opt.extract_lines = !a.no_lines;
  const PhaseDiagram diagram = sweep_phase_diagram(grid, opt);

  csv::Header header = base_header("phase");
  append_params(header, grid.fixed);
  header.emplace_back("fix", a.fix);
  header.emplace_back("grid", a.grid);
  header.emplace_back("resolution", csv::number(a.resolution));
  header.emplace_back("points", std::to_string(a.points));
  csv::write_atomic(a.out, csv::phase_points(diagram.points, header));
  if (!a.no_lines) {
    const std::string lines_path = a.lines_out.empty() ? stem_with(a.out, ".lines.csv") : a.lines_out;
    csv::write_atomic(lines_path, csv::transition_lines(diagram.lines, header));
  }
  for (const auto& f : diagram.failures) {
    warn("point", "index " + std::to_string(f.index) + " (" + describe(f.params) + "): " + f.message);
  }
  std::cout << "classified " << diagram.points.size() << " points, " << diagram.failures.size() << " failures\n";
  return diagram.failures.size() >= diagram.points.size() ? kNumericalFailure : kOk;
}

}  // namespace

csv::Header base_header(const std::string& command) {
  return {{"tool", "mucs"}, {"version", kVersion}, {"command", command}};
}

void append_params(csv::Header& header, const ReplicaParams& p) {
  header.emplace_back("alpha", csv::number(p.alpha));
  header.emplace_back("rho", csv::number(p.rho));
  header.emplace_back("delta", csv::number(p.delta));
  header.emplace_back("eta", csv::number(p.eta));
}

std::string tag(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

int report_current_exception() {
  auto fail = [](const char* kind, const std::string& msg, int code) {
    std::cerr << "mucs: error[" << kind << "]: " << msg << "\n";
    return code;
  };
  try {
    throw;
  } catch (const DivergenceError& e) {
    return fail("divergence", std::string(e.what()) + " (iteration " + std::to_string(e.iteration()) + ")",
                kNumericalFailure);
  } catch (const NumericalError& e) {
    return fail("numerical", e.what(), kNumericalFailure);
  } catch (const FormatError& e) {
    return fail("format", e.what(), kIoFailure);
  } catch (const IoError& e) {
    return fail("io", e.what(), kIoFailure);
  } catch (const std::filesystem::filesystem_error& e) {
    return fail("io", e.what(), kIoFailure);
  } catch (const DimensionError& e) {
    return fail("dimension", e.what(), kBadArguments);
  } catch (const BracketError& e) {
    return fail("bracket", e.what(), kBadArguments);
  } catch (const DomainError& e) {
    return fail("domain", e.what(), kBadArguments);
  } catch (const std::bad_alloc&) {
    return fail("memory", "out of memory", kNumericalFailure);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), kNumericalFailure);
  }
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Sparse reconstruction with an uncertain measurement matrix: AMP, replica potential, "
               "density evolution and phase diagrams",
               "mucs"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();
  app.config_formatter(std::make_shared<SubcommandConfig>(&app));
  app.set_config("--config", "", "Read option defaults from a 'key = value' file; flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);

  GenerateArgs gen;
  auto* generate_cmd = app.add_subcommand("generate", "Draw a problem instance and save it");
  add_model_options(generate_cmd, gen.model);
  generate_cmd->add_option("--n", gen.n, "Signal length N")->transform(sci_integer())->capture_default_str();
  generate_cmd->add_option("--seed", gen.seed, "Master seed")->transform(sci_integer())->capture_default_str();
  generate_cmd->add_option("--out", gen.out, "Instance file")->required();

  AmpArgs amp;
  auto* amp_cmd = app.add_subcommand("amp", "Run AMP on a generated or loaded instance");
  add_model_options(amp_cmd, amp.model);
  amp_cmd->add_option("--n", amp.n, "Signal length N")->transform(sci_integer())->capture_default_str();
  amp_cmd->add_option("--seed", amp.seed, "Master seed")->transform(sci_integer())->capture_default_str();
  amp_cmd->add_option("--instance", amp.instance, "Load this instance instead of generating one");
  amp_cmd->add_option("--rule", amp.rule, "Variance rule: robust, mu-amp, known-noise")->capture_default_str();
  amp_cmd->add_option("--timing", amp.timing, "Robust-rule residual timing: fresh, lagged")->capture_default_str();
  amp_cmd->add_option("--max-iters", amp.max_iters)->transform(sci_integer())->capture_default_str();
  amp_cmd->add_option("--tol", amp.tol, "Stop when mean squared change of a is below tol")->capture_default_str();
  amp_cmd->add_option("--damping", amp.damping)->capture_default_str();
  amp_cmd->add_option("--out", amp.out, "Trajectory CSV")->capture_default_str();
  amp_cmd->add_option("--estimate-out", amp.estimate_out, "Final estimate CSV (default <out>.estimate.csv)");

  PotentialArgs pot;
  auto* pot_cmd = app.add_subcommand("potential", "Scan the replica potential Phi(E)");
  add_model_options(pot_cmd, pot.model);
  pot_cmd->add_option("--points", pot.points, "Log-spaced grid points")->transform(sci_integer())->capture_default_str();
  pot_cmd->add_option("--e-min", pot.e_min, "Lower end of the E grid (default max(1e-12, delta/10))");
  pot_cmd->add_option("--out", pot.out)->capture_default_str();

  DeArgs de;
  auto* de_cmd = app.add_subcommand("de", "Iterate density evolution from E = rho");
  add_model_options(de_cmd, de.model);
  de_cmd->add_option("--max-iters", de.cfg.max_iters)->transform(sci_integer())->capture_default_str();
  de_cmd->add_option("--tol", de.cfg.tol)->capture_default_str();
  de_cmd->add_option("--e-start", de.cfg.e_start, "Starting MSE (default rho)");
  de_cmd->add_option("--out", de.out)->capture_default_str();

  PhaseArgs ph;
  auto* phase_cmd = app.add_subcommand("phase", "Classify a parameter grid and locate the transition lines");
  add_model_options(phase_cmd, ph.model);
  phase_cmd->add_option("--fix", ph.fix, "Fixed parameters, e.g. delta=1e-4,eta=1e-6");
  phase_cmd->add_option("--grid", ph.grid, "Two axes name:lo:hi:count, x first")->capture_default_str();
  phase_cmd->add_option("--resolution", ph.resolution, "Relative bisection resolution")->capture_default_str();
  phase_cmd->add_option("--points", ph.points, "Potential grid points per classification")
      ->transform(sci_integer())
      ->capture_default_str();
  phase_cmd->add_option("--threads", ph.threads, "Worker threads (default $MUCS_THREADS or all cores)")
      ->transform(sci_integer());
  phase_cmd->add_flag("--no-lines", ph.no_lines, "Skip transition-line extraction");
  phase_cmd->add_option("--out", ph.out)->capture_default_str();
  phase_cmd->add_option("--lines-out", ph.lines_out, "Transition CSV (default <out>.lines.csv)");

  ReproduceArgs rep;
  auto* rep_cmd = app.add_subcommand("reproduce", "Run a figure preset and write CSVs plus manifest.json");
  rep_cmd->add_option("figure", rep.figure, "fig1, fig2, fig3 or fig4")
      ->required()
      ->check(CLI::IsMember({"fig1", "fig2", "fig3", "fig4"}));
  rep_cmd->add_option("--scale", rep.scale)->check(CLI::IsMember({"desk", "full"}))->capture_default_str();
  rep_cmd->add_option("--out", rep.out_dir, "Output directory (default reproduce/<figure>)");
  rep_cmd->add_option("--threads", rep.threads, "Worker threads (default $MUCS_THREADS or all cores)")
      ->transform(sci_integer());

  try {
    app.parse(argc, argv);
  } catch (const CLI::FileError& e) {
    std::cerr << "mucs: error[io]: " << e.what() << "\n";
    return kIoFailure;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadArguments;
  }

  try {
    if (*generate_cmd) return cmd_generate(gen);
    if (*amp_cmd) return cmd_amp(amp);
    if (*pot_cmd) return cmd_potential(pot);
    if (*de_cmd) return cmd_de(de);
    if (*phase_cmd) return cmd_phase(ph);
    if (*rep_cmd) {
      if (rep.out_dir.empty()) rep.out_dir = "reproduce/" + rep.figure;
      return cmd_reproduce(rep);
    }
  } catch (...) {
    return report_current_exception();
  }
  return kBadArguments;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"mucs"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace mucs::cli
