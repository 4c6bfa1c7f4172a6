#include "mucs/phase.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace mucs {
namespace {

bool is_spinodal_side(PhaseClass c) { return c != PhaseClass::Easy; }
bool is_first_order_side(PhaseClass c) {
  return c == PhaseClass::Impossible || c == PhaseClass::Degenerate;
}

bool predicate(TransitionKind kind, PhaseClass c) {
  return kind == TransitionKind::Spinodal ? is_spinodal_side(c) : is_first_order_side(c);
}

bool log_axis(SweepAxis a) { return a == SweepAxis::Delta || a == SweepAxis::Eta; }

/// Runs fn(k) for k in [0, count) on up to `threads` workers. Results must be
/// written to slot k by fn so output order never depends on scheduling.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (threads <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) fn(k);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

const char* to_string(PhaseClass c) {
  switch (c) {
    case PhaseClass::Easy: return "easy";
    case PhaseClass::Hard: return "hard";
    case PhaseClass::Impossible: return "impossible";
    case PhaseClass::Degenerate: return "degenerate";
  }
  return "?";
}

const char* to_string(TransitionKind k) {
  return k == TransitionKind::Spinodal ? "spinodal" : "first-order";
}

const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::Alpha: return "alpha";
    case SweepAxis::Rho: return "rho";
    case SweepAxis::RhoOverAlpha: return "rho_over_alpha";
    case SweepAxis::Delta: return "delta";
    case SweepAxis::Eta: return "eta";
  }
  return "?";
}

SweepAxis parse_axis(const std::string& name) {
  if (name == "alpha") return SweepAxis::Alpha;
  if (name == "rho") return SweepAxis::Rho;
  if (name == "rho_over_alpha") return SweepAxis::RhoOverAlpha;
  if (name == "delta") return SweepAxis::Delta;
  if (name == "eta") return SweepAxis::Eta;
  throw DomainError("unknown sweep axis '" + name + "' (alpha, rho, rho_over_alpha, delta, eta)");
}

ReplicaParams with_axis(ReplicaParams p, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::Alpha: p.alpha = value; break;
    case SweepAxis::Rho: p.rho = value; break;
    case SweepAxis::RhoOverAlpha: p.rho = value * p.alpha; break;
    case SweepAxis::Delta: p.delta = value; break;
    case SweepAxis::Eta: p.eta = value; break;
  }
  return p;
}

unsigned default_thread_count() {
  if (const char* env = std::getenv("MUCS_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

PhasePoint classify(const ReplicaParams& p, const ClassifyOptions& opt) {
  p.validate();
  PhasePoint pt;
  pt.params = p;
  if (p.degenerate()) {
    pt.cls = PhaseClass::Degenerate;
    pt.bayes_mse = pt.amp_mse_predicted = p.rho;
    return pt;
  }
  const PotentialCurve curve = scan_potential(p, opt.grid);
  if (curve.plateau) {
    pt.cls = PhaseClass::Degenerate;
    pt.bayes_mse = pt.amp_mse_predicted = p.rho;
    return pt;
  }
  const DeTrajectory traj = de_run(p, opt.de);
  const double e_de = traj.fixed_point;
  const double e_lo = curve.grid.front();

  auto reaches = [&](const PotentialMaximum& mx) {
    if (mx.boundary && mx.e <= e_lo) return e_de <= std::max(mx.e, opt.de.e_floor) * (1.0 + opt.reach_rel);
    return std::fabs(e_de - mx.e) <= opt.reach_rel * mx.e;
  };

  pt.maxima = curve.maxima;
  if (std::none_of(pt.maxima.begin(), pt.maxima.end(), reaches)) {
    // DE stopped at a stationary point the grid did not resolve.
    pt.maxima.push_back({e_de, static_cast<double>(potential<long double>(p, e_de)), false});
    std::sort(pt.maxima.begin(), pt.maxima.end(),
              [](const PotentialMaximum& a, const PotentialMaximum& b) { return a.e < b.e; });
  }

  int g = 0;
  for (int k = 1; k < static_cast<int>(pt.maxima.size()); ++k) {
    if (pt.maxima[k].phi > pt.maxima[g].phi) g = k;
  }
  const PotentialMaximum& global = pt.maxima[g];
  bool low_branch;
  if (pt.maxima.size() >= 2) {
    low_branch = g == 0;
  } else {
    const double scale = std::max({p.delta, p.matrix_loss() * p.rho, 1e-10});
    low_branch = global.e < opt.low_factor * scale;
  }
  if (!low_branch) {
    pt.cls = PhaseClass::Impossible;
  } else {
    pt.cls = reaches(global) ? PhaseClass::Easy : PhaseClass::Hard;
  }
  pt.bayes_mse = global.e;
  pt.amp_mse_predicted = e_de;
  return pt;
}

namespace {

double find_transition_impl(TransitionKind kind, SweepAxis axis, const ReplicaParams& fixed, double lo,
                            double hi, double resolution, const ClassifyOptions& opt, int prescan) {
  if (!(lo < hi)) throw DomainError("find_transition: bracket must satisfy lo < hi");
  if (!(resolution > 0.0)) throw DomainError("find_transition: resolution must be > 0");
  const bool use_log = log_axis(axis);
  if (use_log && !(lo > 0.0)) throw DomainError("find_transition: log-scale axis needs lo > 0");

  auto side = [&](double x) { return predicate(kind, classify(with_axis(fixed, axis, x), opt).cls); };
  auto interpolate = [&](double a, double b, double frac) {
    return use_log ? std::exp(std::log(a) + frac * (std::log(b) - std::log(a))) : a + frac * (b - a);
  };

  std::vector<double> xs{lo};
  for (int k = 1; k <= prescan; ++k) xs.push_back(interpolate(lo, hi, double(k) / (prescan + 1)));
  xs.push_back(hi);
  std::vector<bool> sides;
  sides.reserve(xs.size());
  for (double x : xs) sides.push_back(side(x));

  auto dump = [&] {
    std::ostringstream out;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      out << (k ? ", " : "") << to_string(axis) << "=" << xs[k] << ":" << (sides[k] ? "beyond" : "before");
    }
    return out.str();
  };
  if (sides.front() == sides.back()) {
    throw BracketError(std::string("find_transition(") + to_string(kind) + "): both bracket ends on the same side [" +
                       dump() + "] at " + describe(fixed));
  }
  int changes = 0;
  std::size_t change_at = 0;
  for (std::size_t k = 1; k < sides.size(); ++k) {
    if (sides[k] != sides[k - 1]) {
      ++changes;
      change_at = k;
    }
  }
  if (changes != 1) {
    throw BracketError(std::string("find_transition(") + to_string(kind) + "): classification not monotone [" +
                       dump() + "] at " + describe(fixed));
  }
  double a = xs[change_at - 1];
  double b = xs[change_at];
  const bool side_a = sides[change_at - 1];
  while (b - a > resolution * std::max(std::fabs(a), std::fabs(b))) {
    const double mid = interpolate(a, b, 0.5);
    if (side(mid) == side_a) {
      a = mid;
    } else {
      b = mid;
    }
  }
  return interpolate(a, b, 0.5);
}

}  // namespace

double find_transition(TransitionKind kind, SweepAxis axis, const ReplicaParams& fixed, double lo, double hi,
                       double resolution, const ClassifyOptions& opt) {
  return find_transition_impl(kind, axis, fixed, lo, hi, resolution, opt, 5);
}

PhaseDiagram sweep_phase_diagram(const PhaseGrid& grid, const SweepOptions& opt) {
  if (grid.x.empty() || grid.y.empty()) throw DomainError("phase sweep grid is empty");
  const std::size_t nx = grid.x.size();
  const std::size_t ny = grid.y.size();
  const unsigned threads = opt.threads ? opt.threads : default_thread_count();

  PhaseDiagram out;
  out.points.resize(nx * ny);
  std::vector<std::string> errors(nx * ny);
  parallel_for(nx * ny, threads, [&](std::size_t k) {
    const ReplicaParams p = with_axis(with_axis(grid.fixed, grid.x_axis, grid.x[k / ny]), grid.y_axis, grid.y[k % ny]);
    try {
      out.points[k] = classify(p, opt.classify);
    } catch (const std::exception& e) {
      out.points[k] = PhasePoint{};
      out.points[k].params = p;
      errors[k] = e.what();
    }
  });
  for (std::size_t k = 0; k < errors.size(); ++k) {
    if (!errors[k].empty()) out.failures.push_back({k, out.points[k].params, errors[k]});
  }
  if (!opt.extract_lines || ny < 2) return out;

  const TransitionKind kinds[] = {TransitionKind::Spinodal, TransitionKind::FirstOrder};
  std::vector<std::pair<double, double>> found[2];
  for (auto& f : found) f.assign(nx, {0.0, std::nan("")});
  std::vector<std::string> line_errors(2 * nx);
  parallel_for(2 * nx, threads, [&](std::size_t job) {
    const std::size_t kind_index = job / nx;
    const std::size_t ix = job % nx;
    const TransitionKind kind = kinds[kind_index];
    found[kind_index][ix].first = grid.x[ix];
    const ReplicaParams column = with_axis(grid.fixed, grid.x_axis, grid.x[ix]);
    for (std::size_t iy = 1; iy < ny; ++iy) {
      const std::size_t k0 = ix * ny + iy - 1;
      const std::size_t k1 = k0 + 1;
      if (!errors[k0].empty() || !errors[k1].empty()) continue;
      if (predicate(kind, out.points[k0].cls) == predicate(kind, out.points[k1].cls)) continue;
      try {
        found[kind_index][ix].second =
            find_transition_impl(kind, grid.y_axis, column, grid.y[iy - 1], grid.y[iy], opt.resolution, opt.classify, 0);
      } catch (const std::exception& e) {
        line_errors[job] = e.what();
      }
      break;
    }
  });
  for (std::size_t kind_index = 0; kind_index < 2; ++kind_index) {
    TransitionLine line;
    line.kind = kinds[kind_index];
    line.column_axis = grid.x_axis;
    line.swept_axis = grid.y_axis;
    for (const auto& pt : found[kind_index]) {
      if (!std::isnan(pt.second)) line.points.push_back(pt);
    }
    out.lines.push_back(std::move(line));
  }
  for (std::size_t job = 0; job < line_errors.size(); ++job) {
    if (!line_errors[job].empty()) {
      const std::size_t ix = job % nx;
      out.failures.push_back({ix * ny, with_axis(grid.fixed, grid.x_axis, grid.x[ix]), line_errors[job]});
    }
  }
  return out;
}

}  // namespace mucs
