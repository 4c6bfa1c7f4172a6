#include "mucs/state_evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mucs {

const char* to_string(DeStatus status) {
  switch (status) {
    case DeStatus::Converged: return "converged";
    case DeStatus::ReachedFloor: return "reached-floor";
    case DeStatus::MaxIters: return "max-iters";
    case DeStatus::Oscillating: return "oscillating";
    case DeStatus::Degenerate: return "degenerate";
  }
  return "?";
}

DeStepResult de_step(const ReplicaParams& p, double e) {
  if (!(e > 0.0) || e > p.rho * (1 + 1e-12)) throw DomainError("de_step: E must lie in (0, rho]");
  const double m = m_of_E(p, e);
  if (m < kDegenerateM) return {p.rho, true};
  return {mmse<double>(p.rho, m), false};
}

DeTrajectory de_run(const ReplicaParams& p, const DeConfig& cfg) {
  p.validate();
  if (cfg.max_iters < 1) throw DomainError("de_run: max_iters must be >= 1");
  DeTrajectory traj;
  traj.params = p;
  double e = cfg.e_start > 0.0 ? std::min(cfg.e_start, p.rho) : p.rho;
  traj.e_seq.push_back(e);
  double previous_step = 0.0;
  for (int t = 0; t < cfg.max_iters; ++t) {
    const DeStepResult next = de_step(p, e);
    if (next.degenerate) {
      traj.e_seq.push_back(next.e);
      traj.fixed_point = next.e;
      traj.status = DeStatus::Degenerate;
      return traj;
    }
    if (!std::isfinite(next.e)) throw NumericalError("de_run: non-finite MSE (" + describe(p) + ")");
    const double step = next.e - e;
    if (next.e < cfg.e_floor) {
      const double floored = std::max(next.e, std::numeric_limits<double>::min());
      traj.e_seq.push_back(floored);
      traj.fixed_point = floored;
      traj.status = DeStatus::ReachedFloor;
      return traj;
    }
    traj.e_seq.push_back(next.e);
    const bool done = std::fabs(step) < cfg.tol * std::max(e, 1e-12);
    const double scale = cfg.monotone_tol * std::max(e, 1e-12);
    if (!done && previous_step != 0.0 && step * previous_step < 0.0 && std::fabs(step) > scale &&
        std::fabs(previous_step) > scale) {
      traj.fixed_point = next.e;
      traj.status = DeStatus::Oscillating;
      return traj;
    }
    previous_step = step;
    e = next.e;
    if (done) {
      traj.fixed_point = e;
      traj.status = DeStatus::Converged;
      return traj;
    }
  }
  traj.fixed_point = e;
  traj.status = DeStatus::MaxIters;
  return traj;
}

double predicted_v(const ReplicaParams& p, double e) { return effective_variance<double>(p, e); }

}  // namespace mucs
