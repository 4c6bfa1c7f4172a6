#include "mucs/amp.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace mucs {
namespace {

bool all_finite(const Vector& x) { return x.allFinite(); }

[[noreturn]] void diverged(const char* what, int iteration, double last_mse) {
  std::ostringstream msg;
  msg << "AMP diverged at iteration " << iteration << ": non-finite " << what;
  throw DivergenceError(msg.str(), iteration, last_mse);
}

}  // namespace

void AmpConfig::validate() const {
  if (!(tol > 0.0)) throw DomainError("AMP tolerance must be > 0");
  if (max_iters < 1) throw DomainError("AMP max_iters must be >= 1");
  if (!(damping >= 0.0 && damping < 1.0)) throw DomainError("AMP damping must lie in [0, 1)");
  if (!(v_floor > 0.0)) throw DomainError("AMP variance floor must be > 0");
}

const char* to_string(VarianceRule rule) {
  switch (rule) {
    case VarianceRule::Robust: return "robust";
    case VarianceRule::MuAmp: return "mu-amp";
    case VarianceRule::KnownNoise: return "known-noise";
  }
  return "?";
}

VarianceRule parse_variance_rule(const std::string& name) {
  if (name == "robust") return VarianceRule::Robust;
  if (name == "mu-amp" || name == "muamp") return VarianceRule::MuAmp;
  if (name == "known-noise" || name == "known") return VarianceRule::KnownNoise;
  throw DomainError("unknown variance rule '" + name + "' (robust, mu-amp, known-noise)");
}

AmpState amp_initial_state(const ProblemInstance& inst, const SignalPrior& prior) {
  AmpState st;
  st.a = Vector::Zero(inst.n());
  st.v = Vector::Constant(inst.n(), prior.rho());
  st.omega = inst.y;
  st.t = 0;
  return st;
}

AmpState amp_step(const AmpState& state, const ProblemInstance& inst, const SignalPrior& prior,
                  const AmpConfig& cfg) {
  const RowMatrix& f = inst.f;
  const Index m = inst.m();
  const Index n = inst.n();
  if (state.a.size() != n || state.v.size() != n || state.omega.size() != m) {
    throw DimensionError("AMP state does not match the instance dimensions");
  }
  const bool robust = cfg.variance_rule == VarianceRule::Robust;
  const bool first = state.t == 0;
  if (!first && !(state.big_v.size() == (robust ? 1 : m) && (state.big_v.array() > 0).all())) {
    throw DomainError("AMP state has no positive V after the first iteration");
  }

  // One pass over the rows for F a and F^2 v.
  Vector fa(m);
  Vector f2v(m);
  for (Index mu = 0; mu < m; ++mu) {
    const auto row = f.row(mu);
    fa[mu] = row.dot(state.a);
    f2v[mu] = row.cwiseAbs2().dot(state.v);
  }

  const Vector old_residual = inst.y - state.omega;
  AmpState next;
  next.t = state.t + 1;

  auto onsager_update = [&]() {
    if (first) {
      // omega^0 = y, so the correction term vanishes.
      next.omega = fa;
    } else if (robust) {
      next.omega = fa - (old_residual.array() / state.big_v[0] * f2v.array()).matrix();
    } else {
      next.omega = fa - (old_residual.array() / state.big_v.array() * f2v.array()).matrix();
    }
  };

  switch (cfg.variance_rule) {
    case VarianceRule::Robust: {
      double v_new;
      if (cfg.robust_timing == RobustTiming::Fresh) {
        onsager_update();
        v_new = (inst.y - next.omega).squaredNorm() / static_cast<double>(m);
      } else {
        v_new = first ? prior.rho() : old_residual.squaredNorm() / static_cast<double>(m);
        onsager_update();
      }
      next.big_v = Vector::Constant(1, std::max(v_new, cfg.v_floor));
      break;
    }
    case VarianceRule::MuAmp: {
      const double correction =
          (state.v.sum() + state.a.squaredNorm()) * inst.entry_posterior_variance();
      next.big_v = ((f2v.array() + inst.noise.delta + correction).max(cfg.v_floor)).matrix();
      onsager_update();
      break;
    }
    case VarianceRule::KnownNoise: {
      next.big_v = ((f2v.array() + inst.noise.delta).max(cfg.v_floor)).matrix();
      onsager_update();
      break;
    }
  }
  if (!all_finite(next.omega)) diverged("omega", next.t, std::numeric_limits<double>::quiet_NaN());
  if (!all_finite(next.big_v)) diverged("V", next.t, std::numeric_limits<double>::quiet_NaN());

  const Vector residual = inst.y - next.omega;
  Vector sigma2(n);
  Vector r(n);
  if (robust) {
    const Vector back = f.transpose() * residual;
    sigma2 = next.big_v[0] / inst.col_sq.array();
    r = state.a.array() + back.array() / inst.col_sq.array();
  } else {
    const Vector inv_v = next.big_v.cwiseInverse();
    const Vector weighted = residual.cwiseProduct(inv_v);
    Vector back = Vector::Zero(n);
    Vector precision = Vector::Zero(n);
    for (Index mu = 0; mu < m; ++mu) {
      const auto row = f.row(mu);
      back.noalias() += weighted[mu] * row.transpose();
      precision.noalias() += inv_v[mu] * row.cwiseAbs2().transpose();
    }
    sigma2 = precision.cwiseInverse();
    r = state.a.array() + sigma2.array() * back.array();
  }
  if (!all_finite(sigma2) || !all_finite(r)) diverged("Sigma2 or R", next.t, std::numeric_limits<double>::quiet_NaN());

  next.a.resize(n);
  next.v.resize(n);
  for (Index i = 0; i < n; ++i) {
    const auto post = denoise(prior, sigma2[i], r[i]);
    next.a[i] = post.a;
    next.v[i] = post.c;
  }
  if (cfg.damping > 0.0) {
    next.a = (1.0 - cfg.damping) * next.a + cfg.damping * state.a;
    next.v = (1.0 - cfg.damping) * next.v + cfg.damping * state.v;
  }
  return next;
}

AmpReport amp_run(const ProblemInstance& inst, const SignalPrior& prior, const AmpConfig& cfg,
                  std::optional<Eigen::Ref<const Vector>> truth) {
  cfg.validate();
  if (truth && truth->size() != inst.n()) throw DimensionError("ground truth length differs from N");

  AmpReport report;
  AmpState state = amp_initial_state(inst, prior);
  double last_mse = std::numeric_limits<double>::quiet_NaN();
  if (truth) {
    report.initial_mse = compute_mse(state.a, *truth);
    last_mse = report.initial_mse;
  }
  for (int it = 0; it < cfg.max_iters; ++it) {
    AmpState next;
    try {
      next = amp_step(state, inst, prior, cfg);
    } catch (const DivergenceError& e) {
      throw DivergenceError(e.what(), e.iteration(), last_mse);
    }
    const double change = (next.a - state.a).squaredNorm() / static_cast<double>(inst.n());
    report.v_mean_per_iter.push_back(next.v_mean());
    report.delta_a_per_iter.push_back(change);
    if (truth) {
      last_mse = compute_mse(next.a, *truth);
      report.mse_per_iter.push_back(last_mse);
    }
    state = std::move(next);
    report.iterations = state.t;
    if (!std::isfinite(change)) diverged("estimate", state.t, last_mse);
    if (change < cfg.tol) {
      report.converged = true;
      break;
    }
  }
  report.final_estimate = state.a;
  report.final_variance = state.v;
  return report;
}

double compute_mse(const Eigen::Ref<const Vector>& estimate, const Eigen::Ref<const Vector>& truth) {
  if (estimate.size() != truth.size()) {
    throw DimensionError("compute_mse: length mismatch (" + std::to_string(estimate.size()) + " vs " +
                         std::to_string(truth.size()) + ")");
  }
  if (estimate.size() == 0) throw DimensionError("compute_mse: empty vectors");
  return (estimate - truth).squaredNorm() / static_cast<double>(estimate.size());
}

}  // namespace mucs
