#ifndef MUCS_AMP_HPP
#define MUCS_AMP_HPP

// Approximate message passing for sparse reconstruction with an uncertain
// measurement matrix.
//
// One iteration, for measurement mu and signal component i:
//   omega_mu <- sum_i F a_i - (y_mu - omega_mu) / V_mu * sum_i F^2 v_i
//   V        <- variance rule (see VarianceRule)
//   Sigma2_i <- [sum_mu F^2 / V_mu]^-1
//   R_i      <- a_i + Sigma2_i * sum_mu F (y_mu - omega_mu) / V_mu
//   (a_i, v_i) <- denoise(Sigma2_i, R_i)
// With the scalar robust rule these reduce to Sigma2_i = V / sum_mu F^2 and
// R_i = a_i + sum_mu F (y - omega) / sum_mu F^2. F is always the posterior-mean
// matrix of the instance, never the true one.

#include <optional>
#include <vector>

#include "mucs/instance.hpp"
#include "mucs/prior.hpp"
#include "mucs/types.hpp"

namespace mucs {

enum class VarianceRule {
  Robust,      ///< V = mean_mu (y_mu - omega_mu)^2, needs neither delta nor eta
  MuAmp,       ///< V_mu = delta + sum_i F^2 v_i + sum_i (v_i + a_i^2) eta / (N (1 + eta))
  KnownNoise,  ///< V_mu = delta + sum_i F^2 v_i
};

/// When the robust rule reads the residual.
enum class RobustTiming {
  Fresh,   ///< from the omega just updated in the same iteration
  Lagged,  ///< from the previous iteration's omega; the first V is rho
};

struct AmpConfig {
  VarianceRule variance_rule = VarianceRule::Robust;
  RobustTiming robust_timing = RobustTiming::Fresh;
  int max_iters = 1000;
  /// Stop when mean_i (a_i^new - a_i^old)^2 < tol.
  double tol = 1e-12;
  /// Fraction of the previous (a, v) kept at each update.
  double damping = 0.0;
  double v_floor = 1e-14;

  void validate() const;
};

struct AmpState {
  Vector a;
  Vector v;
  Vector omega;
  /// Size 1 for the robust rule, size M otherwise; empty before the first step.
  Vector big_v;
  int t = 0;

  double v_mean() const { return big_v.size() ? big_v.mean() : 0.0; }
};

struct AmpReport {
  /// MSE after each iteration; empty without ground truth.
  std::vector<double> mse_per_iter;
  /// Mean of V computed in each iteration. Entry k is estimated from the
  /// residual of the estimate whose MSE is mse_per_iter[k-1] (initial_mse for
  /// k = 0) under the fresh robust timing and the per-measurement rules.
  std::vector<double> v_mean_per_iter;
  /// mean_i (a_i^t - a_i^{t-1})^2
  std::vector<double> delta_a_per_iter;
  double initial_mse = 0.0;
  bool converged = false;
  int iterations = 0;
  Vector final_estimate;
  Vector final_variance;
};

/// a = 0, v = rho, omega = y.
AmpState amp_initial_state(const ProblemInstance& inst, const SignalPrior& prior);

AmpState amp_step(const AmpState& state, const ProblemInstance& inst, const SignalPrior& prior,
                  const AmpConfig& cfg);

AmpReport amp_run(const ProblemInstance& inst, const SignalPrior& prior, const AmpConfig& cfg,
                  std::optional<Eigen::Ref<const Vector>> truth = std::nullopt);

/// sum_i (estimate_i - truth_i)^2 / N.
double compute_mse(const Eigen::Ref<const Vector>& estimate, const Eigen::Ref<const Vector>& truth);

const char* to_string(VarianceRule rule);
VarianceRule parse_variance_rule(const std::string& name);

}  // namespace mucs

#endif
