#ifndef MUCS_STATE_EVOLUTION_HPP
#define MUCS_STATE_EVOLUTION_HPP

// Density evolution: the scalar recursion E^{t+1} = mmse(m(E^t)) that tracks
// the per-iteration MSE of AMP in the large-N limit, started at E^0 = rho.

#include <cmath>
#include <vector>

#include "mucs/prior.hpp"
#include "mucs/quadrature.hpp"
#include "mucs/replica.hpp"

namespace mucs {

/// Below this m the effective noise 1/m is infinite for practical purposes and
/// the posterior equals the prior.
inline constexpr double kDegenerateM = 1e-14;

/// Minimum MSE of the Gauss-Bernoulli prior observed through a Gaussian channel
/// of variance 1/m:
///   (1 - rho) E_z f_c(1/m, z/sqrt(m)) + rho E_z f_c(1/m, z sqrt(1 + 1/m)),
/// i.e. the x-integral split into its point-mass and Gaussian parts. For the
/// Gaussian part x + z/sqrt(m) is itself N(0, 1 + 1/m), leaving one Gaussian
/// variable per branch.
template <typename Scalar>
Scalar mmse(Scalar rho, Scalar m, Scalar rel_tol = Scalar(1e-13)) {
  using std::log;
  using std::log1p;
  using std::sqrt;
  if (m < Scalar(kDegenerateM)) return rho;
  const Scalar sigma2 = 1 / m;
  quad::Options<Scalar> opt;
  opt.rel_tol = rel_tol;
  opt.abs_tol = Scalar(1e-300);
  opt.max_panels = 8192;

  // Log-odds of the slab are -c + (quadratic in z); c > 0 means the point mass
  // wins near z = 0 and the responsibility switches at a known |z|.
  const Scalar c = (rho > 0 && rho < 1) ? log1p(-rho) - log(rho) + log1p(m) / 2 : Scalar(-1);

  Scalar zero_part = 0;
  if (rho < 1) {
    const Scalar scale = 1 / sqrt(m);
    std::vector<Scalar> breaks;
    if (c > 0) {
      const Scalar u0 = sqrt(2 * c * (m + 1) / m);
      quad::add_switch_breaks(breaks, u0, (m + 1) / (m * u0));
    }
    zero_part = quad::even_gaussian_expectation<Scalar>(
                    [&](Scalar z) { return denoise<Scalar>(rho, sigma2, z * scale).c; }, breaks, opt)
                    .value;
  }
  Scalar signal_part = 0;
  if (rho > 0) {
    const Scalar scale = sqrt(1 + sigma2);
    std::vector<Scalar> breaks;
    if (c > 0) {
      const Scalar u0 = sqrt(2 * c / m);
      quad::add_switch_breaks(breaks, u0, 1 / (m * u0));
    } else {
      for (const int k : {1, 4, 16}) breaks.push_back(Scalar(k) / sqrt(m));
    }
    signal_part = quad::even_gaussian_expectation<Scalar>(
                      [&](Scalar z) { return denoise<Scalar>(rho, sigma2, z * scale).c; }, breaks, opt)
                      .value;
  }
  return (1 - rho) * zero_part + rho * signal_part;
}

struct DeStepResult {
  double e = 0.0;
  /// m(E) fell below kDegenerateM (D = 1): no information reaches the signal.
  bool degenerate = false;
};

/// One density-evolution update E -> mmse(m(E)).
DeStepResult de_step(const ReplicaParams& p, double e);

struct DeConfig {
  int max_iters = 500;
  /// Stop when |E^{t+1} - E^t| < tol * max(E^t, 1e-12).
  double tol = 1e-10;
  /// Treat the trajectory as having reached perfect reconstruction below this MSE.
  double e_floor = 1e-14;
  /// Starting MSE; 0 means rho.
  double e_start = 0.0;
  /// Relative size of a reversal in direction that counts as oscillation.
  double monotone_tol = 1e-10;
};

enum class DeStatus { Converged, ReachedFloor, MaxIters, Oscillating, Degenerate };

const char* to_string(DeStatus status);

struct DeTrajectory {
  std::vector<double> e_seq;
  double fixed_point = 0.0;
  DeStatus status = DeStatus::MaxIters;
  ReplicaParams params;

  bool converged() const {
    return status == DeStatus::Converged || status == DeStatus::ReachedFloor ||
           status == DeStatus::Degenerate;
  }
};

DeTrajectory de_run(const ReplicaParams& p, const DeConfig& cfg = {});

/// Large-N value of the AMP variance estimate when the current MSE is e:
/// Delta + e + (rho - e) D.
double predicted_v(const ReplicaParams& p, double e);

}  // namespace mucs

#endif
