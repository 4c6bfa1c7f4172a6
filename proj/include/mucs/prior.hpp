#ifndef MUCS_PRIOR_HPP
#define MUCS_PRIOR_HPP

// Gauss-Bernoulli signal prior rho*N(0,1) + (1-rho)*delta(x) and its Bayes
// denoiser under a Gaussian likelihood N(r; x, sigma2).

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "mucs/error.hpp"
#include "mucs/types.hpp"

namespace mucs {

class SignalPrior {
 public:
  explicit SignalPrior(double rho) : rho_(rho) {
    if (!(rho >= 0.0 && rho <= 1.0)) {
      throw DomainError("signal density rho must lie in [0, 1], got " + std::to_string(rho));
    }
  }

  double rho() const noexcept { return rho_; }
  double mean() const noexcept { return 0.0; }
  /// Second moment of the prior; the nonzero component has unit variance.
  double variance() const noexcept { return rho_; }

 private:
  double rho_;
};

/// Mean `a` and variance `c` of the posterior measure.
template <typename Scalar = double>
struct DenoiserResult {
  Scalar a;
  Scalar c;
};

/// Log-odds of the Gaussian component against the point mass at zero, given
/// an observation r with noise variance sigma2.
template <typename Scalar>
Scalar slab_log_odds(Scalar rho, Scalar sigma2, Scalar r) {
  using std::log;
  using std::log1p;
  const Scalar logit = log(rho) - log1p(-rho);
  return logit - log1p(1 / sigma2) / 2 + r * r / (2 * sigma2 * (1 + sigma2));
}

/// Closed-form posterior mean and variance of x under
///   M(x) ~ [rho N(x; 0, 1) + (1 - rho) delta(x)] N(x; r, sigma2).
/// The posterior is a mixture of delta(x) and N(r/(1+sigma2), sigma2/(1+sigma2));
/// the slab responsibility is a logistic of the log-odds, saturated to 0/1
/// beyond |log-odds| > 700.
template <typename Scalar>
DenoiserResult<Scalar> denoise(Scalar rho, Scalar sigma2, Scalar r) {
  using std::exp;
  using std::isfinite;
  if (!(sigma2 > 0) || !isfinite(sigma2) || !isfinite(r)) {
    throw DomainError("denoise: requires finite sigma2 > 0 and finite r");
  }
  const Scalar mean = r / (1 + sigma2);
  const Scalar var = sigma2 / (1 + sigma2);
  if (rho <= 0) return {Scalar(0), Scalar(0)};
  if (rho >= 1) return {mean, var};

  const Scalar log_odds = slab_log_odds(rho, sigma2, r);
  Scalar pi;
  Scalar one_minus_pi;
  if (log_odds > 700) {
    pi = 1;
    one_minus_pi = 0;
  } else if (log_odds < -700) {
    pi = 0;
    one_minus_pi = 1;
  } else {
    pi = 1 / (1 + exp(-log_odds));
    one_minus_pi = 1 / (1 + exp(log_odds));
  }
  const Scalar a = pi * mean;
  const Scalar c = pi * var + pi * one_minus_pi * mean * mean;
  return {a, c};
}

inline DenoiserResult<double> denoise(const SignalPrior& prior, double sigma2, double r) {
  return denoise<double>(prior.rho(), sigma2, r);
}

/// n iid draws: 0 with probability 1-rho, otherwise N(0, 1). Uses the Signal
/// substream of `seed`.
Vector sample_signal(const SignalPrior& prior, Index n, std::uint64_t seed);

}  // namespace mucs

#endif
