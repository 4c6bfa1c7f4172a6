#ifndef MUCS_REPLICA_HPP
#define MUCS_REPLICA_HPP

// Replica free-entropy potential Phi(E) for Gauss-Bernoulli signals measured
// through an uncertain matrix. Its global maximiser is the Bayes-optimal MSE;
// the local maximum with the largest E is where message passing stalls.
//
//   Phi(E) = -alpha/2 [ log V + (Delta + rho) / V ]
//            + (1 - rho) E_z log[1 - rho + rho/sqrt(m+1) exp(z^2 m / (2 (m+1)))]
//            +      rho  E_z log[1 - rho + rho/sqrt(m+1) exp(z^2 m / 2)]
//   V = Delta + E + (rho - E) D,   m = alpha (1 - D) / V,   D = eta / (1 + eta)
//
// The last expectation contains the exact quadratic part rho * m/2, which
// cancels the O(m) growth of the first line. Evaluation subtracts it
// analytically, so the remaining terms stay O(log m) for m up to 1e12 and more.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mucs/error.hpp"
#include "mucs/quadrature.hpp"

namespace mucs {

struct ReplicaParams {
  double alpha = 0.5;
  double rho = 0.1;
  double delta = 0.0;
  double eta = 0.0;

  /// eta / (1 + eta); exactly 1 for eta = +inf.
  double matrix_loss() const noexcept { return std::isinf(eta) ? 1.0 : eta / (1.0 + eta); }
  bool degenerate() const noexcept { return matrix_loss() >= 1.0; }
  void validate() const;
};

std::string describe(const ReplicaParams& p);

/// Delta + E + (rho - E) D.
template <typename Scalar>
Scalar effective_variance(const ReplicaParams& p, Scalar e) {
  const Scalar d = Scalar(p.matrix_loss());
  return Scalar(p.delta) + e + (Scalar(p.rho) - e) * d;
}

/// alpha (1 - D) / (Delta + E + (rho - E) D).
template <typename Scalar>
Scalar m_of_E(const ReplicaParams& p, Scalar e) {
  const Scalar denom = effective_variance(p, e);
  if (!(denom > 0)) {
    throw DomainError("m_of_E: Delta + E + (rho - E) D must be positive");
  }
  return Scalar(p.alpha) * (1 - Scalar(p.matrix_loss())) / denom;
}

inline double m_of_E(const ReplicaParams& p, double e) { return m_of_E<double>(p, e); }

namespace detail {

template <typename Scalar>
Scalar softplus(Scalar x) {
  using std::exp;
  using std::log1p;
  return x > 0 ? x + log1p(exp(-x)) : log1p(exp(x));
}

template <typename Scalar>
Scalar log_add_exp(Scalar a, Scalar b) {
  return a > b ? a + softplus(b - a) : b + softplus(a - b);
}

template <typename Scalar>
quad::Options<Scalar> potential_quadrature() {
  quad::Options<Scalar> opt;
  opt.rel_tol = Scalar(100) * std::numeric_limits<Scalar>::epsilon();
  opt.abs_tol = Scalar(10) * std::numeric_limits<Scalar>::epsilon();
  opt.max_panels = 8192;
  return opt;
}

}  // namespace detail

/// The two entropy integrals of Phi for a given m, with the rho*m/2 part of
/// the signal branch removed:
///   zero   = E_z log[1 - rho + rho/sqrt(m+1) exp(z^2 m / (2 (m+1)))]
///   signal = E_z log[1 - rho + rho/sqrt(m+1) exp(z^2 m / 2)] - m/2
template <typename Scalar>
struct EntropyTerms {
  Scalar zero = 0;
  Scalar signal = 0;
};

template <typename Scalar>
EntropyTerms<Scalar> entropy_terms(Scalar rho, Scalar m) {
  using std::log;
  using std::log1p;
  using std::sqrt;
  EntropyTerms<Scalar> out;
  if (m == 0) return out;
  const Scalar b = log(rho) - log1p(m) / 2;
  if (rho >= 1) {
    out.signal = b;
    return out;
  }
  const Scalar a = log1p(-rho);
  const Scalar c = a - b;
  const Scalar s = m / (m + 1);
  const auto opt = detail::potential_quadrature<Scalar>();

  std::vector<Scalar> zero_breaks;
  if (c > 0) {
    const Scalar u0 = sqrt(2 * c / s);
    quad::add_switch_breaks(zero_breaks, u0, 1 / (s * u0));
  }
  out.zero = quad::even_gaussian_expectation<Scalar>(
                 [&](Scalar z) { return detail::log_add_exp(a, b + s * z * z / 2); }, zero_breaks, opt)
                 .value;

  std::vector<Scalar> signal_breaks;
  if (c > 0) {
    const Scalar u0 = sqrt(2 * c / m);
    quad::add_switch_breaks(signal_breaks, u0, 1 / (m * u0));
  } else {
    const Scalar scale = 1 / sqrt(m);
    for (const int k : {1, 4, 16}) signal_breaks.push_back(Scalar(k) * scale);
  }
  const Scalar remainder =
      quad::even_gaussian_expectation<Scalar>(
          [&](Scalar z) { return detail::softplus(c - m * z * z / 2); }, signal_breaks, opt)
          .value;
  out.signal = b + remainder;
  return out;
}

/// Phi(E) for 0 < E <= rho.
template <typename Scalar>
Scalar potential(const ReplicaParams& p, Scalar e) {
  using std::log;
  const Scalar rho = Scalar(p.rho);
  if (!(e > 0) || e > rho * (1 + Scalar(64) * std::numeric_limits<Scalar>::epsilon())) {
    throw DomainError("potential: E must lie in (0, rho]");
  }
  const Scalar alpha = Scalar(p.alpha);
  const Scalar delta = Scalar(p.delta);
  const Scalar d = Scalar(p.matrix_loss());
  const Scalar v = effective_variance(p, e);
  const Scalar m = m_of_E(p, e);
  // -alpha/2 (Delta+rho)/V + rho m/2 = -alpha (Delta + rho D) / (2V)
  const Scalar channel = -alpha / 2 * log(v) - alpha * (delta + rho * d) / (2 * v);
  const EntropyTerms<Scalar> ent = entropy_terms(rho, m);
  return channel + (1 - rho) * ent.zero + rho * ent.signal;
}

inline double potential(const ReplicaParams& p, double e) { return potential<double>(p, e); }

struct GridSpec {
  int points = 256;
  /// Lower end of the log-spaced grid; 0 selects max(1e-12, Delta/10).
  double e_min = 0.0;
  /// Relative width in E at which golden-section refinement stops.
  double refine_tol = 1e-8;
};

struct PotentialMaximum {
  double e = 0.0;
  double phi = 0.0;
  /// Sits on a grid end rather than being bracketed and refined.
  bool boundary = false;
};

struct PotentialCurve {
  std::vector<double> grid;
  std::vector<double> phi;
  std::vector<PotentialMaximum> maxima;  ///< sorted by E
  bool plateau = false;

  /// Index into maxima of the largest Phi; -1 when there is none.
  int global_index() const;
};

double default_e_min(const ReplicaParams& p);

/// Phi on a log-spaced grid in [e_min, rho], with every interior local maximum
/// refined by golden-section search in log E. Evaluated in long double.
PotentialCurve scan_potential(const ReplicaParams& p, const GridSpec& spec = {});

/// Golden-section refinement of a maximum of Phi bracketed by [lo, hi].
PotentialMaximum refine_maximum(const ReplicaParams& p, double lo, double hi, double rel_tol = 1e-8);

/// E at the global maximum of Phi. Throws NumericalError on a flat potential.
double bayes_mse(const ReplicaParams& p, const GridSpec& spec = {});

}  // namespace mucs

#endif
