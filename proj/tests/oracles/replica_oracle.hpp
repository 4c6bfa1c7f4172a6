#ifndef MUCS_TESTS_REPLICA_ORACLE_HPP
#define MUCS_TESTS_REPLICA_ORACLE_HPP

// The potential written out term by term without regrouping, integrated in quad precision
// with adaptive Gauss-Kronrod over the whole real line. Only the log of the
// bracket is taken through log-add-exp so exp(z^2 m / 2) cannot overflow.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/float128.hpp>

#include <functional>
#include <limits>

namespace oracle {

using quad_t = boost::multiprecision::float128;

inline quad_t log_bracket(quad_t rho, quad_t m, quad_t exponent) {
  // log[1 - rho + rho / sqrt(m + 1) * exp(exponent)]
  const quad_t a = log(1 - rho);
  const quad_t b = log(rho) - log(m + 1) / 2 + exponent;
  if (rho >= 1) return b;
  const quad_t hi = a > b ? a : b;
  const quad_t lo = a > b ? b : a;
  return hi + log1p(exp(lo - hi));
}

inline quad_t gaussian_expectation(const std::function<quad_t(quad_t)>& g) {
  const quad_t inv_sqrt_2pi = 1 / sqrt(2 * boost::math::constants::pi<quad_t>());
  auto f = [&](quad_t z) { return inv_sqrt_2pi * exp(-z * z / 2) * g(z); };
  quad_t error = 0;
  const quad_t inf = std::numeric_limits<quad_t>::infinity();
  return boost::math::quadrature::gauss_kronrod<quad_t, 61>::integrate(f, -inf, inf, 25, quad_t(1e-28), &error);
}

inline quad_t potential(double alpha_d, double rho_d, double delta_d, double eta_d, quad_t e) {
  const quad_t alpha = alpha_d, rho = rho_d, delta = delta_d, eta = eta_d;
  const quad_t d = eta / (1 + eta);
  const quad_t v = delta + e + (rho - e) * d;
  const quad_t m = alpha * (1 - d) / v;
  const quad_t first = -alpha / 2 * (log(v) + (delta + rho) / v);
  const quad_t second =
      (1 - rho) * gaussian_expectation([&](quad_t z) { return log_bracket(rho, m, z * z * m / (2 * (m + 1))); });
  const quad_t third = rho * gaussian_expectation([&](quad_t z) { return log_bracket(rho, m, z * z * m / 2); });
  return first + second + third;
}

}  // namespace oracle

#endif
