#ifndef MUCS_QUADRATURE_HPP
#define MUCS_QUADRATURE_HPP

// Fixed-rule quadrature for expectations over a standard normal variable.
//
// Every Gaussian integral in the library has an even integrand whose only
// sharp feature is a logistic switch at a location known in closed form, so a
// composite Gauss-Legendre rule on [0, z_max] with breakpoints at that switch
// is both cheap and uniformly accurate. Convergence is checked by doubling the
// number of panels per segment. The rules are templated on the scalar type so
// the same code runs in double, long double and quad precision.

#include <algorithm>
#include <array>
#include <type_traits>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "mucs/error.hpp"

namespace mucs::quad {

template <typename Scalar, int Order>
struct LegendreRule {
  std::array<Scalar, Order> nodes{};    // on [-1, 1]
  std::array<Scalar, Order> weights{};
};

/// Gauss-Legendre nodes by Newton iteration on the three-term recurrence,
/// carried out in long double when Scalar is narrower.
template <typename Scalar, int Order>
LegendreRule<Scalar, Order> make_gauss_legendre() {
  using std::abs;
  using std::cos;
  using Work = std::conditional_t<(sizeof(Scalar) < sizeof(long double)), long double, Scalar>;
  LegendreRule<Scalar, Order> rule;
  const Work pi = Work(std::numbers::pi_v<long double>);
  const Work eps = std::numeric_limits<Work>::epsilon();
  for (int k = 0; k < (Order + 1) / 2; ++k) {
    Work x = cos(pi * (Work(k) + Work(0.75)) / (Work(Order) + Work(0.5)));
    Work dp = 0;
    for (int it = 0; it < 100; ++it) {
      Work p0 = 1;
      Work p1 = x;
      for (int n = 2; n <= Order; ++n) {
        const Work p2 = ((2 * n - 1) * x * p1 - (n - 1) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      dp = Order * (x * p1 - p0) / (x * x - 1);
      const Work dx = p1 / dp;
      x -= dx;
      if (abs(dx) <= 4 * eps) break;
    }
    const Work w = 2 / ((1 - x * x) * dp * dp);
    rule.nodes[k] = Scalar(-x);
    rule.weights[k] = Scalar(w);
    rule.nodes[Order - 1 - k] = Scalar(x);
    rule.weights[Order - 1 - k] = Scalar(w);
  }
  return rule;
}

template <typename Scalar, int Order = 20>
const LegendreRule<Scalar, Order>& gauss_legendre() {
  static const LegendreRule<Scalar, Order> rule = make_gauss_legendre<Scalar, Order>();
  return rule;
}

/// Integral of f over [a, b] split into `panels` equal Gauss-Legendre panels.
template <typename Scalar, typename F>
Scalar legendre_panels(F& f, Scalar a, Scalar b, int panels) {
  const auto& rule = gauss_legendre<Scalar>();
  const Scalar h = (b - a) / Scalar(panels);
  Scalar total = 0;
  for (int p = 0; p < panels; ++p) {
    const Scalar lo = a + h * Scalar(p);
    const Scalar half = h / 2;
    const Scalar mid = lo + half;
    Scalar acc = 0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      acc += rule.weights[k] * f(mid + half * rule.nodes[k]);
    }
    total += acc * half;
  }
  return total;
}

/// Upper integration limit beyond which the standard normal density is below
/// machine epsilon by a wide margin.
template <typename Scalar>
Scalar gaussian_cutoff() {
  using std::log;
  using std::sqrt;
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  return sqrt(2 * (-log(eps) + 8));
}

template <typename Scalar>
struct Options {
  Scalar rel_tol = Scalar(1e-13);
  Scalar abs_tol = Scalar(0);
  int start_panels = 2;
  int max_panels = 4096;
};

template <typename Scalar>
struct Result {
  Scalar value = 0;
  int panels = 0;
  Scalar rel_change = 0;
};

/// Appends breakpoints bracketing a smooth switch centered at `center` whose
/// transition width is `width`.
template <typename Scalar>
void add_switch_breaks(std::vector<Scalar>& breaks, Scalar center, Scalar width) {
  breaks.push_back(center);
  for (const int k : {2, 8, 32}) {
    breaks.push_back(center - Scalar(k) * width);
    breaks.push_back(center + Scalar(k) * width);
  }
}

/// E[h(Z)] for Z ~ N(0, 1) and even h, computed as 2 * int_0^zmax phi(z) h(z) dz.
/// Breakpoints outside (0, zmax) are ignored.
template <typename Scalar, typename H>
Result<Scalar> even_gaussian_expectation(H&& h, std::vector<Scalar> breaks,
                                         const Options<Scalar>& opt = {}) {
  using std::abs;
  using std::exp;
  using std::isfinite;
  using std::sqrt;
  const Scalar zmax = gaussian_cutoff<Scalar>();
  const Scalar two_over_sqrt2pi = Scalar(2) / sqrt(2 * Scalar(std::numbers::pi_v<long double>));

  std::vector<Scalar> edges{Scalar(0)};
  for (const Scalar& b : breaks) {
    if (b > 0 && b < zmax) edges.push_back(b);
  }
  edges.push_back(zmax);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  auto integrand = [&](Scalar z) { return two_over_sqrt2pi * exp(-z * z / 2) * h(z); };
  auto integrate = [&](int panels) {
    Scalar total = 0;
    for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
      total += legendre_panels(integrand, edges[s], edges[s + 1], panels);
    }
    return total;
  };

  int panels = opt.start_panels;
  Scalar coarse = integrate(panels);
  while (true) {
    const Scalar fine = integrate(2 * panels);
    panels *= 2;
    const Scalar change = abs(fine - coarse);
    const Scalar scale = abs(fine);
    if (!isfinite(fine)) {
      throw NumericalError("gaussian quadrature: non-finite integrand");
    }
    if (change <= opt.rel_tol * scale + opt.abs_tol) {
      return {fine, panels, scale > 0 ? change / scale : change};
    }
    if (panels >= opt.max_panels) {
      std::ostringstream msg;
      msg << "gaussian quadrature did not converge: panels=" << panels
          << " value=" << static_cast<double>(fine)
          << " rel_change=" << static_cast<double>(scale > 0 ? change / scale : change);
      throw NumericalError(msg.str());
    }
    coarse = fine;
  }
}

}  // namespace mucs::quad

#endif
