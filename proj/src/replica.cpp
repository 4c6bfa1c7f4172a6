#include "mucs/replica.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mucs {

void ReplicaParams::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be > 0");
  if (!(rho > 0.0 && rho <= 1.0)) throw DomainError("rho must lie in (0, 1]");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw DomainError("delta must be finite and >= 0");
  if (!(eta >= 0.0) || std::isnan(eta)) throw DomainError("eta must be >= 0 (inf allowed)");
}

std::string describe(const ReplicaParams& p) {
  std::ostringstream out;
  out << "alpha=" << p.alpha << " rho=" << p.rho << " delta=" << p.delta << " eta=" << p.eta;
  return out.str();
}

int PotentialCurve::global_index() const {
  int best = -1;
  for (int k = 0; k < static_cast<int>(maxima.size()); ++k) {
    if (best < 0 || maxima[k].phi > maxima[best].phi) best = k;
  }
  return best;
}

double default_e_min(const ReplicaParams& p) { return std::max(1e-12, p.delta / 10.0); }

PotentialMaximum refine_maximum(const ReplicaParams& p, double lo, double hi, double rel_tol) {
  using Real = long double;
  const Real inv_phi = (std::sqrt(5.0L) - 1) / 2;
  Real a = std::log(static_cast<Real>(lo));
  Real b = std::log(static_cast<Real>(hi));
  auto f = [&](Real t) { return potential<Real>(p, std::min<Real>(std::exp(t), p.rho)); };
  Real x1 = b - inv_phi * (b - a);
  Real x2 = a + inv_phi * (b - a);
  Real f1 = f(x1);
  Real f2 = f(x2);
  // log E tolerance equals relative E tolerance to first order.
  while (b - a > static_cast<Real>(rel_tol)) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  const Real t = (a + b) / 2;
  const Real e = std::min<Real>(std::exp(t), p.rho);
  return {static_cast<double>(e), static_cast<double>(potential<Real>(p, e)), false};
}

PotentialCurve scan_potential(const ReplicaParams& p, const GridSpec& spec) {
  p.validate();
  if (spec.points < 64) throw DomainError("potential scan needs at least 64 grid points");
  const double e_min = spec.e_min > 0.0 ? spec.e_min : default_e_min(p);
  if (!(e_min < p.rho)) throw DomainError("potential scan: e_min must be below rho");

  PotentialCurve curve;
  const int n = spec.points;
  curve.grid.resize(n);
  curve.phi.resize(n);
  const double log_lo = std::log(e_min);
  const double log_hi = std::log(p.rho);
  for (int k = 0; k < n; ++k) {
    const double t = log_lo + (log_hi - log_lo) * k / (n - 1);
    curve.grid[k] = k == n - 1 ? p.rho : std::exp(t);
  }
  long double lo_phi = 0;
  long double hi_phi = 0;
  for (int k = 0; k < n; ++k) {
    const long double value = potential<long double>(p, curve.grid[k]);
    curve.phi[k] = static_cast<double>(value);
    lo_phi = k == 0 ? value : std::min(lo_phi, value);
    hi_phi = k == 0 ? value : std::max(hi_phi, value);
  }
  if (hi_phi - lo_phi <= 1e-12L * std::max(1.0L, std::fabs(hi_phi))) {
    curve.plateau = true;
    return curve;
  }

  if (curve.phi[0] > curve.phi[1]) {
    curve.maxima.push_back({curve.grid[0], curve.phi[0], true});
  }
  for (int k = 1; k + 1 < n; ++k) {
    if (curve.phi[k] > curve.phi[k - 1] && curve.phi[k] >= curve.phi[k + 1]) {
      curve.maxima.push_back(refine_maximum(p, curve.grid[k - 1], curve.grid[k + 1], spec.refine_tol));
    }
  }
  if (curve.phi[n - 1] > curve.phi[n - 2]) {
    curve.maxima.push_back({curve.grid[n - 1], curve.phi[n - 1], true});
  }
  std::sort(curve.maxima.begin(), curve.maxima.end(),
            [](const PotentialMaximum& x, const PotentialMaximum& y) { return x.e < y.e; });
  return curve;
}

double bayes_mse(const ReplicaParams& p, const GridSpec& spec) {
  const PotentialCurve curve = scan_potential(p, spec);
  const int g = curve.global_index();
  if (curve.plateau || g < 0) {
    throw NumericalError("bayes_mse: potential is flat (" + describe(p) + ")");
  }
  return curve.maxima[g].e;
}

}  // namespace mucs
