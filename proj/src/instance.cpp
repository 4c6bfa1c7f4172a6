#include "mucs/instance.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <boost/random/normal_distribution.hpp>

#include "mucs/rng.hpp"

namespace mucs {

void NoiseModel::validate() const {
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw DomainError("noise variance delta must be finite and >= 0");
  }
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw DomainError("matrix uncertainty eta must be finite and >= 0");
  }
}

Index measurement_count(Index n, double alpha) {
  if (n < 1) throw DomainError("signal length n must be at least 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("sampling rate alpha must be > 0");
  const double m = std::round(alpha * static_cast<double>(n));
  if (m < 1.0) throw DomainError("round(alpha * n) must be at least 1");
  if (m > static_cast<double>(std::numeric_limits<Index>::max() / 2)) {
    throw DimensionError("measurement count overflows");
  }
  return static_cast<Index>(m);
}

std::uint64_t instance_matrix_bytes(Index n, Index m, MatrixStorage storage) {
  const auto nn = static_cast<std::uint64_t>(n);
  const auto mm = static_cast<std::uint64_t>(m);
  const std::uint64_t copies = storage == MatrixStorage::Full ? 3 : 1;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() / (copies * sizeof(double));
  if (nn != 0 && mm > limit / nn) throw DimensionError("matrix size overflows 64 bits");
  return copies * sizeof(double) * nn * mm;
}

Vector measurement_noise(Index m, double delta, std::uint64_t seed) {
  auto engine = rng::make_engine(seed, rng::Stream::MeasurementNoise);
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  const double sd = std::sqrt(delta);
  Vector xi(m);
  for (Index mu = 0; mu < m; ++mu) xi[mu] = sd * normal(engine);
  return xi;
}

void finalize_posterior_matrix(ProblemInstance& inst) {
  const double scale = 1.0 / std::sqrt(1.0 + inst.noise.eta);
  inst.f = inst.fprime * scale;
  inst.col_sq = inst.f.colwise().squaredNorm().transpose();
}

ProblemInstance generate(Index n, double alpha, const SignalPrior& prior, const NoiseModel& noise,
                         std::uint64_t seed, const GenerateOptions& options) {
  noise.validate();
  const Index m = measurement_count(n, alpha);
  const std::uint64_t bytes = instance_matrix_bytes(n, m, options.storage);
  if (bytes > options.memory_budget_bytes) {
    std::ostringstream msg;
    msg << "instance needs " << bytes << " bytes of matrix storage (N=" << n << ", M=" << m
        << "), budget is " << options.memory_budget_bytes;
    throw DimensionError(msg.str());
  }

  ProblemInstance inst;
  inst.noise = noise;
  inst.rho = prior.rho();
  inst.seed = seed;
  inst.s = sample_signal(prior, n, seed);
  const Vector xi = measurement_noise(m, noise.delta, seed);

  auto f0_engine = rng::make_engine(seed, rng::Stream::TrueMatrix);
  auto x_engine = rng::make_engine(seed, rng::Stream::MatrixNoise);
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  const double entry_sd = 1.0 / std::sqrt(static_cast<double>(n));
  const double sqrt_eta = std::sqrt(noise.eta);
  const double mix = 1.0 / std::sqrt(1.0 + noise.eta);

  const bool full = options.storage == MatrixStorage::Full;
  if (full) {
    inst.f0.resize(m, n);
    inst.fprime.resize(m, n);
  }
  inst.f.resize(m, n);
  inst.y.resize(m);

  // Row by row so SolverOnly never holds more than one row of F0 and F'.
  // Each stream is consumed in row-major order regardless of storage mode.
  Eigen::RowVectorXd f0_row(n);
  Eigen::RowVectorXd x_row(n);
  Eigen::RowVectorXd fprime_row(n);
  for (Index mu = 0; mu < m; ++mu) {
    for (Index i = 0; i < n; ++i) f0_row[i] = entry_sd * normal(f0_engine);
    for (Index i = 0; i < n; ++i) x_row[i] = entry_sd * normal(x_engine);
    fprime_row = (f0_row + sqrt_eta * x_row) * mix;
    inst.y[mu] = f0_row.dot(inst.s) + xi[mu];
    inst.f.row(mu) = fprime_row * mix;
    if (full) {
      inst.f0.row(mu) = f0_row;
      inst.fprime.row(mu) = fprime_row;
    }
  }
  inst.col_sq = inst.f.colwise().squaredNorm().transpose();
  return inst;
}

}  // namespace mucs
