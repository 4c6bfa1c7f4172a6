#ifndef MUCS_INSTANCE_HPP
#define MUCS_INSTANCE_HPP

#include <cstdint>
#include <filesystem>

#include "mucs/prior.hpp"
#include "mucs/types.hpp"

namespace mucs {

/// Measurement-noise variance and matrix-uncertainty level.
struct NoiseModel {
  double delta = 0.0;
  double eta = 0.0;

  /// Fraction of matrix information lost to uncertainty, eta/(1+eta); 1 for eta = inf.
  double matrix_loss() const noexcept { return std::isinf(eta) ? 1.0 : eta / (1.0 + eta); }
  void validate() const;
};

enum class MatrixStorage {
  Full,        ///< keep the true, observed and posterior-mean matrices
  SolverOnly,  ///< keep only the posterior-mean matrix used by AMP
};

struct GenerateOptions {
  MatrixStorage storage = MatrixStorage::Full;
  std::uint64_t memory_budget_bytes = std::uint64_t{4} << 30;
};

/// A synthetic measurement problem y = F0 s + xi where the solver only sees the
/// corrupted matrix F' = (F0 + sqrt(eta) X)/sqrt(1+eta) and uses its posterior
/// mean F = F'/sqrt(1+eta).
struct ProblemInstance {
  RowMatrix f0;      ///< true matrix; empty under SolverOnly storage
  RowMatrix fprime;  ///< observed matrix; empty under SolverOnly storage
  RowMatrix f;       ///< posterior mean of F0 given F'
  Vector s;          ///< ground-truth signal
  Vector y;          ///< measurements
  Vector col_sq;     ///< sum_mu F_{mu i}^2 for every column i
  NoiseModel noise;
  double rho = 0.0;  ///< density used to draw s
  std::uint64_t seed = 0;

  Index n() const noexcept { return s.size(); }
  Index m() const noexcept { return y.size(); }
  double alpha() const noexcept { return static_cast<double>(m()) / static_cast<double>(n()); }
  bool has_full_storage() const noexcept { return f0.size() > 0; }
  /// Per-entry posterior variance of F0 given F', eta / (N (1 + eta)).
  double entry_posterior_variance() const noexcept {
    return noise.matrix_loss() / static_cast<double>(n());
  }
};

/// Number of measurements for a sampling rate: round(alpha * n).
Index measurement_count(Index n, double alpha);

/// Bytes of matrix storage generate() would allocate.
std::uint64_t instance_matrix_bytes(Index n, Index m, MatrixStorage storage);

ProblemInstance generate(Index n, double alpha, const SignalPrior& prior, const NoiseModel& noise,
                         std::uint64_t seed, const GenerateOptions& options = {});

/// The measurement-noise vector xi that generate() adds to F0 s.
Vector measurement_noise(Index m, double delta, std::uint64_t seed);

/// Recomputes f = fprime / sqrt(1 + eta) and the column norms, exactly as
/// generate() does.
void finalize_posterior_matrix(ProblemInstance& inst);

// Binary instance file. Layout, all little-endian:
//   "AMPU1"                                   5-byte magic
//   u64 version, u64 N, u64 M, f64 delta, f64 eta, f64 rho, u64 seed
//   f64 f0[M*N], f64 fprime[M*N] (row-major), f64 s[N], f64 y[M]
//   u64 FNV-1a checksum of every byte after the magic
inline constexpr char kInstanceMagic[] = "AMPU1";
inline constexpr std::uint64_t kInstanceVersion = 1;

void save_instance(const ProblemInstance& inst, const std::filesystem::path& path);
ProblemInstance load_instance(const std::filesystem::path& path);

}  // namespace mucs

#endif
