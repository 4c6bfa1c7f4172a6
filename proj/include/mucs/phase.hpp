#ifndef MUCS_PHASE_HPP
#define MUCS_PHASE_HPP

// Classification of parameter points by the shape of the replica potential and
// the fixed point density evolution reaches from E = rho, plus bisection of
// the two transition lines:
//   spinodal     Easy | Hard        (a trapping high-E maximum appears)
//   first-order  Hard | Impossible  (the global maximum jumps to the high-E branch)

#include <string>
#include <vector>

#include "mucs/replica.hpp"
#include "mucs/state_evolution.hpp"

namespace mucs {

enum class PhaseClass {
  Easy,        ///< DE from rho reaches the global maximum, which is on the low-E branch
  Hard,        ///< global maximum on the low-E branch but DE is trapped at a higher-E one
  Impossible,  ///< global maximum on the high-E branch
  Degenerate,  ///< flat potential (D = 1)
};

const char* to_string(PhaseClass c);

struct PhasePoint {
  ReplicaParams params;
  PhaseClass cls = PhaseClass::Degenerate;
  double bayes_mse = 0.0;
  double amp_mse_predicted = 0.0;
  /// Local maxima of Phi, including one found only by density evolution.
  std::vector<PotentialMaximum> maxima;
};

struct ClassifyOptions {
  GridSpec grid;
  DeConfig de{.max_iters = 20000, .tol = 1e-10};
  /// A single maximum counts as low-E below low_factor * max(Delta, D rho, 1e-10).
  double low_factor = 100.0;
  /// DE has reached a maximum when its fixed point lies within this relative distance.
  double reach_rel = 0.05;
};

PhasePoint classify(const ReplicaParams& p, const ClassifyOptions& opt = {});

enum class TransitionKind { Spinodal, FirstOrder };
enum class SweepAxis { Alpha, Rho, RhoOverAlpha, Delta, Eta };

const char* to_string(TransitionKind k);
const char* to_string(SweepAxis a);
SweepAxis parse_axis(const std::string& name);

/// Copy of p with the swept coordinate set to value.
ReplicaParams with_axis(ReplicaParams p, SweepAxis axis, double value);

/// Critical value of the swept parameter, found by bisection until the bracket
/// is narrower than resolution * max(|lo|, |hi|). Delta and eta are bisected in
/// log scale. Throws BracketError when both ends classify alike or when a coarse
/// pre-scan finds more than one change inside the bracket.
double find_transition(TransitionKind kind, SweepAxis axis, const ReplicaParams& fixed, double lo,
                       double hi, double resolution = 1e-3, const ClassifyOptions& opt = {});

struct TransitionLine {
  TransitionKind kind = TransitionKind::Spinodal;
  SweepAxis column_axis = SweepAxis::Alpha;
  SweepAxis swept_axis = SweepAxis::Rho;
  /// (column value, critical value of the swept axis)
  std::vector<std::pair<double, double>> points;
};

struct PhaseGrid {
  SweepAxis x_axis = SweepAxis::Alpha;
  std::vector<double> x;
  SweepAxis y_axis = SweepAxis::RhoOverAlpha;
  std::vector<double> y;
  ReplicaParams fixed;
};

struct SweepOptions {
  ClassifyOptions classify;
  double resolution = 1e-3;
  bool extract_lines = true;
  /// 0 reads MUCS_THREADS, falling back to the hardware concurrency.
  unsigned threads = 0;
};

struct PointFailure {
  std::size_t index = 0;
  ReplicaParams params;
  std::string message;
};

struct PhaseDiagram {
  /// Row-major over (x, y): index = ix * y.size() + iy. Failed points keep
  /// their params and class Degenerate and are listed in failures.
  std::vector<PhasePoint> points;
  std::vector<TransitionLine> lines;
  std::vector<PointFailure> failures;
};

PhaseDiagram sweep_phase_diagram(const PhaseGrid& grid, const SweepOptions& opt = {});

unsigned default_thread_count();

}  // namespace mucs

#endif
