#include <doctest.h>

#include <cmath>
#include <limits>

#include "mucs/phase.hpp"

using namespace mucs;

TEST_SUITE("phase") {

TEST_CASE("easy, hard and degenerate examples") {
  const auto easy = classify({0.5, 0.1, 1e-10, 1e-4});
  CHECK(easy.cls == PhaseClass::Easy);
  CHECK(easy.amp_mse_predicted == doctest::Approx(easy.bayes_mse).epsilon(0.05));

  const auto hard = classify({0.5, 0.33, 1e-10, 1e-4});
  CHECK(hard.cls == PhaseClass::Hard);
  CHECK(hard.maxima.size() >= 2);
  CHECK(hard.amp_mse_predicted > 100 * hard.bayes_mse);

  const auto flat = classify({0.5, 0.1, 1e-10, std::numeric_limits<double>::infinity()});
  CHECK(flat.cls == PhaseClass::Degenerate);
}

TEST_CASE("impossible above the first-order line") {
  const auto p = classify({0.5, 0.45, 1e-10, 1e-4});
  CHECK(p.cls == PhaseClass::Impossible);
  CHECK(p.bayes_mse > 1e-3);
}

TEST_CASE("message passing never beats the Bayes error") {
  for (double rho : {0.05, 0.2, 0.3, 0.33, 0.36, 0.45}) {
    for (double eta : {1e-6, 1e-2}) {
      const auto pt = classify({0.5, rho, 1e-10, eta});
      CAPTURE(rho);
      CAPTURE(eta);
      CHECK(pt.amp_mse_predicted >= pt.bayes_mse * (1 - 1e-6) - 1e-10);
      if (pt.cls == PhaseClass::Hard) CHECK(pt.amp_mse_predicted > pt.bayes_mse);
    }
  }
}

TEST_CASE("spinodal lies below rho = 0.33 and barely moves with eta") {
  const double lo = find_transition(TransitionKind::Spinodal, SweepAxis::Rho, {0.5, 0.1, 1e-10, 1e-8}, 0.1, 0.4);
  const double hi = find_transition(TransitionKind::Spinodal, SweepAxis::Rho, {0.5, 0.1, 1e-10, 1e-4}, 0.1, 0.4);
  CHECK(lo < 0.33);
  CHECK(hi < 0.33);
  CHECK(std::fabs(lo - hi) < 0.02);
  const double first = find_transition(TransitionKind::FirstOrder, SweepAxis::Rho, {0.5, 0.1, 1e-10, 1e-4}, 0.1, 0.5);
  CHECK(hi < first);
  CHECK(first < 0.5);
}

TEST_CASE("finer resolution stays inside the coarse bracket") {
  const ReplicaParams fixed{0.5, 0.1, 1e-10, 1e-6};
  const double coarse = find_transition(TransitionKind::Spinodal, SweepAxis::Rho, fixed, 0.1, 0.4, 1e-2);
  const double fine = find_transition(TransitionKind::Spinodal, SweepAxis::Rho, fixed, 0.1, 0.4, 1e-4);
  CHECK(std::fabs(coarse - fine) <= 1e-2 * 0.4);
}

TEST_CASE("bracket errors") {
  const ReplicaParams fixed{0.5, 0.1, 1e-10, 1e-4};
  CHECK_THROWS_AS(find_transition(TransitionKind::Spinodal, SweepAxis::Rho, fixed, 0.05, 0.1), BracketError);
  CHECK_THROWS_AS(find_transition(TransitionKind::FirstOrder, SweepAxis::Rho, fixed, 0.05, 0.1), BracketError);
}

TEST_CASE("noiseless first-order line approaches alpha as the grid reaches lower E") {
  const ReplicaParams fixed{0.5, 0.1, 0.0, 0.0};
  ClassifyOptions coarse;
  coarse.grid.e_min = 1e-12;
  ClassifyOptions deep;
  deep.grid.e_min = 1e-30;
  const double a = find_transition(TransitionKind::FirstOrder, SweepAxis::RhoOverAlpha, fixed, 0.5, 0.999, 1e-3, coarse);
  const double b = find_transition(TransitionKind::FirstOrder, SweepAxis::RhoOverAlpha, fixed, 0.5, 0.999, 1e-3, deep);
  CHECK(a > 0.85);
  CHECK(b > a);
  CHECK(b < 1.0);
}

TEST_CASE("sweep with a single point and with lines") {
  PhaseGrid one{SweepAxis::Rho, {0.1}, SweepAxis::Eta, {1e-4}, {0.5, 0.1, 1e-10, 1e-4}};
  SweepOptions opt;
  opt.extract_lines = false;
  opt.threads = 1;
  const auto d = sweep_phase_diagram(one, opt);
  REQUIRE(d.points.size() == 1);
  CHECK(d.points[0].cls == PhaseClass::Easy);
  CHECK(d.lines.empty());
  CHECK(d.failures.empty());

  PhaseGrid col{SweepAxis::Eta, {1e-6}, SweepAxis::Rho, {0.1, 0.2, 0.3, 0.35, 0.4, 0.45}, {0.5, 0.1, 1e-10, 1e-4}};
  SweepOptions with_lines;
  with_lines.resolution = 1e-2;
  const auto lines = sweep_phase_diagram(col, with_lines);
  REQUIRE(lines.points.size() == 6);
  REQUIRE(lines.lines.size() == 2);
  double spinodal = NAN, first = NAN;
  for (const auto& line : lines.lines) {
    CHECK(line.column_axis == SweepAxis::Eta);
    CHECK(line.swept_axis == SweepAxis::Rho);
    REQUIRE(line.points.size() == 1);
    (line.kind == TransitionKind::Spinodal ? spinodal : first) = line.points[0].second;
  }
  CHECK(spinodal > 0.3);
  CHECK(spinodal < 0.33);
  CHECK(first > spinodal);
  CHECK(first < 0.45);
}

TEST_CASE("sweeps are independent of thread count") {
  PhaseGrid grid{SweepAxis::Rho, {0.1, 0.33}, SweepAxis::Eta, {1e-6, 1e-2}, {0.5, 0.1, 1e-10, 1e-4}};
  SweepOptions a, b;
  a.extract_lines = b.extract_lines = false;
  a.threads = 1;
  b.threads = 3;
  const auto da = sweep_phase_diagram(grid, a);
  const auto db = sweep_phase_diagram(grid, b);
  REQUIRE(da.points.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(da.points[k].cls == db.points[k].cls);
    CHECK(da.points[k].bayes_mse == db.points[k].bayes_mse);
  }
  CHECK(da.points[1].params.eta == 1e-2);
  CHECK(da.points[2].params.rho == 0.33);
}

TEST_CASE("axis names") {
  CHECK(parse_axis("rho_over_alpha") == SweepAxis::RhoOverAlpha);
  CHECK(parse_axis("eta") == SweepAxis::Eta);
  CHECK_THROWS_AS(parse_axis("gamma"), DomainError);
  const auto p = with_axis({0.4, 0.1, 0, 0}, SweepAxis::RhoOverAlpha, 0.5);
  CHECK(p.rho == doctest::Approx(0.2));
  CHECK(std::string(to_string(PhaseClass::Hard)) == "hard");
}

}
