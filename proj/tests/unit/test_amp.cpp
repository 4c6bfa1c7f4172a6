#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "../oracles/amp_oracle.hpp"
#include "mucs/amp.hpp"

using namespace mucs;

namespace {

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

std::vector<double> to_std(const RowMatrix& m) { return {m.data(), m.data() + m.size()}; }

double max_diff(const Vector& a, const std::vector<double>& b) {
  double worst = 0;
  for (Index i = 0; i < a.size(); ++i) worst = std::max(worst, std::fabs(a[i] - b[i]));
  return worst;
}

oracle::LoopRule loop_rule(VarianceRule rule, RobustTiming timing) {
  switch (rule) {
    case VarianceRule::Robust:
      return timing == RobustTiming::Fresh ? oracle::LoopRule::Robust : oracle::LoopRule::RobustLagged;
    case VarianceRule::MuAmp: return oracle::LoopRule::MuAmp;
    case VarianceRule::KnownNoise: return oracle::LoopRule::KnownNoise;
  }
  return oracle::LoopRule::Robust;
}

}  // namespace

TEST_SUITE("amp") {

TEST_CASE("initial state") {
  const auto inst = generate(16, 0.5, SignalPrior(0.2), NoiseModel{1e-3, 1e-2}, 2);
  const auto st = amp_initial_state(inst, SignalPrior(0.2));
  CHECK(st.a.isZero(0.0));
  CHECK((st.v.array() == 0.2).all());
  CHECK(st.omega == inst.y);
  CHECK(st.t == 0);
}

TEST_CASE("several steps follow the scalar-loop transcription for every rule") {
  for (auto rule : {VarianceRule::Robust, VarianceRule::MuAmp, VarianceRule::KnownNoise}) {
    for (auto timing : {RobustTiming::Fresh, RobustTiming::Lagged}) {
      if (rule != VarianceRule::Robust && timing == RobustTiming::Lagged) continue;
      const double rho = 0.2, delta = 1e-3, eta = 0.05;
      const auto inst = generate(64, 0.5, SignalPrior(rho), NoiseModel{delta, eta}, 5);
      AmpConfig cfg;
      cfg.variance_rule = rule;
      cfg.robust_timing = timing;
      AmpState st = amp_initial_state(inst, SignalPrior(rho));
      oracle::LoopState ref{to_std(st.a), to_std(st.v), to_std(st.omega), {}, 0};
      const auto f = to_std(inst.f);
      const auto y = to_std(inst.y);
      for (int t = 0; t < 6; ++t) {
        st = amp_step(st, inst, SignalPrior(rho), cfg);
        ref = oracle::loop_step(ref, f, y, 32, 64, rho, delta, inst.entry_posterior_variance(), loop_rule(rule, timing));
        CAPTURE(to_string(rule));
        CAPTURE(t);
        const double scale = 1e-12 * std::max(1.0, st.a.cwiseAbs().maxCoeff());
        CHECK(max_diff(st.a, ref.a) < scale);
        CHECK(max_diff(st.v, ref.v) < scale);
        CHECK(max_diff(st.omega, ref.omega) < 1e-12 * std::max(1.0, st.omega.cwiseAbs().maxCoeff()));
      }
    }
  }
}

TEST_CASE("zero instance is a fixed point") {
  ProblemInstance inst = generate(16, 0.5, SignalPrior(0.0), NoiseModel{0.0, 0.0}, 1);
  REQUIRE(inst.y.isZero(0.0));
  AmpConfig cfg;
  AmpState st = amp_initial_state(inst, SignalPrior(0.3));
  for (int t = 0; t < 5; ++t) {
    st = amp_step(st, inst, SignalPrior(0.3), cfg);
    CHECK(st.omega.isZero(0.0));
    CHECK(st.a.isZero(0.0));
    CHECK(st.big_v[0] > 0.0);
    CHECK((st.v.array() >= 0.0).all());
  }
}

TEST_CASE("rho = 0 converges at once to the zero estimate") {
  const auto inst = generate(500, 0.5, SignalPrior(0.0), NoiseModel{1e-10, 1e-4}, 3);
  const auto report = amp_run(inst, SignalPrior(0.0), AmpConfig{}, inst.s);
  CHECK(report.converged);
  CHECK(report.iterations == 1);
  CHECK(report.final_estimate.isZero(0.0));
}

TEST_CASE("compute_mse examples") {
  Vector a(3), b(3);
  a << 1, 2, 3;
  b << 1, 2, 0;
  CHECK(compute_mse(a, b) == 3.0);
  CHECK(compute_mse(a, a) == 0.0);
  const auto s = sample_signal(SignalPrior(0.1), 200000, 8);
  CHECK(compute_mse(Vector::Zero(s.size()), s) == doctest::Approx(0.1).epsilon(0.03));
  CHECK_THROWS_AS(compute_mse(a, Vector::Zero(2)), DimensionError);
}

TEST_CASE("permuting columns permutes the estimate") {
  const double rho = 0.15;
  auto inst = generate(120, 0.6, SignalPrior(rho), NoiseModel{1e-4, 1e-3}, 12);
  std::vector<Index> perm(120);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(4));
  ProblemInstance shuffled = inst;
  for (Index i = 0; i < 120; ++i) {
    shuffled.f.col(i) = inst.f.col(perm[i]);
    shuffled.s[i] = inst.s[perm[i]];
    shuffled.col_sq[i] = inst.col_sq[perm[i]];
  }
  AmpConfig cfg;
  cfg.max_iters = 30;
  const auto base = amp_run(inst, SignalPrior(rho), cfg);
  const auto moved = amp_run(shuffled, SignalPrior(rho), cfg);
  REQUIRE(base.iterations == moved.iterations);
  double worst = 0;
  for (Index i = 0; i < 120; ++i) {
    worst = std::max(worst, std::fabs(moved.final_estimate[i] - base.final_estimate[perm[i]]));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("run bookkeeping and determinism") {
  const auto inst = generate(1000, 0.5, SignalPrior(0.1), NoiseModel{1e-10, 1e-4}, 7);
  const auto a = amp_run(inst, SignalPrior(0.1), AmpConfig{}, inst.s);
  const auto b = amp_run(inst, SignalPrior(0.1), AmpConfig{}, inst.s);
  CHECK(a.converged);
  CHECK(static_cast<int>(a.mse_per_iter.size()) == a.iterations);
  CHECK(static_cast<int>(a.v_mean_per_iter.size()) == a.iterations);
  CHECK(a.final_estimate == b.final_estimate);
  CHECK(a.mse_per_iter == b.mse_per_iter);
  CHECK(a.mse_per_iter.back() < 1e-4);
  CHECK(a.initial_mse == doctest::Approx(inst.s.squaredNorm() / 1000));
  const auto blind = amp_run(inst, SignalPrior(0.1), AmpConfig{});
  CHECK(blind.mse_per_iter.empty());
  CHECK(blind.final_estimate == a.final_estimate);
}

TEST_CASE("configuration checks") {
  AmpConfig cfg;
  cfg.damping = 1.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = {};
  cfg.tol = 0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = {};
  cfg.max_iters = 0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  CHECK(parse_variance_rule("mu-amp") == VarianceRule::MuAmp);
  CHECK_THROWS_AS(parse_variance_rule("nope"), DomainError);
  const auto inst = generate(20, 0.5, SignalPrior(0.1), NoiseModel{}, 1);
  AmpState bad = amp_initial_state(inst, SignalPrior(0.1));
  bad.a.resize(3);
  CHECK_THROWS_AS(amp_step(bad, inst, SignalPrior(0.1), AmpConfig{}), DimensionError);
}

TEST_CASE("damping blends with the previous estimate") {
  const auto inst = generate(64, 0.5, SignalPrior(0.2), NoiseModel{1e-3, 0.0}, 5);
  AmpConfig plain;
  AmpConfig damped;
  damped.damping = 0.25;
  const auto s0 = amp_initial_state(inst, SignalPrior(0.2));
  const auto p = amp_step(s0, inst, SignalPrior(0.2), plain);
  const auto d = amp_step(s0, inst, SignalPrior(0.2), damped);
  CHECK((d.a - 0.75 * p.a - 0.25 * s0.a).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((d.v - 0.75 * p.v - 0.25 * s0.v).cwiseAbs().maxCoeff() < 1e-15);
}

}
