#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "saconc/bounds.hpp"
#include "saconc/scenario.hpp"

using namespace saconc;

namespace {

StepSchedule sched(double alpha, double h, double z) {
  StepSchedule s;  // bypasses the admissibility-oriented h >= 8 check so the
  s.alpha = alpha; // deliberately inadmissible fixtures stay constructible
  s.h = h;
  s.z = z;
  return s;
}

LedgerInputs simple_inputs(double A1, double A3, double B1, double alpha,
                           double h, double z) {
  LedgerInputs in;
  in.nb.A1 = A1;
  in.nb.A3 = A3;
  in.nb.B1 = B1;
  in.nb.L1 = 1.0;
  in.nb.L2 = 1.0;
  in.env = envelope_constants(A3, 1.0, 1.0, 1.0, 1.0);
  in.sch = sched(alpha, h, z);
  in.x0_error = 1.0;
  in.xstar_norm = 0.0;
  return in;
}

}  // namespace

TEST_CASE("step schedule lemmas over a large grid") {
  for (const auto& s : {StepSchedule(2.0, 8.0, 1.0), StepSchedule(1.5, 16.0, 0.75),
                        StepSchedule(4.0, 8.0, 0.5)}) {
    double k = 0.0;
    while (k <= 1e6) {
      const double ak = s.step(k);
      const double ak1 = s.step(k + 1.0);
      const double akm1 = s.step(k - 1.0);
      CHECK(ak / ak1 <= 2.0 + 1e-12);
      CHECK(akm1 - ak <= 2.0 * ak * ak / s.alpha + 1e-15);
      CHECK(ak * akm1 <= 2.0 * ak * ak + 1e-15);
      k = std::max(k + 1.0, std::floor(k * 1.25));
    }
  }
  CHECK_THROWS_AS(StepSchedule(1.0, 4.0, 1.0), BadParams);
  CHECK_THROWS_AS(StepSchedule(-1.0, 8.0, 1.0), BadParams);
  CHECK_THROWS_AS(StepSchedule(1.0, 8.0, 1.5), BadParams);
}

TEST_CASE("admissibility verdicts") {
  EnvelopeConstants env = envelope_constants(0.5, 1.0, 1.0, 1.0, 1.0);  // eta=1
  // z = 1, alpha = 1 violates alpha > 2/eta.
  Admissibility bad = check_admissible(sched(1.0, 64.0, 1.0), env, 0.0, 0.0, 0.0);
  CHECK_FALSE(bad.ok);
  REQUIRE_FALSE(bad.failures.empty());
  CHECK(bad.failures[0].find("alpha > 2/eta") != std::string::npos);

  // z = 1, alpha = 3 with h at the computed requirement passes.
  const double C1 = 10.0, L1 = 1.0, L2 = 1.0;
  const double h_req = std::max(
      {4.0 * C1 / (env.eta * 3.0), env.eta / 6.0,
       env.u * env.L_s * (L1 + L2) / (env.l_cs * env.l_cs * 3.0), 8.0});
  CHECK(check_admissible(sched(3.0, std::ceil(h_req), 1.0), env, C1, L1, L2).ok);
  CHECK_FALSE(
      check_admissible(sched(3.0, h_req - 1.0, 1.0), env, C1, L1, L2).ok);

  // z = 0.5, alpha = 4: the z-specific floor (4z/(alpha eta))^(1/(1-z)) =
  // 0.25 is dominated by the hard floor h >= 8.
  CHECK(std::pow(4.0 * 0.5 / (4.0 * env.eta), 1.0 / 0.5) ==
        doctest::Approx(0.25));
  CHECK(check_admissible(sched(4.0, 8.0, 0.5), env, 0.0, 0.0, 0.0).ok);
}

TEST_CASE("ledger closed forms and purity") {
  // All operator-noise constants zero, A3 = gamma_c: C2' = (1+gamma_c) L2.
  LedgerInputs in;
  in.nb.A1 = 0.0;
  in.nb.B1 = 0.0;
  in.nb.A3 = 0.5;
  in.nb.gamma_c = 0.5;
  in.nb.L1 = 0.0;
  in.nb.L2 = 3.0;
  in.env = envelope_constants(0.5, 1.0, 1.0, 1.0, 1.0);
  in.sch = StepSchedule(3.0, 64.0, 1.0);
  in.x0_error = 2.0;
  ConstantsLedger lg = constants_ledger(in);
  CHECK(lg.C2p == doctest::Approx((1.0 + 0.5) * 3.0).epsilon(1e-12));
  CHECK(lg.C1p == doctest::Approx(0.5 * 3.0 + 2.0 * 3.0).epsilon(1e-12));

  // b_bar1 = u alpha / theta.
  CHECK(lg.b_bar1 ==
        doctest::Approx(in.env.u * in.sch.alpha / lg.theta).epsilon(1e-12));

  // D < 0 starting ball: 2 x0^2 + 2 K^2 / D^2.
  const double K = in.nb.B123();
  const double D = in.nb.D();
  CHECK(lg.a_bar1 ==
        doctest::Approx(2.0 * 4.0 + 2.0 * K * K / (D * D)).epsilon(1e-12));

  // Purity: identical inputs give bitwise-identical serialized constants.
  ConstantsLedger lg2 = constants_ledger(in);
  CHECK(lg.to_json().dump() == lg2.to_json().dump());

  // Degenerate start is surfaced, not patched.
  in.x0_error = 0.0;
  CHECK_THROWS_AS(constants_ledger(in), DegenerateStart);
}

TEST_CASE("worst-case envelope closed forms") {
  // D = -0.5 with K = 0.5: constant envelope x0 + K/|D| = 2.
  NoiseBounds nb;
  nb.A3 = 0.5;
  nb.B1 = 0.5;
  BoundCurve c1 = worst_case_envelope(sched(1.0, 8.0, 1.0), nb, 1.0, 0.0);
  for (double k : {0.0, 10.0, 1e4}) {
    CHECK(c1.envelope(k) == doctest::Approx(2.0).epsilon(1e-12));
  }

  // D = 0, z = 1, alpha = 1, h = 8: B_k = x0 + 0.5 log((k+7)/7).
  NoiseBounds nb0;
  nb0.A3 = 1.0;
  nb0.B1 = 0.5;
  BoundCurve c2 = worst_case_envelope(sched(1.0, 8.0, 1.0), nb0, 1.0, 0.0);
  for (double k : {1.0, 100.0, 1e5}) {
    CHECK(c2.envelope(k) ==
          doctest::Approx(1.0 + 0.5 * std::log((k + 7.0) / 7.0)).epsilon(1e-12));
  }

  // Noise-free contraction: envelope frozen at the starting error.
  NoiseBounds nbf;
  nbf.A3 = 0.5;
  BoundCurve c3 = worst_case_envelope(sched(1.0, 8.0, 1.0), nbf, 1.0, 0.0);
  CHECK(c3.envelope(1e6) == doctest::Approx(1.0).epsilon(1e-12));

  // Bounding-sequence monotonicity: non-decreasing for D >= 0.
  NoiseBounds nbp;
  nbp.A1 = 0.3;
  nbp.A3 = 0.9;
  nbp.B1 = 0.1;
  BoundCurve c4 = worst_case_envelope(sched(1.0, 8.0, 0.75), nbp, 1.0, 0.0);
  double prev = 0.0;
  for (double k = 0.0; k <= 1000.0; k += 10.0) {
    const double b = c4.envelope(k);
    CHECK(b >= prev);
    prev = b;
  }
}

TEST_CASE("z=1 high-probability curve structure") {
  LedgerInputs in = scenario_ledger_inputs(scenario_by_name("stationary_mean"));
  ConstantsLedger lg = constants_ledger(in);
  REQUIRE(lg.admissible.ok);
  const double h = in.sch.h;

  // k = 0: the 1 v log^2 clamp is exactly 1 and the b_bar4 term vanishes.
  const double at0 = hp_bound(lg, 0.0, 0.1);
  const double expected0 =
      lg.a_bar1 * (lg.b_bar1 * std::log(10.0) + lg.b_bar2) / (h - 1.0);
  CHECK(at0 == doctest::Approx(expected0).epsilon(1e-12));

  // delta = 1 removes the log(1/delta) contribution entirely.
  const double k = 1000.0;
  const double diff = hp_bound(lg, k, 0.1) - hp_bound(lg, k, 1.0);
  const double logk = std::log((k - 1.0 + h) / (h - 1.0));
  const double clamp = std::max(1.0, logk * logk);
  CHECK(diff == doctest::Approx(lg.a_bar1 * clamp / (k + h - 1.0) *
                                lg.b_bar1 * std::log(10.0))
                    .epsilon(1e-10));

  // Eventual decrease in k and monotonicity in delta.
  CHECK(hp_bound(lg, 1e6, 0.01) < hp_bound(lg, 1e3, 0.01));
  CHECK(hp_bound(lg, k, 0.01) >= hp_bound(lg, k, 0.1));
  CHECK_THROWS_AS(hp_bound(lg, k, 0.0), InvalidGamma);
}

TEST_CASE("case reduction: D>0 form at D=0 matches the D<=0 curve") {
  LedgerInputs in = scenario_ledger_inputs(scenario_by_name("stationary_mean"));
  ConstantsLedger lg = constants_ledger(in);
  const double h = in.sch.h;
  for (double k : {10.0, 100.0, 1e4}) {
    for (double delta : {0.1, 0.01}) {
      const double L = std::log(1.0 / delta);
      const double bracket =
          lg.b_bar1 * L + lg.b_bar2 +
          lg.b_bar4 * std::log((k + h - 1.0) / (h - 1.0));
      // The expansive-case form with D set to 0: the power factor collapses
      // to 1, leaving a_bar1 * bracket / (k + h - 1).
      const double reduced = lg.a_bar1 * bracket / (k + h - 1.0);
      const double actual = hp_bound(lg, k, delta);
      const double logk = std::log((k - 1.0 + h) / (h - 1.0));
      const double clamp = std::max(1.0, logk * logk);
      CHECK(actual >= reduced - 1e-12);
      CHECK(actual <= clamp * reduced + 1e-9);
    }
  }
}

TEST_CASE("z<1 curves decay at the advertised rate") {
  // Contractive z = 0.75 scenario: bound shape ~ k^-z up to logs.
  LedgerInputs in =
      scenario_ledger_inputs(scenario_by_name("contraction_bounded_Dneg_z075"));
  ConstantsLedger lg = constants_ledger(in);
  REQUIRE(lg.admissible.ok);
  const double b1 = hp_bound(lg, 1e3, 0.05);
  const double b2 = hp_bound(lg, 1e5, 0.05);
  const double slope = std::log(b2 / b1) / std::log(1e2);
  CHECK(slope < -0.5);  // -z plus log slack
  CHECK(slope > -1.0);

  // D > 0, z <= 1/2 has no shape curve.
  LedgerInputs bad = in;
  bad.nb.A1 = 0.6;
  bad.nb.A3 = 0.9;
  bad.sch = sched(bad.sch.alpha, bad.sch.h, 0.5);
  ConstantsLedger lgbad = constants_ledger(bad);
  CHECK_THROWS_AS(hp_bound(lgbad, 100.0, 0.1), RegimeUnsupported);
}

TEST_CASE("unbounded-noise curve: bounded reduction and budget split") {
  Scenario sc = scenario_by_name("unbounded_subweibull");
  LedgerInputs in = scenario_ledger_inputs(sc);
  REQUIRE(in.nb.gamma_c.has_value());

  // A bounded model with zero tail bias reduces to the half-confidence
  // bounded-noise curve.
  NoiseModel ball = NoiseModel::bounded_ball(in.nb.B2 / 2.0, 1);
  const long T = 1000;
  LedgerInputs twice = in;
  twice.nb.B2 = 2.0 * quantile_B(ball, 0.1 / (2.0 * T));
  ConstantsLedger lg = constants_ledger(twice);
  for (double k : {10.0, 500.0}) {
    CHECK(hp_bound_unbounded(in, ball, k, 0.1, T) ==
          doctest::Approx(hp_bound(lg, k, 0.05)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(hp_bound_unbounded(in, ball, 2000.0, 0.1, T),
                  HorizonExceeded);

  // Heavier tails enlarge the curve (B(delta/2T) grows).
  NoiseModel sw = NoiseModel::sub_weibull(1.0, 2.0, 1.0, 1);
  CHECK(hp_bound_unbounded(in, sw, 100.0, 0.01, T) >
        hp_bound_unbounded(in, sw, 100.0, 0.1, T));
}

TEST_CASE("averaged-iterate shape bound") {
  LedgerInputs in = scenario_ledger_inputs(scenario_by_name("polyak_iid"));
  ConstantsLedger lg = constants_ledger(in);
  const double z = in.sch.z;
  REQUIRE(z < 1.0);
  // D < 0: dependence on delta is exactly through log(1/delta) in both terms.
  const double k = 1e4;
  const double d1 = polyak_bound(lg, z, k, 0.1);
  const double d2 = polyak_bound(lg, z, k, 0.01);
  const double expo = std::min(2.0 * z, 2.0 - z);
  const double L1 = std::log(10.0), L2 = std::log(100.0);
  const double predicted =
      lg.c_bar1 * (L2 - L1) / k +
      lg.a_bar1 * (L2 * L2 - L1 * L1) / std::pow(k, expo);
  CHECK(d2 - d1 == doctest::Approx(predicted).epsilon(1e-10));
  // z = 0.5 exponent arithmetic: min(1, 1.5) = 1, so both terms scale as 1/k.
  CHECK(std::min(2.0 * 0.5, 2.0 - 0.5) == doctest::Approx(1.0));
  CHECK_THROWS_AS(polyak_bound(lg, 1.0, k, 0.1), RegimeUnsupported);
  CHECK_THROWS_AS(polyak_bound(lg, z, 0.0, 0.1), BadParams);
}

TEST_CASE("counterexample lower-bound arithmetic") {
  CounterexampleParams p;
  p.a = 0.5;
  p.b = 1.0;
  p.N = 0.5;
  p.x0 = 1.0;
  p.sch = sched(1.0, 2.0, 1.0);

  // All-(a+N) path probability (2-a)^-k: a = 0.5, k = 2 gives 4/9.
  CounterexampleLower lb = counterexample_lower_mgf(p, 2, 0.0, 1.1);
  CHECK(lb.prob == doctest::Approx(4.0 / 9.0).epsilon(1e-15));
  // Deterministic path value 1 + 0.5 (1/2 + 1/3) = 17/12.
  CHECK(lb.path_value == doctest::Approx(17.0 / 12.0).epsilon(1e-15));
  // lambda = 0: the MGF lower bound collapses to the path probability.
  CHECK(lb.mgf_lower == doctest::Approx(lb.prob).epsilon(1e-15));

  // Parameter validation.
  CounterexampleParams bad = p;
  bad.N = 0.4;  // part 1 needs N = 1 - a
  CHECK_THROWS_AS(counterexample_lower_mgf(bad, 2, 0.0, 1.1), BadParams);
  bad = p;
  bad.b = 0.5;
  CHECK_THROWS_AS(counterexample_lower_mgf(bad, 2, 0.0, 1.1), BadParams);

  // Part 2 grows multiplicatively.
  CounterexampleParams p2;
  p2.a = 0.5;
  p2.b = 0.0;
  p2.N = 0.7;
  p2.x0 = 1.0;
  p2.sch = sched(1.0, 8.0, 1.0);
  CounterexampleLower q1 = counterexample_lower_mgf(p2, 4, 0.0, 1.1);
  double prod = 1.0;
  for (long i = 0; i < 4; ++i) prod *= 1.0 + (0.2) / (i + 8.0);
  CHECK(q1.path_value == doctest::Approx(prod).epsilon(1e-14));
}
