#include "saconc/bounds.hpp"

#include <cmath>
#include <sstream>

namespace saconc {

namespace {

constexpr double kE = 2.718281828459045;

double log1_over(double delta) { return std::log(1.0 / delta); }

// Sum of step sizes alpha_0 + ... + alpha_{k-1}, via the integral upper bound
// used throughout the analysis.
double step_sum_upper(const StepSchedule& s, double k) {
  if (s.z == 1.0) return s.alpha * std::log((k - 1.0 + s.h) / (s.h - 1.0));
  return s.alpha / (1.0 - s.z) *
         (std::pow(k + s.h - 1.0, 1.0 - s.z) - std::pow(s.h - 1.0, 1.0 - s.z));
}

}  // namespace

StepSchedule::StepSchedule(double alpha_, double h_, double z_)
    : alpha(alpha_), h(h_), z(z_) {
  if (!(alpha > 0.0)) throw BadParams("alpha must be > 0");
  if (!(h >= 8.0)) throw BadParams("h must be >= 8");
  if (!(z > 0.0) || z > 1.0) throw BadParams("z must lie in (0,1]");
}

Admissibility check_admissible(const StepSchedule& sch,
                               const EnvelopeConstants& env, double C1,
                               double L1, double L2) {
  Admissibility v;
  auto fail = [&](const std::string& msg) {
    v.ok = false;
    v.failures.push_back(msg);
  };
  if (sch.z == 1.0) {
    if (!(sch.alpha > 2.0 / env.eta)) {
      fail("z=1 requires alpha > 2/eta = " + std::to_string(2.0 / env.eta));
    }
  } else {
    const double h_min = std::pow(4.0 * sch.z / (sch.alpha * env.eta),
                                  1.0 / (1.0 - sch.z));
    if (!(sch.h >= h_min)) {
      fail("z<1 requires h >= (4z/(alpha eta))^(1/(1-z)) = " +
           std::to_string(h_min));
    }
  }
  const double lcs2 = env.l_cs * env.l_cs;
  const double h_req =
      std::max({4.0 * C1 / (env.eta * sch.alpha), env.eta / (2.0 * sch.alpha),
                env.u * env.L_s * (L1 + L2) / (lcs2 * sch.alpha), 8.0});
  if (!(sch.h >= h_req)) {
    fail("h must be >= max{4C1/(eta alpha), eta/(2 alpha), "
         "u L_s (L1+L2)/(l_cs^2 alpha), 8} = " +
         std::to_string(h_req));
  }
  return v;
}

ConstantsLedger constants_ledger(const LedgerInputs& in) {
  if (!(in.x0_error > 0.0)) {
    throw DegenerateStart(
        "x0 = x* makes theta degenerate; perturb x0_error to a small epsilon");
  }
  const NoiseBounds& nb = in.nb;
  const EnvelopeConstants& e = in.env;
  const StepSchedule& s = in.sch;

  const double A13 = nb.A13();
  const double B123 = nb.B123();
  const double K = nb.A1 * in.xstar_norm + B123;  // recurring drift constant
  const double L1 = nb.L1, L2 = nb.L2;
  const double lcs2 = e.l_cs * e.l_cs;
  const double lcs4 = lcs2 * lcs2;
  const double lmin2 = std::min(e.l_cs, 1.0) * std::min(e.l_cs, 1.0);

  ConstantsLedger out;
  out.in = in;

  out.C1p = A13 * (L1 + L2) + 2.0 * (L1 + L2) + L1 * K;
  out.C2p = (L1 + L2) * K + (1.0 + A13) * L2;
  out.C1 = e.u * e.L_s / (lcs2 * lmin2) *
               ((3.0 / s.alpha + e.eta) * (L1 + L2) +
                (3.0 * L1 + 1.0) * (1.0 + A13) * (1.0 + A13) + out.C1p) +
           e.u * e.L_s * (1.0 + A13) * (1.0 + A13) / lcs2;
  out.C2 = (3.0 / s.alpha + e.eta) * e.L_s * L2 / 4.0 +
           e.L_s / (lcs2 * lmin2) * ((3.0 * L1 + 1.0) * K * K + out.C2p) +
           e.L_s / lcs2 * K * K;
  out.D2 = out.C2 + e.eta * e.L_s * L2 / 4.0;

  const double x0sq = in.x0_error * in.x0_error;
  const double denom =
      e.L_s * e.L_s * e.u * (L1 * L1 * x0sq + L2 * L2 + nb.B2 * nb.B2);
  out.D3 = out.D2 * e.eta * lcs4 / (16.0 * denom);
  out.theta = e.eta * lcs4 * x0sq / (32.0 * denom);

  const double D = nb.D();
  if (D > 0.0) {
    out.a_bar1 = std::pow(1.0 / (s.h - 1.0), 2.0 * s.alpha * D) *
                 std::pow(in.x0_error + K / D, 2.0);
  } else if (D == 0.0) {
    out.a_bar1 = 2.0 * x0sq + 2.0 * K * K * s.alpha * s.alpha;
  } else {
    out.a_bar1 = 2.0 * x0sq + 2.0 * K * K / (D * D);
  }

  out.b_bar1 = e.u * s.alpha / out.theta;

  const double alpha0 = s.step(0);
  const double alpham1 = s.step(-1);
  // Shared bracket of b_bar3 / c_bar3.
  const double bracket = 2.0 * lcs2 * L2 +
                         2.0 * e.u * alpham1 * (L1 + L2) * L2 * e.L_s +
                         lcs2 * alpham1 * e.l * e.L_s * L1 * L1;
  const double b3_scale =
      e.eta * lcs2 * s.alpha /
      (64.0 * e.l * e.L_s * e.L_s * alpha0 * L1 * L1 * L2 * out.theta);
  out.b_bar3 = std::isfinite(b3_scale) ? b3_scale * bracket : 0.0;

  // The z=1 bracket constant folds the b_bar3 term in; its own first term
  // needs alpha > 2/eta to be meaningful.
  const double half_excess = s.alpha * e.eta / 2.0 - 1.0;
  double b2_core = 0.0;
  if (half_excess > 0.0) {
    b2_core = 8.0 * s.alpha * kE * out.theta * out.D2 / (half_excess * x0sq);
  }
  b2_core += 2.0 * e.u * e.L_s * (L1 + L2) * out.theta / (e.l * lcs2);
  out.b_bar2 = e.u * s.alpha / out.theta * b2_core + out.b_bar3;

  out.b_bar4 = s.alpha * s.alpha * out.D3 * e.u / out.theta;

  out.c_bar1 = s.alpha * e.u / out.theta;
  out.c_bar2 = 8.0 * s.alpha * e.u * out.D2 / (e.eta * x0sq) +
               e.u * e.u * e.L_s * (L1 + L2) * s.alpha / (lcs2 * e.l) +
               s.alpha * e.u / out.theta * std::log(M_PI * M_PI / 6.0);
  out.c_bar3 = out.b_bar3;

  out.admissible = check_admissible(s, e, out.C1, L1, L2);
  return out;
}

nlohmann::json ConstantsLedger::to_json() const {
  nlohmann::json j;
  j["inputs"] = {
      {"A1", in.nb.A1},       {"B1", in.nb.B1},
      {"A3", in.nb.A3},       {"B3", in.nb.B3},
      {"B2", in.nb.B2},       {"L1", in.nb.L1},
      {"L2", in.nb.L2},       {"D", in.nb.D()},
      {"B123", in.nb.B123()}, {"alpha", in.sch.alpha},
      {"h", in.sch.h},        {"z", in.sch.z},
      {"x0_error", in.x0_error}, {"xstar_norm", in.xstar_norm},
      {"eta", in.env.eta},    {"mu", in.env.mu},
      {"L_s", in.env.L_s},    {"l", in.env.l},
      {"u", in.env.u},        {"l_cs", in.env.l_cs},
      {"u_cs", in.env.u_cs},
  };
  if (in.nb.gamma_c) j["inputs"]["gamma_c"] = *in.nb.gamma_c;
  if (in.nb.L_F) j["inputs"]["L_F"] = *in.nb.L_F;
  j["constants"] = {
      {"C1_prime", C1p}, {"C2_prime", C2p}, {"C1", C1},       {"C2", C2},
      {"D2", D2},        {"D3", D3},        {"theta", theta},
      {"a_bar1", a_bar1}, {"b_bar1", b_bar1}, {"b_bar2", b_bar2},
      {"b_bar3", b_bar3}, {"b_bar4", b_bar4}, {"c_bar1", c_bar1},
      {"c_bar2", c_bar2}, {"c_bar3", c_bar3},
  };
  j["admissible"] = {{"ok", admissible.ok},
                     {"failures", admissible.failures}};
  return j;
}

BoundCurve worst_case_envelope(const StepSchedule& sch, const NoiseBounds& nb,
                               double x0_error, double xstar_norm) {
  const double D = nb.D();
  const double K = nb.A1 * xstar_norm + nb.B123();
  BoundCurve curve;
  std::ostringstream tag;
  tag << "z=" << sch.z << ",D" << (D > 0 ? ">0" : (D == 0 ? "=0" : "<0"));
  curve.regime = tag.str();
  curve.kind = "almost-sure-envelope";
  curve.envelope = [sch, D, K, x0_error](double k) {
    if (D > 0.0) {
      return std::exp(D * step_sum_upper(sch, k)) * (x0_error + K / D);
    }
    if (D == 0.0) {
      return x0_error + K * step_sum_upper(sch, k);
    }
    return x0_error - K / D;
  };
  auto env = curve.envelope;
  curve.eval = [env](double k, double) {
    const double b = env(k);
    return b * b;
  };
  return curve;
}

double hp_bound(const ConstantsLedger& lg, double k, double delta,
                double beta_shape, double a6) {
  if (!(delta > 0.0) || delta > 1.0) throw InvalidGamma("delta must be in (0,1]");
  const StepSchedule& s = lg.in.sch;
  const double D = lg.in.nb.D();
  const double L = log1_over(delta);

  if (s.z == 1.0) {
    const double logk = std::log((k - 1.0 + s.h) / (s.h - 1.0));
    const double bracket =
        lg.b_bar1 * L + lg.b_bar2 +
        lg.b_bar4 * std::log((k + s.h - 1.0) / (s.h - 1.0));
    if (D <= 0.0) {
      const double clamp = std::max(1.0, logk * logk);
      return lg.a_bar1 * clamp / (k + s.h - 1.0) * bracket;
    }
    const double lead = std::pow(lg.b_bar1 * L + lg.b_bar2, 2.0 * s.alpha * D);
    return lg.a_bar1 * lead / (k + s.h - 1.0) * bracket;
  }

  // z < 1: bootstrap curve with the worst-case bounding sequence B^2
  // supplied per regime.
  const double z = s.z;
  auto bootstrap = [&](double Bsq) {
    const double decay =
        std::exp(-lg.in.env.eta * s.alpha / (2.0 * (1.0 - z)) *
                 (std::pow(k + s.h, 1.0 - z) - std::pow(s.h, 1.0 - z)));
    return Bsq / std::pow(k + s.h - 1.0, z) *
           (lg.c_bar1 * L + 2.0 * lg.c_bar1 * std::log(k + 1.0) + lg.c_bar2 +
            lg.c_bar3 * decay);
  };

  if (D < 0.0) {
    return bootstrap(lg.a_bar1);
  }

  if (D == 0.0) {
    // Constructed scale: intersect the flat worst-case growth with the
    // bootstrap ball curve; the ball radius solves the fixed point
    //   B^2 = (a6/(1-z)) (d1 B^2 log(1/delta) + d1 d2 B^2 log(d1 B^2
    //   log(1/delta)))^(1-z),  d1 = 2 c_bar1 (1-z)/a6, d2 = 2.
    if (a6 <= 0.0) {
      const double K = lg.in.nb.A1 * lg.in.xstar_norm + lg.in.nb.B123();
      a6 = s.alpha * K;  // coefficient of the D=0 worst-case envelope growth
      if (a6 <= 0.0) a6 = 1.0;
    }
    const double d1 = 2.0 * lg.c_bar1 * (1.0 - z) / a6;
    const double d2 = 2.0;
    double Bsq = 1.0;
    for (int it = 0; it < 200; ++it) {
      const double inner = d1 * Bsq * L +
                           d1 * d2 * Bsq * std::log(std::max(d1 * Bsq * L, kE));
      const double next = a6 / (1.0 - z) * std::pow(inner, 1.0 - z);
      if (std::abs(next - Bsq) <= 1e-12 * std::max(1.0, Bsq)) {
        Bsq = next;
        break;
      }
      Bsq = next;
    }
    return std::min(Bsq, bootstrap(Bsq));
  }

  // D > 0, z < 1.
  if (z <= 0.5) {
    throw RegimeUnsupported("no shape curve for z <= 1/2 with D > 0");
  }
  if (!(beta_shape > 0.0) || beta_shape >= 1.0) {
    throw BadParams("beta_shape must lie in (0,1)");
  }
  // Ball radius B^2 = exp(log(1/delta)^((1-z)/(beta z))) / log(1/delta). The
  // deterministic envelope holds surely, so the curve is its square clamped
  // pointwise by the bootstrap ball bound; the crossover plays the role of
  // the intersection step k1 of the exponential and ball curves.
  const double Lc = std::max(L, 1e-6);
  const double Bsq = std::exp(std::pow(Lc, (1.0 - z) / (beta_shape * z))) / Lc;
  const double D_here = lg.in.nb.D();  // A13 - 1 = D here
  const double K = lg.in.nb.A1 * lg.in.xstar_norm + lg.in.nb.B123();
  const double a_bar2 = lg.in.x0_error + K / D_here;
  const double grow = D_here * s.alpha / (1.0 - z) *
                      (std::pow(k + s.h - 1.0, 1.0 - z) -
                       std::pow(s.h - 1.0, 1.0 - z));
  const double env = a_bar2 * std::exp(grow);
  return std::min(env * env, bootstrap(Bsq));
}

double hp_bound_unbounded(const LedgerInputs& base, const NoiseModel& model,
                          double k, double delta, long T) {
  if (k > static_cast<double>(T)) {
    throw HorizonExceeded("k exceeds the truncation horizon T");
  }
  if (!base.nb.gamma_c) {
    throw MissingLipschitz("unbounded-noise bound needs the contractive case");
  }
  const double gamma_tail = delta / (2.0 * static_cast<double>(T));
  LedgerInputs in = base;
  in.nb.B2 = 2.0 * quantile_B(model, gamma_tail);
  ConstantsLedger lg = constants_ledger(in);
  const double g = truncation_bias_g(model, gamma_tail, *base.nb.gamma_c);
  return hp_bound(lg, k, delta / 2.0) + 2.0 * g * g;
}

double polyak_bound(const ConstantsLedger& lg, double z, double k,
                    double delta, double beta_shape) {
  if (z >= 1.0) throw RegimeUnsupported("averaged-iterate bound needs z < 1");
  if (!(k >= 1.0)) throw BadParams("k must be >= 1");
  const double L = log1_over(delta);
  const double D = lg.in.nb.D();
  double f;
  if (D < 0.0) {
    f = L;
  } else if (D == 0.0) {
    f = std::pow(L, 1.0 / z);
  } else {
    if (!(beta_shape > 0.0) || beta_shape >= 1.0) {
      throw BadParams("beta_shape must lie in (0,1)");
    }
    f = std::exp(std::pow(L, (1.0 - z) / (beta_shape * z)));
  }
  // Leading scales from the ledger: the 1/k term carries the bootstrap
  // constant c_bar1, the f^2 term the starting-ball constant a_bar1.
  const double expo = std::min(2.0 * z, 2.0 - z);
  return lg.c_bar1 * L / k + lg.a_bar1 * f * f / std::pow(k, expo);
}

CounterexampleLower counterexample_lower_mgf(const CounterexampleParams& p,
                                             long k, double lambda,
                                             double beta) {
  if (!(p.a > 0.0) || !(p.a < 1.0)) throw BadParams("a must lie in (0,1)");
  const bool part1 = (p.b == 1.0);
  if (part1) {
    if (std::abs(p.N - (1.0 - p.a)) > 1e-12) {
      throw BadParams("part 1 requires N = 1 - a");
    }
  } else if (p.b == 0.0) {
    if (!(p.N > 1.0 - p.a)) throw BadParams("part 2 requires N > 1 - a");
  } else {
    throw BadParams("only b = 1 (part 1) and b = 0 (part 2) are constructed");
  }
  const StepSchedule& s = p.sch;
  CounterexampleLower out;
  out.prob = std::pow(1.0 / (p.N + 1.0), static_cast<double>(k));

  if (part1) {
    // Along the all-(a+N) path, S = 1 so the multiplier is exactly 1 and the
    // iterate accumulates alpha_i (1 - a).
    double sum = 0.0;
    for (long i = 0; i < k; ++i) sum += s.step(static_cast<double>(i));
    out.path_value = p.x0 + (1.0 - p.a) * sum;
    const double kh = std::pow(k + s.h, s.z);
    out.mgf_lower =
        out.prob *
        std::exp(lambda * std::pow(kh * out.path_value * out.path_value, beta));
    // Integral lower bound on the step sum.
    double sum_lb;
    if (s.z == 1.0) {
      sum_lb = s.alpha * std::log((k + s.h) / s.h);
    } else {
      sum_lb = s.alpha / (1.0 - s.z) *
               (std::pow(k + s.h, 1.0 - s.z) - std::pow(s.h, 1.0 - s.z));
    }
    const double v = p.x0 + (1.0 - p.a) * sum_lb;
    out.mgf_lower_integral =
        out.prob * std::exp(lambda * std::pow(kh * v * v, beta));
    return out;
  }

  // Part 2: pure multiplicative growth along the all-(a+N) path.
  double prod = 1.0;
  for (long i = 0; i < k; ++i) {
    prod *= 1.0 + s.step(static_cast<double>(i)) * (p.a + p.N - 1.0);
  }
  out.path_value = p.x0 * prod;
  const double inner = std::pow(k + s.h, s.z) * out.path_value * out.path_value;
  out.mgf_lower =
      out.prob * std::exp(lambda * std::pow(std::log(inner), beta));
  out.mgf_lower_integral = out.mgf_lower;
  return out;
}

}  // namespace saconc
