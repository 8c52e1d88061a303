#include "saconc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace saconc {

namespace {

constexpr double kExpCap = 700.0;  // exp() overflow guard for MGF estimates

std::shared_ptr<const MarkovChain> two_state_chain() {
  Eigen::MatrixXd P(2, 2);
  P << 0.6, 0.4, 0.4, 0.6;
  return std::make_shared<const MarkovChain>(P);
}

std::shared_ptr<const MarkovChain> iid_two_state_chain() {
  Eigen::MatrixXd P(2, 2);
  P << 0.5, 0.5, 0.5, 0.5;
  return std::make_shared<const MarkovChain>(P);
}

std::shared_ptr<const MarkovChain> three_state_chain() {
  Eigen::MatrixXd P(3, 3);
  P << 0.7, 0.2, 0.1, 0.1, 0.8, 0.1, 0.25, 0.25, 0.5;
  return std::make_shared<const MarkovChain>(P);
}

EnvelopeConstants env_for(const ProblemSpec& spec) {
  const double gc = spec.bounds.gamma_c.value_or(0.0);
  const double l_cs = spec.norm_c.l_cs(spec.dim);
  const double u_cs = spec.norm_c.u_cs(spec.dim);
  const double mu = choose_mu(gc, l_cs, u_cs);
  return envelope_constants(gc, mu, 1.0, l_cs, u_cs);
}

// Smallest h satisfying every step-size side condition; C1 does not depend on
// h, so one trial ledger suffices.
double admissible_h(const ProblemSpec& spec, const NoiseModel& model,
                    double alpha, double z, double x0_error) {
  LedgerInputs in;
  in.nb = spec.bounds;
  if (model.bounded()) in.nb.B2 = model.B2;
  in.env = env_for(spec);
  in.sch = StepSchedule(alpha, 8.0, z);
  in.x0_error = x0_error;
  in.xstar_norm = spec.norm_c(spec.x_star);
  const ConstantsLedger led = constants_ledger(in);
  const EnvelopeConstants& e = in.env;
  double h = std::max(
      {8.0, 4.0 * led.C1 / (e.eta * alpha), e.eta / (2.0 * alpha),
       e.u * e.L_s * (in.nb.L1 + in.nb.L2) / (e.l_cs * e.l_cs * alpha)});
  if (z < 1.0) {
    h = std::max(h, std::pow(4.0 * z / (alpha * e.eta), 1.0 / (1.0 - z)));
  }
  return std::ceil(h) + 1.0;
}

std::string regime_tag(double z, double D) {
  std::ostringstream os;
  os << "z=" << z << ",D" << (D > 0.0 ? ">0" : (D == 0.0 ? "=0" : "<0"));
  return os.str();
}

Scenario make_contraction_scenario(const std::string& name, double rho,
                                   double z, long horizon, bool rate) {
  auto chain = two_state_chain();
  Eigen::VectorXd slopes(2), intercepts(2);
  slopes << 0.5 - rho, 0.5 + rho;
  intercepts << 0.4, 0.6;
  Scenario sc;
  sc.name = name;
  sc.kind = Scenario::Kind::Coverage;
  sc.spec = make_contraction_demo(chain, slopes, intercepts);
  sc.model = NoiseModel::bounded_ball(0.5, 1);
  sc.horizon = horizon;
  sc.x0 = sc.spec.x_star + Eigen::VectorXd::Constant(1, 1.0);
  const EnvelopeConstants env = env_for(sc.spec);
  const double alpha = (z == 1.0) ? 5.0 / env.eta : 1.5;
  const double h =
      admissible_h(sc.spec, sc.model, alpha, z,
                   sc.spec.norm_c(sc.x0 - sc.spec.x_star));
  sc.sch = StepSchedule(alpha, h, z);
  sc.regime = regime_tag(z, sc.spec.bounds.D());
  sc.check_rate = rate;
  sc.rate_window_lo = 1e3;
  sc.rate_window_hi = static_cast<double>(horizon);
  sc.description = "scalar state-modulated contraction, bounded noise";
  return sc;
}

// One simulated counterexample path value at each grid point; arg transform
// selected by part (squared-scale vs log-scale).
void counterexample_mgf(const Scenario& sc, long n_paths,
                        std::uint64_t master_seed, std::vector<double>& mgf) {
  const CounterexampleParams& p = sc.cx;
  const long kmax = sc.cx_grid.empty() ? 0 : sc.cx_grid.back();
  mgf.assign(sc.cx_grid.size(), 0.0);
  const double p_high = 1.0 / (p.N + 1.0);
  for (long path = 0; path < n_paths; ++path) {
    Rng rng = Rng::stream(master_seed, static_cast<std::uint64_t>(path));
    double x = p.x0;
    std::size_t gi = 0;
    for (long k = 0; k <= kmax; ++k) {
      if (gi < sc.cx_grid.size() && sc.cx_grid[gi] == k) {
        const double inner =
            std::pow(static_cast<double>(k) + p.sch.h, p.sch.z) * x * x;
        double arg;
        if (sc.cx_log_arg) {
          arg = std::max(0.0, std::log(std::max(inner, 1e-300)));
        } else {
          arg = inner;
        }
        const double expo =
            std::min(sc.cx_lambda * std::pow(arg, sc.cx_beta), kExpCap);
        mgf[gi] += std::exp(expo);
        ++gi;
      }
      if (k == kmax) break;
      const double a = p.sch.step(static_cast<double>(k));
      const double S = (rng.uniform() < p_high) ? p.a + p.N : p.a;
      x = (1.0 + (S - 1.0) * a) * x + a * (S - p.a) * p.b;
    }
  }
  for (auto& m : mgf) m /= static_cast<double>(n_paths);
}

bool cmp_apply(double value, double threshold, const std::string& cmp) {
  if (cmp == "<=") return value <= threshold;
  if (cmp == "<") return value < threshold;
  if (cmp == ">=") return value >= threshold;
  if (cmp == ">") return value > threshold;
  if (cmp == "==") return value == threshold;
  if (cmp == "!=") return value != threshold;
  throw BadParams("unknown comparator \"" + cmp + "\"");
}

OracleCheck oracle(const std::string& name, double value, double threshold,
                   const std::string& cmp) {
  OracleCheck c;
  c.name = name;
  c.value = value;
  c.threshold = threshold;
  c.cmp = cmp;
  c.pass = cmp_apply(value, threshold, cmp);
  return c;
}

}  // namespace

std::vector<Scenario> scenario_catalog() {
  std::vector<Scenario> cat;

  {
    Scenario sc;
    sc.name = "stationary_mean";
    sc.kind = Scenario::Kind::Coverage;
    Eigen::VectorXd f(3);
    f << 0.0, 1.0, 2.0;
    sc.spec = make_stationary_mean(three_state_chain(), f);
    sc.model = NoiseModel::bounded_ball(0.5, 1);
    sc.horizon = 10000;
    sc.x0 = sc.spec.x_star + Eigen::VectorXd::Constant(1, 1.0);
    const EnvelopeConstants env = env_for(sc.spec);
    const double alpha = 5.0 / env.eta;
    const double h = admissible_h(sc.spec, sc.model, alpha, 1.0, 1.0);
    sc.sch = StepSchedule(alpha, h, 1.0);
    sc.regime = regime_tag(1.0, sc.spec.bounds.D());
    sc.check_rate = true;
    sc.rate_window_lo = 1e3;
    sc.rate_window_hi = 1e4;
    sc.description = "running estimate of a stationary mean over a 3-state chain";
    cat.push_back(sc);
  }

  {
    Scenario sc;
    sc.name = "linear_sa_markov";
    sc.kind = Scenario::Kind::Coverage;
    auto chain = three_state_chain();
    Eigen::MatrixXd A0(2, 2);
    A0 << -1.0, 0.2, 0.0, -0.5;
    Eigen::MatrixXd E0(2, 2), E1(2, 2);
    E0 << 0.3, 0.0, 0.0, -0.2;
    E1 << -0.1, 0.1, 0.2, 0.0;
    const Eigen::VectorXd& pi = chain->pi();
    Eigen::MatrixXd E2 = -(pi(0) * E0 + pi(1) * E1) / pi(2);
    std::vector<Eigen::MatrixXd> As = {A0 + E0, A0 + E1, A0 + E2};
    Eigen::VectorXd b0(2), b1(2), b2(2);
    b0 << 1.0, 0.0;
    b1 << 0.0, 1.0;
    b2 << 0.5, 0.5;
    std::vector<Eigen::VectorXd> bs = {b0, b1, b2};
    Eigen::VectorXd b_bar = pi(0) * b0 + pi(1) * b1 + pi(2) * b2;
    LinearSAProblem lin = make_linear_sa(A0, b_bar, As, bs, *chain);
    sc.spec = linear_sa_spec(chain, lin);
    sc.check_lyapunov = true;
    sc.lyapunov_residual =
        (A0.transpose() * lin.P_bar + lin.P_bar * A0 +
         Eigen::MatrixXd::Identity(2, 2))
            .cwiseAbs()
            .maxCoeff();
    sc.model = NoiseModel::bounded_ball(0.2, 2);
    sc.horizon = 10000;
    sc.x0 = sc.spec.x_star + Eigen::VectorXd::Constant(2, 1.0);
    const EnvelopeConstants env = env_for(sc.spec);
    const double alpha = 5.0 / env.eta;
    const double h =
        admissible_h(sc.spec, sc.model, alpha, 1.0,
                     sc.spec.norm_c(sc.x0 - sc.spec.x_star));
    sc.sch = StepSchedule(alpha, h, 1.0);
    sc.regime = regime_tag(1.0, sc.spec.bounds.D());
    sc.description = "2-d linear SA over a 3-state chain, P_bar-weighted norm";
    cat.push_back(sc);
  }

  cat.push_back(make_contraction_scenario("contraction_bounded_Dneg_z1", 0.2,
                                          1.0, 100000, true));
  cat.push_back(make_contraction_scenario("contraction_bounded_Dzero_z1", 0.5,
                                          1.0, 10000, false));
  cat.push_back(make_contraction_scenario("contraction_bounded_Dpos_z1", 0.7,
                                          1.0, 100000, false));
  cat.push_back(make_contraction_scenario("contraction_bounded_Dneg_z075", 0.2,
                                          0.75, 100000, true));
  cat.push_back(make_contraction_scenario("contraction_bounded_Dzero_z075",
                                          0.5, 0.75, 10000, false));
  cat.push_back(make_contraction_scenario("contraction_bounded_Dpos_z075", 0.7,
                                          0.75, 10000, false));

  for (int pareto = 0; pareto < 2; ++pareto) {
    Scenario sc;
    sc.name = pareto ? "unbounded_subpareto" : "unbounded_subweibull";
    sc.kind = Scenario::Kind::Unbounded;
    auto chain = two_state_chain();
    Eigen::VectorXd slopes(2), intercepts(2);
    slopes << 0.5, 0.5;
    intercepts << 0.4, 0.6;
    sc.spec = make_contraction_demo(chain, slopes, intercepts);
    sc.model = pareto ? NoiseModel::sub_pareto(1.0, 2.5, 1)
                      : NoiseModel::sub_weibull(1.0, 2.0, 1.0, 1);
    sc.horizon = 10000;
    sc.trunc_T = sc.horizon;
    sc.x0 = sc.spec.x_star + Eigen::VectorXd::Constant(1, 1.0);
    const EnvelopeConstants env = env_for(sc.spec);
    const double alpha = 5.0 / env.eta;
    const double h = admissible_h(sc.spec, sc.model, alpha, 1.0, 1.0);
    sc.sch = StepSchedule(alpha, h, 1.0);
    sc.regime = regime_tag(1.0, sc.spec.bounds.D());
    sc.description = pareto ? "contraction with sub-Pareto additive noise"
                            : "contraction with sub-Weibull additive noise";
    cat.push_back(sc);
  }

  {
    Scenario sc;
    sc.name = "polyak_iid";
    sc.kind = Scenario::Kind::Polyak;
    auto chain = iid_two_state_chain();
    Eigen::VectorXd slopes(2), intercepts(2);
    slopes << 0.5, 0.5;
    intercepts << 0.3, 0.7;
    sc.spec = make_contraction_demo(chain, slopes, intercepts);
    sc.spec.iid_noise = true;
    sc.model = NoiseModel::bounded_ball(0.3, 1);
    sc.horizon = 10000;
    sc.x0 = sc.spec.x_star + Eigen::VectorXd::Constant(1, 1.0);
    const double alpha = 1.5;
    const double h = admissible_h(sc.spec, sc.model, alpha, 0.75, 1.0);
    sc.sch = StepSchedule(alpha, h, 0.75);
    sc.regime = regime_tag(0.75, sc.spec.bounds.D());
    sc.description = "averaged iterates, i.i.d. states, z = 0.75";
    cat.push_back(sc);
  }

  {
    Scenario sc;
    sc.name = "counterexample_part1";
    sc.kind = Scenario::Kind::Counterexample;
    sc.cx.a = 0.5;
    sc.cx.b = 1.0;
    sc.cx.N = 0.5;  // = 1 - a
    sc.cx.x0 = 1.0;
    sc.cx.sch = StepSchedule(1.0, 8.0, 1.0);
    sc.spec = make_scalar_counterexample(sc.cx.a, sc.cx.b, sc.cx.N);
    sc.model = NoiseModel::point_mass(1);
    sc.sch = sc.cx.sch;
    sc.cx_lambda = 0.01;
    sc.cx_beta = 1.0 / (2.0 - sc.cx.sch.z) + 0.1;
    sc.cx_grid = {10, 20, 40, 80};
    sc.horizon = sc.cx_grid.back();
    sc.x0 = Eigen::VectorXd::Constant(1, sc.cx.x0);
    sc.regime = "counterexample";
    sc.inadmissible_by_design = true;
    sc.description = "two-point lower-bound construction, additive part";
    cat.push_back(sc);
  }

  {
    Scenario sc;
    sc.name = "counterexample_part2";
    sc.kind = Scenario::Kind::Counterexample;
    sc.cx.a = 0.5;
    sc.cx.b = 0.0;
    sc.cx.N = 0.7;  // > 1 - a
    sc.cx.x0 = 1.0;
    sc.cx.sch = StepSchedule(1.0, 8.0, 1.0);
    sc.spec = make_scalar_counterexample(sc.cx.a, sc.cx.b, sc.cx.N);
    sc.model = NoiseModel::point_mass(1);
    sc.sch = sc.cx.sch;
    sc.cx_lambda = 0.5;
    sc.cx_beta = 1.0 / (2.0 - sc.cx.sch.z) + 0.1;
    sc.cx_log_arg = true;
    sc.cx_grid = {10, 20, 40, 80};
    sc.horizon = sc.cx_grid.back();
    sc.x0 = Eigen::VectorXd::Constant(1, sc.cx.x0);
    sc.regime = "counterexample";
    sc.inadmissible_by_design = true;
    sc.description = "two-point lower-bound construction, multiplicative part";
    cat.push_back(sc);
  }

  return cat;
}

Scenario scenario_by_name(const std::string& name) {
  for (auto& sc : scenario_catalog()) {
    if (sc.name == name) return sc;
  }
  throw BadConfig("unknown scenario \"" + name + "\"");
}

LedgerInputs scenario_ledger_inputs(const Scenario& sc) {
  LedgerInputs in;
  in.nb = sc.spec.bounds;
  if (sc.model.bounded()) in.nb.B2 = sc.model.B2;
  in.env = env_for(sc.spec);
  in.sch = sc.sch;
  in.x0_error = sc.spec.norm_c(sc.x0 - sc.spec.x_star);
  in.xstar_norm = sc.spec.norm_c(sc.spec.x_star);
  return in;
}

std::pair<double, double> loglog_slope(const std::vector<double>& logk,
                                       const std::vector<double>& logq) {
  const std::size_t n = logk.size();
  if (n < 3 || logq.size() != n) throw BadParams("need >= 3 fit points");
  double xm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xm += logk[i];
    ym += logq[i];
  }
  xm /= n;
  ym /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (logk[i] - xm) * (logk[i] - xm);
    sxy += (logk[i] - xm) * (logq[i] - ym);
  }
  if (sxx == 0.0) throw BadParams("degenerate fit window");
  const double slope = sxy / sxx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = logq[i] - ym - slope * (logk[i] - xm);
    ssr += r * r;
  }
  const double se = std::sqrt(ssr / (static_cast<double>(n) - 2.0) / sxx);
  return {slope, se};
}

ValidationReport run_validation(const Scenario& sc, long n_paths,
                                std::uint64_t master_seed, int workers,
                                double bound_scale) {
  if (n_paths < 1) throw BadParams("need n_paths >= 1");
  ValidationReport rep;
  rep.scenario = sc.name;
  rep.regime = sc.regime;
  rep.n_paths = n_paths;
  rep.master_seed = master_seed;
  rep.horizon = sc.horizon;
  rep.inadmissible_by_design = sc.inadmissible_by_design;

  if (sc.kind == Scenario::Kind::Counterexample) {
    rep.ledger = nlohmann::json::object();
    rep.admissible = false;
    std::vector<double> mgf;
    counterexample_mgf(sc, n_paths, master_seed, mgf);
    for (std::size_t i = 0; i + 1 < sc.cx_grid.size(); ++i) {
      std::ostringstream name;
      name << "mgf_increase_k" << sc.cx_grid[i] << "_to_k" << sc.cx_grid[i + 1];
      rep.oracles.push_back(oracle(name.str(), mgf[i + 1] - mgf[i], 0.0, ">"));
    }
    for (std::size_t i = 0; i < sc.cx_grid.size(); ++i) {
      const CounterexampleLower lb = counterexample_lower_mgf(
          sc.cx, sc.cx_grid[i], sc.cx_lambda, sc.cx_beta);
      std::ostringstream name;
      name << "mgf_above_lower_bound_k" << sc.cx_grid[i];
      rep.oracles.push_back(
          oracle(name.str(), mgf[i] - lb.mgf_lower, 0.0, ">="));
    }
    rep.note =
        "MGF growth on a finite k-grid is consistent with divergence; "
        "non-existence of a uniform bound is not empirically provable";
    rep.pass = rep.recompute_pass();
    return rep;
  }

  const LedgerInputs in = scenario_ledger_inputs(sc);
  const ConstantsLedger led = constants_ledger(in);
  rep.ledger = led.to_json();
  rep.admissible = led.admissible.ok;
  rep.deltas = sc.deltas;

  // Precompute one per-step bound row per confidence level.
  std::vector<std::vector<double>> rows;
  for (double delta : sc.deltas) {
    std::vector<double> row(static_cast<std::size_t>(sc.horizon) + 1);
    for (long k = 0; k <= sc.horizon; ++k) {
      double b;
      switch (sc.kind) {
        case Scenario::Kind::Unbounded:
          b = hp_bound_unbounded(in, sc.model, static_cast<double>(k), delta,
                                 sc.trunc_T);
          break;
        case Scenario::Kind::Polyak:
          b = (k == 0) ? std::numeric_limits<double>::infinity()
                       : polyak_bound(led, sc.sch.z, static_cast<double>(k),
                                      delta);
          break;
        default:
          b = hp_bound(led, static_cast<double>(k), delta);
      }
      row[static_cast<std::size_t>(k)] = b * bound_scale;
    }
    rows.push_back(std::move(row));
  }

  std::vector<long> cps = geometric_checkpoints(sc.sch.h, sc.horizon);

  if (sc.kind == Scenario::Kind::Polyak) {
    // Averaged iterates need the per-path running mean; paths run serially
    // (cheap at validation scale) and deterministically.
    rep.violations.assign(sc.deltas.size(), 0);
    for (long p = 0; p < n_paths; ++p) {
      const std::uint64_t seed =
          Rng::stream_seed(master_seed, static_cast<std::uint64_t>(p));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        Trajectory t = run_polyak(sc.spec, sc.model, sc.sch, sc.x0, sc.horizon,
                                  cps, seed, &rows[r]);
        if (t.sup_ratio > 1.0) ++rep.violations[r];
      }
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
      rep.violation_rate.push_back(static_cast<double>(rep.violations[r]) /
                                   static_cast<double>(n_paths));
      rep.wilson_upper.push_back(wilson_upper_bound(rep.violations[r], n_paths));
    }
  } else {
    McSettings st;
    st.n_paths = n_paths;
    st.master_seed = master_seed;
    st.workers = workers;
    st.horizon = sc.horizon;
    st.checkpoints = cps;
    st.deltas = sc.deltas;
    st.bound_rows = rows;
    McAggregate agg = monte_carlo(sc.spec, sc.model, sc.sch, sc.x0, st);
    rep.violations = agg.violations;
    rep.violation_rate = agg.violation_rate;
    rep.wilson_upper = agg.wilson_upper;

    if (sc.check_rate) {
      std::vector<double> lx, ly;
      const std::size_t q90 = 1;  // quantile_levels = {0.5, 0.9, 0.99}
      for (std::size_t c = 0; c < agg.checkpoints.size(); ++c) {
        const double k = static_cast<double>(agg.checkpoints[c]);
        const double q = agg.quantiles[q90][c];
        if (k >= sc.rate_window_lo && k <= sc.rate_window_hi && q > 0.0 &&
            std::isfinite(q)) {
          lx.push_back(std::log(k));
          ly.push_back(std::log(q));
        }
      }
      rep.has_rate = true;
      rep.rate_expected = -sc.sch.z;
      rep.rate_tol = sc.rate_tol;
      std::tie(rep.rate_slope, rep.rate_stderr) = loglog_slope(lx, ly);
      rep.rate_pass =
          std::abs(rep.rate_slope - rep.rate_expected) <= rep.rate_tol;
    }
  }

  for (std::size_t r = 0; r < rep.deltas.size(); ++r) {
    const double half = rep.wilson_upper[r] - rep.violation_rate[r];
    rep.coverage_pass.push_back(rep.violation_rate[r] <=
                                rep.deltas[r] + half);
  }

  // Scenario-specific oracles.
  const double D = in.nb.D();
  if (sc.regime.find("D<0") != std::string::npos) {
    rep.oracles.push_back(oracle("regime_D", D, 0.0, "<"));
  } else if (sc.regime.find("D=0") != std::string::npos) {
    rep.oracles.push_back(oracle("regime_D", D, 0.0, "=="));
  } else if (sc.regime.find("D>0") != std::string::npos) {
    rep.oracles.push_back(oracle("regime_D", D, 0.0, ">"));
  }
  if (sc.check_lyapunov) {
    rep.oracles.push_back(
        oracle("lyapunov_residual", sc.lyapunov_residual, 1e-10, "<="));
    rep.oracles.push_back(oracle("contraction_P_bar",
                                 sc.spec.bounds.gamma_c.value_or(1.0), 1.0,
                                 "<"));
  }

  rep.pass = rep.recompute_pass();
  return rep;
}

bool ValidationReport::recompute_pass() const {
  bool ok = admissible || inadmissible_by_design;
  for (std::size_t r = 0; r < deltas.size(); ++r) {
    const double half = wilson_upper[r] - violation_rate[r];
    ok = ok && (violation_rate[r] <= deltas[r] + half);
  }
  if (has_rate) ok = ok && (std::abs(rate_slope - rate_expected) <= rate_tol);
  for (const auto& o : oracles) {
    ok = ok && cmp_apply(o.value, o.threshold, o.cmp);
  }
  return ok;
}

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json j;
  j["schema"] = schema;
  j["scenario"] = scenario;
  j["regime"] = regime;
  j["n_paths"] = n_paths;
  j["master_seed"] = master_seed;
  j["horizon"] = horizon;
  j["deltas"] = deltas;
  j["violations"] = violations;
  j["violation_rate"] = violation_rate;
  j["wilson_upper"] = wilson_upper;
  j["coverage_pass"] = coverage_pass;
  j["rate"] = {{"checked", has_rate},
               {"slope", rate_slope},
               {"stderr", rate_stderr},
               {"expected", rate_expected},
               {"tol", rate_tol},
               {"pass", rate_pass}};
  j["ledger"] = ledger;
  nlohmann::json oj = nlohmann::json::array();
  for (const auto& o : oracles) {
    oj.push_back({{"name", o.name},
                  {"value", o.value},
                  {"threshold", o.threshold},
                  {"cmp", o.cmp},
                  {"pass", o.pass}});
  }
  j["oracles"] = oj;
  j["admissible"] = admissible;
  j["inadmissible_by_design"] = inadmissible_by_design;
  if (!note.empty()) j["note"] = note;
  j["pass"] = pass;
  return j;
}

ValidationReport ValidationReport::from_json(const nlohmann::json& j) {
  ValidationReport r;
  r.schema = j.at("schema").get<int>();
  r.scenario = j.at("scenario").get<std::string>();
  r.regime = j.at("regime").get<std::string>();
  r.n_paths = j.at("n_paths").get<long>();
  r.master_seed = j.at("master_seed").get<std::uint64_t>();
  r.horizon = j.at("horizon").get<long>();
  r.deltas = j.at("deltas").get<std::vector<double>>();
  r.violations = j.at("violations").get<std::vector<long>>();
  r.violation_rate = j.at("violation_rate").get<std::vector<double>>();
  r.wilson_upper = j.at("wilson_upper").get<std::vector<double>>();
  r.coverage_pass = j.at("coverage_pass").get<std::vector<bool>>();
  const auto& rt = j.at("rate");
  r.has_rate = rt.at("checked").get<bool>();
  r.rate_slope = rt.at("slope").get<double>();
  r.rate_stderr = rt.at("stderr").get<double>();
  r.rate_expected = rt.at("expected").get<double>();
  r.rate_tol = rt.at("tol").get<double>();
  r.rate_pass = rt.at("pass").get<bool>();
  r.ledger = j.at("ledger");
  for (const auto& o : j.at("oracles")) {
    OracleCheck c;
    c.name = o.at("name").get<std::string>();
    c.value = o.at("value").get<double>();
    c.threshold = o.at("threshold").get<double>();
    c.cmp = o.at("cmp").get<std::string>();
    c.pass = o.at("pass").get<bool>();
    r.oracles.push_back(c);
  }
  r.admissible = j.at("admissible").get<bool>();
  r.inadmissible_by_design = j.at("inadmissible_by_design").get<bool>();
  if (j.contains("note")) r.note = j.at("note").get<std::string>();
  r.pass = j.at("pass").get<bool>();
  return r;
}

ScenarioConfig scenario_config_from_json(const nlohmann::json& j) {
  ScenarioConfig cfg;
  cfg.scenario = scenario_by_name(j.at("scenario").get<std::string>());
  Scenario& sc = cfg.scenario;
  if (j.contains("horizon")) {
    sc.horizon = j.at("horizon").get<long>();
    if (sc.kind == Scenario::Kind::Unbounded) sc.trunc_T = sc.horizon;
    sc.rate_window_hi =
        std::min(sc.rate_window_hi, static_cast<double>(sc.horizon));
  }
  if (j.contains("deltas")) {
    sc.deltas = j.at("deltas").get<std::vector<double>>();
    for (double d : sc.deltas) {
      if (d < 0.01 && j.value("paths", 1000L) < 100000L) {
        throw BadConfig(
            "delta < 0.01 needs paths >= 1e5 for an informative coverage CI");
      }
    }
  }
  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    sc.sch = StepSchedule(s.at("alpha").get<double>(), s.at("h").get<double>(),
                          s.at("z").get<double>());
    if (sc.kind == Scenario::Kind::Counterexample) sc.cx.sch = sc.sch;
  }
  cfg.bound_scale = j.value("bound_scale", 1.0);
  cfg.paths = j.value("paths", 1000L);
  cfg.seed = j.value("seed", std::uint64_t{1});
  cfg.workers = j.value("workers", 1);
  return cfg;
}

}  // namespace saconc
