#include "saconc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace saconc {

namespace {

constexpr double kOverflowGuard = 1e300;

// Start state sampled from the stationary distribution (inverse CDF).
int stationary_start(const MarkovChain& chain, Rng& rng) {
  const double v = rng.uniform();
  double acc = 0.0;
  const int n = chain.n_states();
  for (int s = 0; s < n; ++s) {
    acc += chain.pi()(s);
    if (v <= acc) return s;
  }
  return n - 1;
}

struct StepContext {
  const ProblemSpec* spec;
  const NoiseModel* model;
  StepSchedule sch;
  long T = 0;
  const std::vector<long>* checkpoints;
  // One or more per-step squared-error bound rows to audit against.
  std::vector<const std::vector<double>*> bound_rows;
};

// Core recursion shared by all run_* entry points. `mutate` lets callers
// post-process the iterate (projection); `noise` supplies Z_k. Returns
// per-row violation flags through `violated`.
template <typename NoiseFn, typename MutateFn, typename ErrorPointFn>
Trajectory run_core(const StepContext& ctx, const Eigen::VectorXd& x0,
                    std::uint64_t seed, NoiseFn&& noise, MutateFn&& mutate,
                    ErrorPointFn&& error_point, std::vector<bool>* violated) {
  const ProblemSpec& spec = *ctx.spec;
  Trajectory traj;
  traj.seed = seed;
  traj.checkpoints = *ctx.checkpoints;
  traj.errors_sq.assign(traj.checkpoints.size(),
                        std::numeric_limits<double>::quiet_NaN());
  if (violated) violated->assign(ctx.bound_rows.size(), false);

  Rng rng(seed);
  int s = stationary_start(*spec.chain, rng);
  Eigen::VectorXd x = x0;
  Eigen::VectorXd fx(spec.dim), z(spec.dim), diff(spec.dim);
  std::size_t next_cp = 0;

  for (long k = 0; k <= ctx.T; ++k) {
    // Audit the current iterate (preallocated diff keeps the loop
    // allocation-free).
    diff = error_point(x, k);
    diff -= spec.x_star;
    const double err = spec.norm_c(diff);
    const double err_sq = err * err;
    if (!std::isfinite(err_sq) || err > kOverflowGuard) {
      traj.nonfinite = true;
      traj.nonfinite_step = k;
      break;
    }
    if (next_cp < traj.checkpoints.size() && traj.checkpoints[next_cp] == k) {
      traj.errors_sq[next_cp] = err_sq;
      ++next_cp;
    }
    for (std::size_t r = 0; r < ctx.bound_rows.size(); ++r) {
      const double bound = (*ctx.bound_rows[r])[static_cast<std::size_t>(k)];
      const double ratio = err_sq / bound;
      if (r == 0) traj.sup_ratio = std::max(traj.sup_ratio, ratio);
      if (violated && ratio > 1.0) (*violated)[r] = true;
    }
    if (k == ctx.T) break;

    const double a = ctx.sch.step(static_cast<double>(k));
    spec.F(x, s, fx);
    noise(rng, z);
    // x <- x + alpha (F(x, S) + Z - x)
    x *= (1.0 - a);
    x += a * (fx + z);
    mutate(x, traj);
    s = step_state(*spec.chain, s, rng);
  }
  // A non-finite blow-up counts as a violation of every audited bound, and
  // unreached checkpoints record an infinite error.
  if (traj.nonfinite) {
    if (violated) violated->assign(ctx.bound_rows.size(), true);
    traj.sup_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t c = next_cp; c < traj.errors_sq.size(); ++c) {
      traj.errors_sq[c] = std::numeric_limits<double>::infinity();
    }
  }
  return traj;
}

Eigen::VectorXd project_to_ball(const Eigen::VectorXd& x,
                                const Eigen::VectorXd& center, double radius,
                                const Norm& norm, bool* hit) {
  Eigen::VectorXd d = x - center;
  if (norm.kind == Norm::Kind::Sup) {
    Eigen::VectorXd clipped = d.cwiseMax(-radius).cwiseMin(radius);
    *hit = (clipped - d).cwiseAbs().maxCoeff() > 0.0;
    return center + clipped;
  }
  const double r = norm(d);
  if (r <= radius) {
    *hit = false;
    return x;
  }
  *hit = true;
  return center + d * (radius / r);
}

}  // namespace

std::vector<long> geometric_checkpoints(double h, long T) {
  std::vector<long> cps;
  double v = h;
  long prev = -1;
  while (true) {
    long c = static_cast<long>(std::ceil(v));
    if (c >= T) break;
    if (c != prev) cps.push_back(c);
    prev = c;
    v *= 1.5;
  }
  cps.push_back(T);
  return cps;
}

Trajectory run_sa(const ProblemSpec& spec, const NoiseModel& model,
                  const StepSchedule& sch, const Eigen::VectorXd& x0, long T,
                  const std::vector<long>& checkpoints, std::uint64_t seed,
                  const std::vector<double>* reference_curve) {
  StepContext ctx{&spec, &model, sch, T, &checkpoints, {}};
  if (reference_curve) ctx.bound_rows.push_back(reference_curve);
  const NormFn norm = [&spec](const Eigen::VectorXd& v) {
    return spec.norm_c(v);
  };
  return run_core(
      ctx, x0, seed,
      [&](Rng& rng, Eigen::VectorXd& z) {
        sample_noise_into(model, rng, norm, z);
      },
      [](Eigen::VectorXd&, Trajectory&) {},
      [](const Eigen::VectorXd& x, long) -> const Eigen::VectorXd& {
        return x;
      },
      nullptr);
}

Trajectory run_projected(const ProblemSpec& spec, const NoiseModel& model,
                         const StepSchedule& sch, const Eigen::VectorXd& x0,
                         double ball_radius, long T,
                         const std::vector<long>& checkpoints,
                         std::uint64_t seed,
                         const std::vector<double>* reference_curve) {
  if (!(ball_radius > 0.0)) throw BadParams("ball radius must be > 0");
  StepContext ctx{&spec, &model, sch, T, &checkpoints, {}};
  if (reference_curve) ctx.bound_rows.push_back(reference_curve);
  const NormFn norm = [&spec](const Eigen::VectorXd& v) {
    return spec.norm_c(v);
  };
  return run_core(
      ctx, x0, seed,
      [&](Rng& rng, Eigen::VectorXd& z) {
        sample_noise_into(model, rng, norm, z);
      },
      [&](Eigen::VectorXd& x, Trajectory& t) {
        bool hit = false;
        x = project_to_ball(x, spec.x_star, ball_radius, spec.norm_c, &hit);
        if (hit) ++t.projection_hits;
      },
      [](const Eigen::VectorXd& x, long) -> const Eigen::VectorXd& {
        return x;
      },
      nullptr);
}

std::pair<Trajectory, Eigen::VectorXd> run_truncated(
    const ProblemSpec& spec, const NoiseModel& model, const StepSchedule& sch,
    const Eigen::VectorXd& x0, double level, const Eigen::VectorXd& centering,
    long T, const std::vector<long>& checkpoints, std::uint64_t seed) {
  if (!spec.bounds.gamma_c) {
    throw MissingLipschitz("run_truncated needs a declared contraction");
  }
  // Shifted fixed point of H_bar(x) = F_bar(x) + centering.
  Eigen::VectorXd xt = spec.x_star;
  bool converged = false;
  for (int it = 0; it < 200000; ++it) {
    Eigen::VectorXd next = average_operator(spec, xt) + centering;
    if (spec.norm_c(next - xt) <= 1e-13) {
      xt = next;
      converged = true;
      break;
    }
    xt = next;
  }
  if (!converged) throw NoConvergence("shifted fixed-point solve stalled");

  StepContext ctx{&spec, &model, sch, T, &checkpoints, {}};
  const NormFn norm = [&spec](const Eigen::VectorXd& v) {
    return spec.norm_c(v);
  };
  if (!(level > 0.0)) throw BadParams("truncation level must be > 0");
  // The recursion uses H(x,s) = F(x,s) + centering with noise
  // Z~ = Z 1{||Z|| <= level} - centering, so the net update term is
  // F(x,s) + Z 1{||Z|| <= level}: the centering cancels along the path and
  // only shifts the fixed point the path tracks.
  long hits = 0;
  Trajectory traj = run_core(
      ctx, x0, seed,
      [&](Rng& rng, Eigen::VectorXd& z) {
        sample_noise_into(model, rng, norm, z);
        if (spec.norm_c(z) > level) {
          z.setZero();
          ++hits;
        }
      },
      [](Eigen::VectorXd&, Trajectory&) {},
      [](const Eigen::VectorXd& x, long) -> const Eigen::VectorXd& {
        return x;
      },
      nullptr);
  traj.truncation_hits = hits;
  return {traj, xt};
}

Trajectory run_polyak(const ProblemSpec& spec, const NoiseModel& model,
                      const StepSchedule& sch, const Eigen::VectorXd& x0,
                      long T, const std::vector<long>& checkpoints,
                      std::uint64_t seed,
                      const std::vector<double>* reference_curve) {
  StepContext ctx{&spec, &model, sch, T, &checkpoints, {}};
  if (reference_curve) ctx.bound_rows.push_back(reference_curve);
  const NormFn norm = [&spec](const Eigen::VectorXd& v) {
    return spec.norm_c(v);
  };
  // Running average maintained incrementally; y_k = (1/k) sum_{i<k} x_i
  // (y_0 := x_0 so the k = 0 audit is well-defined). The audit callback runs
  // exactly once per step in increasing k, so the accumulator can live here.
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(spec.dim);
  Eigen::VectorXd y = x0;
  return run_core(
      ctx, x0, seed,
      [&](Rng& rng, Eigen::VectorXd& z) {
        sample_noise_into(model, rng, norm, z);
      },
      [](Eigen::VectorXd&, Trajectory&) {},
      [&](const Eigen::VectorXd& x, long k) -> const Eigen::VectorXd& {
        if (k > 0) y = sum / static_cast<double>(k);
        sum += x;
        return y;
      },
      nullptr);
}

SupermartingaleDiag supermartingale_diag(const ProblemSpec& spec,
                                         const EnvelopeConstants& env,
                                         const ConstantsLedger& ledger,
                                         const NoiseModel& model,
                                         const Eigen::VectorXd& x0, long T,
                                         std::uint64_t seed) {
  const MarkovChain& chain = *spec.chain;
  const int n = chain.n_states();
  const StepSchedule& sch = ledger.in.sch;
  BoundCurve wc = worst_case_envelope(sch, ledger.in.nb, ledger.in.x0_error,
                                      ledger.in.xstar_norm);

  SupermartingaleDiag diag;
  const NormFn norm = [&spec](const Eigen::VectorXd& v) {
    return spec.norm_c(v);
  };
  Rng rng(seed);
  int s = stationary_start(chain, rng);
  Eigen::VectorXd x = x0;
  Eigen::VectorXd fx(spec.dim), z(spec.dim), buf(spec.dim);
  Eigen::MatrixXd g(n, spec.dim);

  double alpha_sum = 0.0;  // sum_{i=0}^{k-1} alpha_i
  int s_prev = s;
  for (long k = 0; k <= T; ++k) {
    diag.x_k.push_back(x);
    diag.s_k.push_back(s);
    // Poisson solution at the current iterate.
    for (int si = 0; si < n; ++si) {
      spec.F(x, si, buf);
      g.row(si) = buf.transpose();
    }
    PoissonSolution sol = solve_poisson(chain, g);
    Eigen::MatrixXd PV = chain.P() * sol.V;
    auto [M, gradM] = moreau_value_and_grad(env, spec.norm_c, x - spec.x_star);
    // d_k = <grad M(x_k - x*), E[V_{x_k}(S_k) | S_{k-1}]>; for k = 0 the
    // conditioning state is the start state itself.
    const int cond_state = (k == 0) ? s : s_prev;
    const double dk = gradM.dot(PV.row(cond_state).transpose());
    const double a_prev = sch.step(static_cast<double>(k) - 1.0);
    const double a_k = sch.step(static_cast<double>(k));
    const double Tk = wc.eval(static_cast<double>(k), 0.0);  // B_k^2
    const double lambda = ledger.theta / (a_k * Tk);
    const double arg = M + a_prev * dk + a_prev * env.L_s * ledger.in.nb.L2 / 4.0;
    diag.lambda_k.push_back(lambda);
    diag.d_k.push_back(dk);
    diag.lyapunov_arg.push_back(arg);
    diag.Zexp_k.push_back(lambda * arg);
    diag.Mbar_k.push_back(std::exp(lambda * arg) *
                          std::exp(-ledger.D3 * alpha_sum));
    if (k == T) break;

    spec.F(x, s, fx);
    z = sample_noise(model, rng, norm);
    x *= (1.0 - a_k);
    x += a_k * (fx + z);
    alpha_sum += a_k;
    s_prev = s;
    s = step_state(chain, s, rng);
  }
  return diag;
}

double wilson_upper_bound(long successes, long n) {
  if (n <= 0) return 1.0;
  const double zq = 1.959963984540054;
  const double phat = static_cast<double>(successes) / n;
  const double z2 = zq * zq;
  const double denom = 1.0 + z2 / n;
  const double center = phat + z2 / (2.0 * n);
  const double half =
      zq * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
  return (center + half) / denom;
}

McAggregate monte_carlo(const ProblemSpec& spec, const NoiseModel& model,
                        const StepSchedule& sch, const Eigen::VectorXd& x0,
                        const McSettings& st) {
  if (st.n_paths < 1) throw BadParams("need n_paths >= 1");
  if (st.deltas.size() != st.bound_rows.size()) {
    throw BadParams("one bound row per delta required");
  }
  for (const auto& row : st.bound_rows) {
    if (static_cast<long>(row.size()) != st.horizon + 1) {
      throw BadParams("bound rows must have horizon + 1 entries");
    }
  }
  std::vector<long> cps = st.checkpoints.empty()
                              ? geometric_checkpoints(sch.h, st.horizon)
                              : st.checkpoints;

  const std::size_t n_cp = cps.size();
  const std::size_t n_rows = st.bound_rows.size();
  std::vector<double> errors(static_cast<std::size_t>(st.n_paths) * n_cp);
  std::vector<std::uint8_t> flags(static_cast<std::size_t>(st.n_paths) * n_rows,
                                  0);
  std::vector<std::uint8_t> nonfinite(static_cast<std::size_t>(st.n_paths), 0);

  StepContext ctx{&spec, &model, sch, st.horizon, &cps, {}};
  for (const auto& row : st.bound_rows) ctx.bound_rows.push_back(&row);
  const NormFn norm = [&spec](const Eigen::VectorXd& v) {
    return spec.norm_c(v);
  };

  auto work = [&](long begin, long end) {
    std::vector<bool> violated;
    for (long p = begin; p < end; ++p) {
      Trajectory t = run_core(
          ctx, x0,
          Rng::stream_seed(st.master_seed, static_cast<std::uint64_t>(p)),
          [&](Rng& rng, Eigen::VectorXd& z) {
            sample_noise_into(model, rng, norm, z);
          },
          [](Eigen::VectorXd&, Trajectory&) {},
          [](const Eigen::VectorXd& x, long) -> const Eigen::VectorXd& {
            return x;
          },
          &violated);
      for (std::size_t c = 0; c < n_cp; ++c) {
        errors[static_cast<std::size_t>(p) * n_cp + c] = t.errors_sq[c];
      }
      for (std::size_t r = 0; r < n_rows; ++r) {
        flags[static_cast<std::size_t>(p) * n_rows + r] = violated[r] ? 1 : 0;
      }
      nonfinite[static_cast<std::size_t>(p)] = t.nonfinite ? 1 : 0;
    }
  };

  const int workers = std::max(1, st.workers);
  if (workers == 1) {
    work(0, st.n_paths);
  } else {
    std::vector<std::thread> pool;
    const long chunk = (st.n_paths + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const long b = w * chunk;
      const long e = std::min<long>(st.n_paths, b + chunk);
      if (b >= e) break;
      pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }

  // Ordered reduction over the path index (already index-addressed above).
  McAggregate agg;
  agg.n_paths = st.n_paths;
  agg.checkpoints = cps;
  agg.deltas = st.deltas;
  agg.quantile_levels = {0.5, 0.9, 0.99};
  agg.quantiles.assign(agg.quantile_levels.size(),
                       std::vector<double>(n_cp, 0.0));
  agg.mean_errors_sq.assign(n_cp, 0.0);
  std::vector<double> col(static_cast<std::size_t>(st.n_paths));
  for (std::size_t c = 0; c < n_cp; ++c) {
    double mean = 0.0;
    for (long p = 0; p < st.n_paths; ++p) {
      col[static_cast<std::size_t>(p)] =
          errors[static_cast<std::size_t>(p) * n_cp + c];
      mean += col[static_cast<std::size_t>(p)];
    }
    agg.mean_errors_sq[c] = mean / st.n_paths;
    std::sort(col.begin(), col.end());
    for (std::size_t q = 0; q < agg.quantile_levels.size(); ++q) {
      const double pos = agg.quantile_levels[q] * (st.n_paths - 1);
      const std::size_t lo = static_cast<std::size_t>(pos);
      const std::size_t hi = std::min(lo + 1, col.size() - 1);
      const double frac = pos - lo;
      agg.quantiles[q][c] = col[lo] * (1.0 - frac) + col[hi] * frac;
    }
  }
  agg.violations.assign(n_rows, 0);
  agg.violation_rate.assign(n_rows, 0.0);
  agg.wilson_upper.assign(n_rows, 0.0);
  for (std::size_t r = 0; r < n_rows; ++r) {
    long v = 0;
    for (long p = 0; p < st.n_paths; ++p) {
      v += flags[static_cast<std::size_t>(p) * n_rows + r];
    }
    agg.violations[r] = v;
    agg.violation_rate[r] = static_cast<double>(v) / st.n_paths;
    agg.wilson_upper[r] = wilson_upper_bound(v, st.n_paths);
  }
  for (long p = 0; p < st.n_paths; ++p) {
    agg.nonfinite_paths += nonfinite[static_cast<std::size_t>(p)];
  }
  return agg;
}

}  // namespace saconc
