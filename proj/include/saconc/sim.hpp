#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "saconc/bounds.hpp"
#include "saconc/envelope.hpp"
#include "saconc/noise.hpp"
#include "saconc/problem.hpp"

namespace saconc {

// One simulated path. Full per-step errors are not stored; checkpoints plus
// the running sup against a reference curve keep long-horizon Monte Carlo
// memory-flat.
struct Trajectory {
  std::vector<long> checkpoints;
  std::vector<double> errors_sq;  // ||x_k - x*||_c^2 at each checkpoint
  double sup_ratio = 0.0;         // max_k errors_sq(k) / reference_curve(k)
  long projection_hits = 0;
  long truncation_hits = 0;
  std::uint64_t seed = 0;
  bool nonfinite = false;
  long nonfinite_step = -1;
};

// Per-step diagnostics of the exponential Lyapunov process.
struct SupermartingaleDiag {
  std::vector<double> lambda_k;
  std::vector<double> d_k;
  std::vector<double> Zexp_k;  // lambda_k (M + alpha_{k-1} d_k + alpha_{k-1} L_s L_2 / 4)
  std::vector<double> Mbar_k;
  std::vector<double> lyapunov_arg;  // M + alpha_{k-1} d_k + alpha_{k-1} L_s L_2/4
  std::vector<Eigen::VectorXd> x_k;
  std::vector<int> s_k;
};

// Default geometric checkpoint grid ceil(h * 1.5^j), capped at T.
std::vector<long> geometric_checkpoints(double h, long T);

Trajectory run_sa(const ProblemSpec& spec, const NoiseModel& model,
                  const StepSchedule& sch, const Eigen::VectorXd& x0, long T,
                  const std::vector<long>& checkpoints, std::uint64_t seed,
                  const std::vector<double>* reference_curve = nullptr);

Trajectory run_projected(const ProblemSpec& spec, const NoiseModel& model,
                         const StepSchedule& sch, const Eigen::VectorXd& x0,
                         double ball_radius, long T,
                         const std::vector<long>& checkpoints,
                         std::uint64_t seed,
                         const std::vector<double>* reference_curve = nullptr);

// Truncated-and-centered auxiliary recursion: the noise is clipped at the
// given level and re-centered by `centering` (the exact truncated mean, which
// is 0 for the symmetric laws shipped here); the drift operator becomes
// H(x,s) = F(x,s) + centering. Returns the trajectory and the shifted fixed
// point x_tilde of H_bar.
std::pair<Trajectory, Eigen::VectorXd> run_truncated(
    const ProblemSpec& spec, const NoiseModel& model, const StepSchedule& sch,
    const Eigen::VectorXd& x0, double level, const Eigen::VectorXd& centering,
    long T, const std::vector<long>& checkpoints, std::uint64_t seed);

// Polyak averaging: same recursion, but errors are recorded for the running
// average y_k = (1/k) sum_{i<k} x_i.
Trajectory run_polyak(const ProblemSpec& spec, const NoiseModel& model,
                      const StepSchedule& sch, const Eigen::VectorXd& x0,
                      long T, const std::vector<long>& checkpoints,
                      std::uint64_t seed,
                      const std::vector<double>* reference_curve = nullptr);

// Replay a short path and compute the supermartingale objects at every step:
// the Poisson solution at the current iterate, the drift correction
// d_k = <grad M(x_k - x*), (P V_{x_k})(S_{k-1})>, lambda_k = theta /
// (alpha_k T_k) with T_k = B_k^2 from the worst-case envelope, and Mbar_k
// with its -D3 sum(alpha_i) discount.
SupermartingaleDiag supermartingale_diag(const ProblemSpec& spec,
                                         const EnvelopeConstants& env,
                                         const ConstantsLedger& ledger,
                                         const NoiseModel& model,
                                         const Eigen::VectorXd& x0, long T,
                                         std::uint64_t seed);

struct McSettings {
  long n_paths = 1000;
  std::uint64_t master_seed = 1;
  int workers = 1;
  long horizon = 1000;
  std::vector<long> checkpoints;
  // One precomputed per-step bound row (length horizon + 1) per confidence
  // level; violations are counted per path against each row.
  std::vector<double> deltas;
  std::vector<std::vector<double>> bound_rows;
};

struct McAggregate {
  long n_paths = 0;
  std::vector<long> checkpoints;
  // quantiles[q][c]: empirical q-quantile of errors_sq at checkpoint c.
  std::vector<double> quantile_levels;
  std::vector<std::vector<double>> quantiles;
  std::vector<double> mean_errors_sq;
  std::vector<double> deltas;
  std::vector<long> violations;     // paths violating bound_rows[i] anywhere
  std::vector<double> violation_rate;
  std::vector<double> wilson_upper;  // 95% upper confidence limit of the rate
  long nonfinite_paths = 0;
};

// Deterministic parallel Monte Carlo: per-path seeds derive from
// (master_seed, path index) and aggregation is an ordered reduction over the
// path index, so results are independent of the worker count.
McAggregate monte_carlo(const ProblemSpec& spec, const NoiseModel& model,
                        const StepSchedule& sch, const Eigen::VectorXd& x0,
                        const McSettings& settings);

// Wilson score interval upper limit for a binomial proportion (z = 1.959964).
double wilson_upper_bound(long successes, long n);

}  // namespace saconc
