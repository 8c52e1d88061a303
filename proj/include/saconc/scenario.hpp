#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "json.hpp"
#include "saconc/bounds.hpp"
#include "saconc/sim.hpp"

namespace saconc {

// A fully specified validation experiment: problem + noise + schedule +
// bound regime + the plan of checks that `validate` runs against it.
struct Scenario {
  enum class Kind { Coverage, Unbounded, Polyak, Counterexample };

  std::string name;
  std::string description;
  std::string regime;  // "z=1,D<0", "z=0.75,D=0", ..., or "counterexample"
  Kind kind = Kind::Coverage;

  ProblemSpec spec;
  NoiseModel model;
  StepSchedule sch;
  long horizon = 10000;
  Eigen::VectorXd x0;
  std::vector<double> deltas{0.1, 0.01};

  // Counter-example runs are intentionally outside the admissible-step regime.
  bool inadmissible_by_design = false;

  // Rate-fit plan (D < 0 scenarios): slope of the log 0.9-quantile of the
  // squared error vs log k should sit within rate_tol of -z on the window.
  bool check_rate = false;
  double rate_window_lo = 1e3;
  double rate_window_hi = 1e5;
  double rate_tol = 0.1;

  // Unbounded-noise scenarios evaluate the truncated-horizon curve at T.
  long trunc_T = 0;

  // Counterexample plan: empirical truncated MGF of
  // lambda * ((k+h)^z x_k^2)^beta (part 1) resp.
  // lambda * (log^+((k+h)^z x_k^2))^beta (part 2) on the k-grid.
  CounterexampleParams cx;
  double cx_lambda = 0.0;
  double cx_beta = 0.0;
  bool cx_log_arg = false;  // part 2 uses the log argument
  std::vector<long> cx_grid;

  // Extra oracle values recorded at build time (linear SA).
  bool check_lyapunov = false;
  double lyapunov_residual = 0.0;
};

std::vector<Scenario> scenario_catalog();
Scenario scenario_by_name(const std::string& name);

// Envelope + ledger inputs for a scenario's declared constants (mu chosen by
// the feasibility rule, x0/x* distances in the scenario norm).
LedgerInputs scenario_ledger_inputs(const Scenario& sc);

struct OracleCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  std::string cmp;  // "<=", "<", ">=", ">"
  bool pass = false;
};

// Self-contained validation result: every verdict is recomputable from the
// stored numbers alone.
struct ValidationReport {
  int schema = 1;
  std::string scenario;
  std::string regime;
  long n_paths = 0;
  std::uint64_t master_seed = 0;
  long horizon = 0;

  std::vector<double> deltas;
  std::vector<long> violations;
  std::vector<double> violation_rate;
  std::vector<double> wilson_upper;
  std::vector<bool> coverage_pass;

  bool has_rate = false;
  double rate_slope = 0.0;
  double rate_stderr = 0.0;
  double rate_expected = 0.0;
  double rate_tol = 0.0;
  bool rate_pass = true;

  nlohmann::json ledger;  // ConstantsLedger snapshot (empty for counterexamples)
  std::vector<OracleCheck> oracles;

  bool admissible = true;
  bool inadmissible_by_design = false;
  std::string note;  // e.g. "consistent with divergence" (finite-grid caveat)
  bool pass = false;

  nlohmann::json to_json() const;
  static ValidationReport from_json(const nlohmann::json& j);
  // Recompute the overall verdict from the stored per-check numbers.
  bool recompute_pass() const;
};

ValidationReport run_validation(const Scenario& sc, long n_paths,
                                std::uint64_t master_seed, int workers = 1,
                                double bound_scale = 1.0);

// Least-squares slope of y against x with its standard error.
std::pair<double, double> loglog_slope(const std::vector<double>& logk,
                                       const std::vector<double>& logq);

// Scenario loaded from a config file: {"scenario": name} plus optional
// overrides (horizon, deltas, schedule {alpha,h,z}, bound_scale for the
// deliberately-failing fixture).
struct ScenarioConfig {
  Scenario scenario;
  double bound_scale = 1.0;  // multiplies every bound row (test fixture hook)
  long paths = 1000;
  std::uint64_t seed = 1;
  int workers = 1;
};
ScenarioConfig scenario_config_from_json(const nlohmann::json& j);

}  // namespace saconc
