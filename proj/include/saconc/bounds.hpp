#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "saconc/envelope.hpp"
#include "saconc/noise.hpp"
#include "saconc/problem.hpp"

namespace saconc {

// Step sizes alpha_k = alpha / (k + h)^z, defined for k >= -1.
struct StepSchedule {
  double alpha = 1.0;
  double h = 8.0;
  double z = 1.0;

  StepSchedule() = default;
  StepSchedule(double alpha_, double h_, double z_);

  double step(double k) const { return alpha / std::pow(k + h, z); }
};

struct Admissibility {
  bool ok = true;
  std::vector<std::string> failures;
};

struct LedgerInputs {
  NoiseBounds nb;
  EnvelopeConstants env;
  StepSchedule sch;
  double x0_error = 1.0;    // ||x_0 - x*||_c
  double xstar_norm = 0.0;  // ||x*||_c
};

// All derived constants of the concentration bounds, computed deterministically
// from the inputs. Immutable and shareable.
struct ConstantsLedger {
  LedgerInputs in;
  double C1p = 0, C2p = 0, C1 = 0, C2 = 0;
  double D2 = 0, D3 = 0, theta = 0;
  double a_bar1 = 0;
  double b_bar1 = 0, b_bar2 = 0, b_bar3 = 0, b_bar4 = 0;
  double c_bar1 = 0, c_bar2 = 0, c_bar3 = 0;
  Admissibility admissible;

  nlohmann::json to_json() const;
};

Admissibility check_admissible(const StepSchedule& sch,
                               const EnvelopeConstants& env, double C1,
                               double L1, double L2);

ConstantsLedger constants_ledger(const LedgerInputs& in);

// Evaluable theoretical curve k -> bound(k, delta) on the squared error,
// together with the deterministic almost-sure envelope B_k when available
// (T_k := B_k^2 is the default bounding sequence).
struct BoundCurve {
  std::string regime;  // e.g. "z=1,D<0"
  std::string kind;    // "explicit-constant", "shape-with-fitted-scale",
                       // or "almost-sure-envelope"
  std::function<double(double k, double delta)> eval;
  std::function<double(double k)> envelope;  // B_k in norm units (may be null)
};

// Deterministic almost-sure envelope B_k with ||x_k - x*||_c <= B_k.
BoundCurve worst_case_envelope(const StepSchedule& sch, const NoiseBounds& nb,
                               double x0_error, double xstar_norm);

// High-probability bound on ||x_k - x*||_c^2, valid simultaneously for all k
// with probability >= 1 - delta. Explicit constants for z = 1 (both signs of
// D) and z < 1 with D < 0; shape curves with constructed scales for z < 1
// with D >= 0 (beta_shape < 1 is the caller's exponent parameter; a6 < 0
// selects the default worst-case-envelope coefficient).
double hp_bound(const ConstantsLedger& ledger, double k, double delta,
                double beta_shape = 0.75, double a6 = -1.0);

// Same bound surface for unbounded additive noise truncated at horizon T:
// the ledger is rebuilt with B2 = 2 B(delta / (2T)), the bounded-noise curve
// is evaluated at confidence delta/2, and the squared truncation bias
// 2 g(delta/(2T))^2 is added.
double hp_bound_unbounded(const LedgerInputs& base, const NoiseModel& model,
                          double k, double delta, long T);

// Averaged-iterate shape bound: O(log(1/delta)/k) +
// O(f_z(delta)^2 / k^min(2z, 2-z)), with f_z selected by the sign of D.
double polyak_bound(const ConstantsLedger& ledger, double z, double k,
                    double delta, double beta_shape = 0.75);

// Scalar two-state counterexample x_{k+1} = (1 + (S_k - 1) alpha_k) x_k +
// alpha_k (S_k - a) b with P(S = a + N) = 1/(N+1).
struct CounterexampleParams {
  double a = 0.5;
  double b = 1.0;
  double N = 0.5;
  double x0 = 1.0;
  StepSchedule sch;
};

struct CounterexampleLower {
  double prob;         // probability of the all-(a+N) path
  double path_value;   // x_k along that path (exact)
  double mgf_lower;    // single-path lower bound on the truncated MGF
  double mgf_lower_integral;  // looser closed-form variant (integral bound)
};

CounterexampleLower counterexample_lower_mgf(const CounterexampleParams& p,
                                             long k, double lambda,
                                             double beta);

}  // namespace saconc
