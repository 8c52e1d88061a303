#pragma once

#include <Eigen/Dense>

#include "saconc/errors.hpp"
#include "saconc/problem.hpp"

namespace saconc {

// Generalized Moreau envelope machinery. The smooth reference norm ||.||_s is
// always euclidean (1/2 ||.||^2 is 1-smooth w.r.t. itself, so L = 1).
struct EnvelopeConstants {
  double gamma_c = 0.0;
  double mu = 1.0;
  double L = 1.0;    // smoothness of ||.||_s^2 / 2
  double eta = 0.0;  // negative-drift rate
  double L_s = 1.0;  // envelope smoothness L / mu
  double l = 0.0, u = 0.0;      // sandwich: l M(x) <= ||x||_c^2 <= u M(x)
  double l_cs = 1.0, u_cs = 1.0;  // l_cs ||x||_s <= ||x||_c <= u_cs ||x||_s
};

// Condition value of the mu selection rule: gamma_c *
// sqrt((1 + mu u_cs^2) / (1 + mu l_cs^2)). Must stay below 1.
double mu_condition(double gamma_c, double mu, double l_cs, double u_cs);

// Pick mu with mu_condition <= 1 - margin. Prefers mu = 1 when feasible
// there; otherwise searches downward by halving plus bisection (the condition
// value is non-decreasing in mu, so feasibility is an interval (0, mu_max]).
// Throws Infeasible, reporting the asymptotic value gamma_c u_cs / l_cs, when
// no mu attains the margin.
double choose_mu(double gamma_c, double l_cs, double u_cs, double margin = 0.05);

EnvelopeConstants envelope_constants(double gamma_c, double mu, double L,
                                     double l_cs, double u_cs);

// M(x) = min_u { 1/2 ||u||_c^2 + 1/(2 mu) ||x - u||_2^2 } and its gradient.
// Euclidean and weighted pairs use the closed-form quadratic minimizer; the
// sup-norm pair reduces to a 1-D water-filling solve on the sorted absolute
// values (exact, O(d log d)).
std::pair<double, Eigen::VectorXd> moreau_value_and_grad(
    const EnvelopeConstants& constants, const Norm& norm_c,
    const Eigen::VectorXd& x);

}  // namespace saconc
