#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "saconc/errors.hpp"
#include "saconc/markov.hpp"

namespace saconc {

// Norms supported for ||.||_c: euclidean, weighted-euclidean sqrt(x'Wx), and
// sup-norm. The smooth reference norm ||.||_s is always euclidean, so each
// norm carries its equivalence constants l_cs, u_cs with
//   l_cs ||x||_2 <= ||x||_c <= u_cs ||x||_2.
struct Norm {
  enum class Kind { Euclidean, Weighted, Sup };

  Kind kind = Kind::Euclidean;
  Eigen::MatrixXd W;   // weight matrix for Kind::Weighted (SPD)
  Eigen::MatrixXd Ws;  // cached matrix square root of W

  static Norm euclidean();
  static Norm weighted(const Eigen::MatrixXd& W);
  static Norm sup();

  double operator()(const Eigen::VectorXd& x) const;
  // Induced matrix norm sup ||Ax||_c / ||x||_c.
  double induced(const Eigen::MatrixXd& A) const;
  double l_cs(int dim) const;
  double u_cs(int dim) const;
};

// Affine noise/drift envelope constants of the operator family.
struct NoiseBounds {
  double A1 = 0.0, B1 = 0.0;  // ||F(x,s) - Fbar(x)|| <= A1 ||x|| + B1
  double A3 = 0.0, B3 = 0.0;  // ||Fbar(x) - x*||   <= A3 ||x - x*|| + B3
  double B2 = 0.0;            // additive-noise bound (may be overridden)
  std::optional<double> gamma_c;  // contraction factor, if declared
  std::optional<double> L_F;      // uniform Lipschitz constant of F(., s)
  double L1 = 0.0, L2 = 0.0;      // Poisson-solution constants

  double D() const { return A1 + A3 - 1.0; }
  double A13() const { return A1 + A3; }
  double B123() const { return B1 + B2 + B3; }
};

// Operator layer: noisy operator F(x, s) over a finite chain, with the norm,
// fixed point, and certified constants. Evaluation is pure; the struct is
// immutable and shareable. F writes into a caller-provided buffer to keep
// tight simulation loops allocation-free.
struct ProblemSpec {
  std::string name;
  std::shared_ptr<const MarkovChain> chain;
  std::function<void(const Eigen::VectorXd& x, int s, Eigen::VectorXd& out)> F;
  Norm norm_c;
  int dim = 1;
  Eigen::VectorXd x_star;
  NoiseBounds bounds;
  bool iid_noise = false;  // true when the chain is i.i.d. (all rows = pi)

  Eigen::VectorXd apply_F(const Eigen::VectorXd& x, int s) const {
    Eigen::VectorXd out(dim);
    F(x, s, out);
    return out;
  }
};

struct LinearSAProblem {
  Eigen::MatrixXd A_bar;
  Eigen::VectorXd b_bar;
  std::vector<Eigen::MatrixXd> A_of_s;
  std::vector<Eigen::VectorXd> b_of_s;
  Eigen::MatrixXd P_bar;  // Lyapunov solution A'P + PA + I = 0
  double beta = 0.0;      // 1 / (2 lambda_max(A' P_bar A))
};

Eigen::VectorXd average_operator(const ProblemSpec& spec,
                                 const Eigen::VectorXd& x);

// Fit the smallest affine envelopes (A1,B1), (A3,B3) over a sampling grid of
// log-spaced radii times random directions. Sound on the grid only; exact for
// affine operator families.
NoiseBounds estimate_noise_bounds(const ProblemSpec& spec, int n_radii,
                                  int n_dirs, double radius,
                                  std::uint64_t seed = 12345);

std::pair<Eigen::MatrixXd, double> solve_lyapunov_and_beta(
    const Eigen::MatrixXd& A_bar);

Eigen::VectorXd fixed_point(const ProblemSpec& spec);

// L1 = (L_F + gamma_c)(1 + max_s E[tau_s | S_0 = s]);
// L2 = L1 ||x*||_c + max_s ||V_0(s)||_c with the canonical Poisson solution
// of g(s) = F(0, s).
std::pair<double, double> poisson_constants_L1_L2(const ProblemSpec& spec);

// Build the beta-scaled linear SA problem F_beta(x,s) = beta A(s) x +
// beta b(s) + x over the given chain, with closed-form noise bounds.
LinearSAProblem make_linear_sa(const Eigen::MatrixXd& A_bar,
                               const Eigen::VectorXd& b_bar,
                               const std::vector<Eigen::MatrixXd>& A_of_s,
                               const std::vector<Eigen::VectorXd>& b_of_s,
                               const MarkovChain& chain);
ProblemSpec linear_sa_spec(std::shared_ptr<const MarkovChain> chain,
                           const LinearSAProblem& lin);

// ---- Built-in problem catalog ------------------------------------------

// Estimate a stationary mean: F(x, s) = f(s), fixed point x* = pi . f.
ProblemSpec make_stationary_mean(std::shared_ptr<const MarkovChain> chain,
                                 const Eigen::VectorXd& f);

// Scalar state-modulated contraction F(x, s) = slope(s) x + intercept(s)
// with closed-form affine envelopes; the stationary mean slope must lie in
// [0, 1).
ProblemSpec make_contraction_demo(std::shared_ptr<const MarkovChain> chain,
                                  const Eigen::VectorXd& slope_of_s,
                                  const Eigen::VectorXd& intercept_of_s);

// Scalar two-point recursion F(x, s) = s x + (s - a) b with
// P(S = a + N) = 1/(N+1), P(S = a) = N/(N+1) (i.i.d. states).
ProblemSpec make_scalar_counterexample(double a, double b, double N);

// Names accepted by named_problem.
std::vector<std::string> problem_catalog();

// Build a catalog problem from JSON parameters; see README for the schema.
ProblemSpec named_problem(const std::string& name,
                          const nlohmann::json& params);

// Either {"builder": name, ...params} or a linear problem
// {"chain": ..., "A_bar": ..., "b_bar": ..., "A_per_state": ...,
//  "b_per_state": ...}.
ProblemSpec problem_from_json(const nlohmann::json& j);

}  // namespace saconc
