#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

#include "json.hpp"
#include "saconc/errors.hpp"
#include "saconc/rng.hpp"

namespace saconc {

// Additive martingale-difference noise. The radial law of ||Z|| realizes the
// declared tail class with equality (exact Weibull-type or Pareto-type
// survival function), so quantile and bias bounds are tight and testable.
// Directions are symmetric (isotropic Gaussian direction normalized in the
// requested norm), which enforces E[Z | past] = 0.
struct NoiseModel {
  enum class Kind { PointMass, BoundedUniformBall, SubWeibull, SubPareto };

  Kind kind = Kind::PointMass;
  int dim = 1;
  // BoundedUniformBall: ||Z|| <= B2 surely, radius ~ B2 * U^(1/dim).
  double B2 = 0.0;
  // SubWeibull(p, q, theta):  P(W >= x) = min(1, p * exp(-q x^(1/theta))).
  // SubPareto(p, theta):      P(W >= x) = min(1, p / x^theta).
  double p = 1.0;
  double q = 1.0;
  double theta = 1.0;

  static NoiseModel point_mass(int dim);
  static NoiseModel bounded_ball(double B2, int dim);
  static NoiseModel sub_weibull(double p, double q, double theta, int dim);
  static NoiseModel sub_pareto(double p, double theta, int dim);

  static NoiseModel from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  bool bounded() const {
    return kind == Kind::PointMass || kind == Kind::BoundedUniformBall;
  }
};

using NormFn = std::function<double(const Eigen::VectorXd&)>;

// Draw the radial part W of one sample.
double sample_radius(const NoiseModel& model, Rng& rng);

// Draw a full sample. The direction is normalized so that norm(Z) equals the
// sampled radius; by default the norm is euclidean.
Eigen::VectorXd sample_noise(const NoiseModel& model, Rng& rng);
Eigen::VectorXd sample_noise(const NoiseModel& model, Rng& rng,
                             const NormFn& norm);

// Allocation-free variant for hot simulation loops; `norm` measures the
// direction vector written into `out`.
void sample_noise_into(const NoiseModel& model, Rng& rng, const NormFn& norm,
                       Eigen::VectorXd& out);

// Tail quantile B(gamma): smallest level with P(W > B) <= gamma, from the
// model's survival function. For bounded models this is the hard bound B2.
double quantile_B(const NoiseModel& model, double gamma);

// Upper bound on E[W 1{W >= B(gamma)}] / (1 - gamma_c), from the dyadic
// tail-peeling sum 2 gamma sum_{j>=1} 2^-j B(gamma 2^-j) (summed numerically
// to relative 1e-15; converges geometrically for both tail classes).
double truncation_bias_g(const NoiseModel& model, double gamma, double gamma_c);

// Raw (unscaled) tail-expectation bound E[W 1{W >= B(gamma)}].
double tail_expectation_bound(const NoiseModel& model, double gamma);

// Z * 1{norm(Z) <= level} - centering.
Eigen::VectorXd truncate_and_center(const Eigen::VectorXd& sample, double level,
                                    const Eigen::VectorXd& centering,
                                    const NormFn& norm);

}  // namespace saconc
