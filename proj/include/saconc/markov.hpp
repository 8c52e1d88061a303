#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "saconc/errors.hpp"
#include "saconc/rng.hpp"

namespace saconc {

// Finite-state ergodic Markov chain. Immutable after construction; safe to
// share across threads. Construction validates row-stochasticity and
// ergodicity (single recurrent class + aperiodicity), computes the stationary
// distribution, and pre-factorizes the fundamental-matrix system used by the
// Poisson-equation solver.
class MarkovChain {
 public:
  explicit MarkovChain(Eigen::MatrixXd P, std::vector<std::string> labels = {});

  int n_states() const { return static_cast<int>(P_.rows()); }
  const Eigen::MatrixXd& P() const { return P_; }
  const Eigen::VectorXd& pi() const { return pi_; }
  const std::vector<std::string>& labels() const { return labels_; }

  // Cumulative row sums, used for inverse-CDF transition sampling.
  const Eigen::MatrixXd& row_cdf() const { return row_cdf_; }

  // LU factorization of (I - P + 1*pi^T); reused for every Poisson solve.
  const Eigen::PartialPivLU<Eigen::MatrixXd>& fundamental_lu() const {
    return fundamental_lu_;
  }

  static MarkovChain from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

 private:
  Eigen::MatrixXd P_;
  Eigen::VectorXd pi_;
  Eigen::MatrixXd row_cdf_;
  Eigen::PartialPivLU<Eigen::MatrixXd> fundamental_lu_;
  std::vector<std::string> labels_;
};

// Canonical solution of the Poisson equation
//   g(s) - gbar + (P V)(s) = V(s),   pi . V = 0,
// for per-state data g (one row per state, one column per component).
struct PoissonSolution {
  Eigen::MatrixXd V;     // n_states x d
  double residual_norm;  // max-abs residual of the defining equation
};

Eigen::VectorXd stationary_distribution(const MarkovChain& chain);
PoissonSolution solve_poisson(const MarkovChain& chain, const Eigen::MatrixXd& g);

// E[tau_s | S_0 = s] for each s, computed from first-passage linear systems
// (not from Kac's identity, which the tests use as an independent check).
Eigen::VectorXd expected_return_times(const MarkovChain& chain);

// One transition from state s using the given stream.
int step_state(const MarkovChain& chain, int s, Rng& rng);

std::vector<int> sample_path(const MarkovChain& chain, int start, long length,
                             std::uint64_t seed);

}  // namespace saconc
