#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "saconc/markov.hpp"

using namespace saconc;

namespace {

Eigen::MatrixXd mat2(double a, double b, double c, double d) {
  Eigen::MatrixXd P(2, 2);
  P << a, b, c, d;
  return P;
}

// Independent stationary-distribution oracle: dense solve of pi (P - I) = 0
// with the normalization sum(pi) = 1.
Eigen::VectorXd stationary_oracle(const Eigen::MatrixXd& P) {
  const int n = static_cast<int>(P.rows());
  Eigen::MatrixXd A = P.transpose() - Eigen::MatrixXd::Identity(n, n);
  A.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  return A.fullPivLu().solve(rhs);
}

// Random ergodic chain: strictly positive rows, Dirichlet-like weights.
Eigen::MatrixXd random_chain(int n, Rng& rng) {
  Eigen::MatrixXd P(n, n);
  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      P(i, j) = 0.05 + rng.uniform();
      row_sum += P(i, j);
    }
    P.row(i) /= row_sum;
  }
  return P;
}

}  // namespace

TEST_CASE("construction rejects periodic and malformed chains") {
  CHECK_THROWS_AS(MarkovChain(mat2(0, 1, 1, 0)), NotErgodic);
  // Reducible: two absorbing states.
  CHECK_THROWS_AS(MarkovChain(mat2(1, 0, 0, 1)), NotErgodic);
  // Row does not sum to one.
  CHECK_THROWS_AS(MarkovChain(mat2(0.5, 0.4, 0.5, 0.5)), BadParams);
  // Negative entry.
  CHECK_THROWS_AS(MarkovChain(mat2(1.2, -0.2, 0.5, 0.5)), BadParams);
}

TEST_CASE("stationary distribution on known chains") {
  MarkovChain sym(mat2(0.5, 0.5, 0.5, 0.5));
  CHECK(sym.pi()(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sym.pi()(1) == doctest::Approx(0.5).epsilon(1e-12));

  MarkovChain c(mat2(0.9, 0.1, 0.2, 0.8));
  CHECK(c.pi()(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(c.pi()(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  Eigen::VectorXd oracle = stationary_oracle(c.P());
  CHECK((c.pi() - oracle).cwiseAbs().maxCoeff() <= 1e-12);

  // pi P = pi and sums to one.
  CHECK((c.pi().transpose() * c.P() - c.pi().transpose())
            .cwiseAbs()
            .maxCoeff() <= 1e-10);
  CHECK(c.pi().sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("poisson equation on hand-checkable chains") {
  // i.i.d. chain: V(s) = g(s) - gbar.
  MarkovChain sym(mat2(0.5, 0.5, 0.5, 0.5));
  Eigen::MatrixXd g(2, 1);
  g << 1.0, -1.0;
  PoissonSolution sol = solve_poisson(sym, g);
  CHECK(sol.V(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.V(1, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(sol.residual_norm <= 1e-12);

  // Two-state chain, indicator data; canonical normalization pi . V = 0.
  MarkovChain c(mat2(0.9, 0.1, 0.2, 0.8));
  Eigen::MatrixXd g2(2, 1);
  g2 << 1.0, 0.0;
  PoissonSolution sol2 = solve_poisson(c, g2);
  CHECK(sol2.residual_norm <= 1e-10);
  CHECK(std::abs(c.pi().dot(sol2.V.col(0))) <= 1e-12);
  // Defining equation checked by hand: g - gbar + P V = V.
  const double gbar = c.pi().dot(g2.col(0));
  Eigen::VectorXd resid =
      g2.col(0).array() - gbar + (c.P() * sol2.V).col(0).array() -
      sol2.V.col(0).array();
  CHECK(resid.cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("expected return times satisfy the Kac identity") {
  MarkovChain sym(mat2(0.5, 0.5, 0.5, 0.5));
  Eigen::VectorXd t = expected_return_times(sym);
  CHECK(t(0) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(t(1) == doctest::Approx(2.0).epsilon(1e-10));

  MarkovChain c(mat2(0.9, 0.1, 0.2, 0.8));
  Eigen::VectorXd tc = expected_return_times(c);
  CHECK(tc(0) == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(tc(1) == doctest::Approx(3.0).epsilon(1e-10));

  Eigen::MatrixXd one(1, 1);
  one << 1.0;
  MarkovChain single(one);
  CHECK(expected_return_times(single)(0) == doctest::Approx(1.0));
}

TEST_CASE("random ergodic chains: residuals, normalization, Kac") {
  Rng rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 7);  // up to 8 states
    const int d = 1 + static_cast<int>(rng.next_u64() % 4);
    MarkovChain chain(random_chain(n, rng));
    Eigen::MatrixXd g(n, d);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) g(i, j) = 2.0 * rng.uniform() - 1.0;
    }
    PoissonSolution sol = solve_poisson(chain, g);
    CHECK(sol.residual_norm <= 1e-10);
    CHECK((chain.pi().transpose() * sol.V).cwiseAbs().maxCoeff() <= 1e-10);

    Eigen::VectorXd tau = expected_return_times(chain);
    for (int s = 0; s < n; ++s) {
      CHECK(tau(s) * chain.pi()(s) == doctest::Approx(1.0).epsilon(1e-8));
    }
  }
}

TEST_CASE("sample_path determinism and degenerate chains") {
  Eigen::MatrixXd one(1, 1);
  one << 1.0;
  MarkovChain single(one);
  std::vector<int> path = sample_path(single, 0, 32, 99);
  for (int s : path) CHECK(s == 0);

  MarkovChain c(mat2(0.9, 0.1, 0.2, 0.8));
  std::vector<int> p1 = sample_path(c, 0, 4096, 7);
  std::vector<int> p2 = sample_path(c, 0, 4096, 7);
  CHECK(p1 == p2);
  std::vector<int> p3 = sample_path(c, 0, 4096, 8);
  CHECK(p1 != p3);
}

TEST_CASE("long-run occupation matches the stationary law") {
  MarkovChain c(mat2(0.9, 0.1, 0.2, 0.8));
  const long n = 1000000;
  std::vector<int> path = sample_path(c, 0, n, 31337);
  long in_state0 = 0;
  for (int s : path) in_state0 += (s == 0) ? 1 : 0;
  const double freq = static_cast<double>(in_state0) / n;
  // Markov-chain CLT sigma is inflated vs i.i.d.; 3x the i.i.d. sigma times a
  // mixing factor sqrt((1+rho)/(1-rho)) with rho = 0.7 for this chain.
  const double pi0 = 2.0 / 3.0;
  const double sigma =
      std::sqrt(pi0 * (1.0 - pi0) / n) * std::sqrt(1.7 / 0.3);
  CHECK(std::abs(freq - pi0) <= 3.0 * sigma);
}

TEST_CASE("json round trip preserves the transition matrix") {
  MarkovChain c(mat2(0.9, 0.1, 0.2, 0.8));
  MarkovChain back = MarkovChain::from_json(c.to_json());
  CHECK((back.P() - c.P()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.pi() - c.pi()).cwiseAbs().maxCoeff() == 0.0);
}
