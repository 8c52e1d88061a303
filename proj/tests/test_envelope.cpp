#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "saconc/envelope.hpp"
#include "saconc/rng.hpp"

using namespace saconc;

namespace {

Eigen::VectorXd randn(int d, Rng& rng) {
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v(i) = rng.normal();
  return v;
}

// Central-difference gradient of the Moreau value.
Eigen::VectorXd fd_grad(const EnvelopeConstants& env, const Norm& norm,
                        const Eigen::VectorXd& x) {
  const double eps = 1e-6;
  Eigen::VectorXd g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += eps;
    xm(i) -= eps;
    g(i) = (moreau_value_and_grad(env, norm, xp).first -
            moreau_value_and_grad(env, norm, xm).first) /
           (2.0 * eps);
  }
  return g;
}

}  // namespace

TEST_CASE("mu selection rule") {
  // c = s: the condition value is gamma_c for every mu, so mu = 1.
  CHECK(choose_mu(0.8, 1.0, 1.0) == 1.0);
  CHECK(mu_condition(0.8, 1.0, 1.0, 1.0) == doctest::Approx(0.8));
  // No contraction pressure: mu = 1, eta = 2.
  CHECK(choose_mu(0.0, 1.0, 1.0) == 1.0);
  EnvelopeConstants e0 = envelope_constants(0.0, 1.0, 1.0, 1.0, 1.0);
  CHECK(e0.eta == doctest::Approx(2.0));

  // Sup-vs-euclidean in d = 2 with gamma_c = 0.9: mu = 1 violates the
  // condition, but small mu is feasible; the returned mu must satisfy it
  // with the default margin.
  const double l_cs = 1.0 / std::sqrt(2.0), u_cs = 1.0;
  const double mu = choose_mu(0.9, l_cs, u_cs, 0.01);
  CHECK(mu > 0.0);
  CHECK(mu_condition(0.9, mu, l_cs, u_cs) <= 1.0 - 0.01 + 1e-12);

  // Infeasible: the condition tends to gamma_c as mu -> 0, so gamma_c above
  // 1 - margin cannot be fixed by any mu.
  CHECK_THROWS_AS(choose_mu(0.96, l_cs, u_cs, 0.05), Infeasible);
}

TEST_CASE("envelope constants plug-in values") {
  EnvelopeConstants e = envelope_constants(0.5, 1.0, 1.0, 1.0, 1.0);
  CHECK(e.eta == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.L_s == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.l == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(e.u == doctest::Approx(4.0).epsilon(1e-12));
  // l and u grow linearly in mu when the norms agree.
  EnvelopeConstants big = envelope_constants(0.0, 10.0, 1.0, 1.0, 1.0);
  CHECK(big.l == doctest::Approx(22.0).epsilon(1e-12));
  CHECK(big.u == doctest::Approx(22.0).epsilon(1e-12));
  CHECK(big.L_s == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("moreau closed form for matching euclidean norms") {
  EnvelopeConstants e = envelope_constants(0.0, 1.0, 1.0, 1.0, 1.0);
  Norm euc = Norm::euclidean();
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  auto [v0, g0] = moreau_value_and_grad(e, euc, zero);
  CHECK(v0 == 0.0);
  CHECK(g0.cwiseAbs().maxCoeff() == 0.0);

  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd x = randn(3, rng);
    auto [v, g] = moreau_value_and_grad(e, euc, x);
    CHECK(v == doctest::Approx(x.squaredNorm() / 4.0).epsilon(1e-10));
    CHECK((g - x / 2.0).cwiseAbs().maxCoeff() <= 1e-10);
    // Quadratic homogeneity.
    auto [v2, g2] = moreau_value_and_grad(e, euc, (2.0 * x).eval());
    CHECK(v2 == doctest::Approx(4.0 * v).epsilon(1e-9));
  }
}

TEST_CASE("gradient matches central differences for all norm pairs") {
  Rng rng(7);
  Eigen::MatrixXd W(3, 3);
  W.setZero();
  W.diagonal() << 2.0, 1.0, 0.5;
  struct Pair {
    Norm norm;
    double mu;
  };
  std::vector<Pair> pairs = {{Norm::euclidean(), 1.0},
                             {Norm::weighted(W), 0.7},
                             {Norm::sup(), 0.5}};
  for (const auto& pr : pairs) {
    const double l_cs = pr.norm.l_cs(3), u_cs = pr.norm.u_cs(3);
    EnvelopeConstants e = envelope_constants(0.0, pr.mu, 1.0, l_cs, u_cs);
    for (int i = 0; i < 30; ++i) {
      Eigen::VectorXd x = randn(3, rng);
      auto [v, g] = moreau_value_and_grad(e, pr.norm, x);
      Eigen::VectorXd fd = fd_grad(e, pr.norm, x);
      const double rel =
          (g - fd).norm() / std::max(1.0, g.norm());
      CHECK(rel <= 1e-6);
      (void)v;
    }
  }
}

TEST_CASE("smoothness and sandwich inequalities") {
  Rng rng(11);
  Eigen::MatrixXd W(2, 2);
  W << 3.0, 1.0, 1.0, 2.0;
  std::vector<Norm> norms = {Norm::euclidean(), Norm::weighted(W), Norm::sup()};
  for (const auto& norm : norms) {
    const double mu = 0.8;
    EnvelopeConstants e =
        envelope_constants(0.0, mu, 1.0, norm.l_cs(2), norm.u_cs(2));
    for (int i = 0; i < 300; ++i) {
      Eigen::VectorXd x = randn(2, rng), y = randn(2, rng);
      auto [Mx, gx] = moreau_value_and_grad(e, norm, x);
      auto [My, gy] = moreau_value_and_grad(e, norm, y);
      (void)gy;
      // Smoothness of the envelope in the euclidean reference norm.
      CHECK(My <= Mx + gx.dot(y - x) + 0.5 * e.L_s * (y - x).squaredNorm() +
                      1e-9);
      // Sandwich l M <= ||x||_c^2 <= u M.
      const double nc = norm(x);
      CHECK(e.l * Mx <= nc * nc + 1e-9);
      CHECK(nc * nc <= e.u * Mx + 1e-9);
    }
  }
}

TEST_CASE("negative drift for a declared contraction") {
  // Fbar(x) = gamma x with gamma = 0.5, matching norms: eta = 1 exactly.
  const double gamma = 0.5;
  EnvelopeConstants e = envelope_constants(gamma, 1.0, 1.0, 1.0, 1.0);
  CHECK(e.eta == doctest::Approx(2.0 * (1.0 - gamma)).epsilon(1e-12));
  Norm euc = Norm::euclidean();
  Rng rng(13);
  for (int i = 0; i < 1000; ++i) {
    Eigen::VectorXd x = randn(2, rng);
    auto [M, g] = moreau_value_and_grad(e, euc, x);
    const double drift = g.dot(gamma * x - x);  // Fbar(x) - x, x* = 0
    CHECK(drift <= -e.eta * M + 1e-10);
  }
}
