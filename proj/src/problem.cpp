#include "saconc/problem.hpp"

#include <cmath>

namespace saconc {

namespace {

Eigen::MatrixXd matrix_sqrt_spd(const Eigen::MatrixXd& W) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(W);
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw BadParams("weight matrix must be positive definite");
  }
  return es.operatorSqrt();
}

double spectral_norm(const Eigen::MatrixXd& A) {
  return A.jacobiSvd().singularValues()(0);
}

}  // namespace

Norm Norm::euclidean() { return Norm{}; }

Norm Norm::weighted(const Eigen::MatrixXd& W) {
  Norm n;
  n.kind = Kind::Weighted;
  n.W = 0.5 * (W + W.transpose());
  n.Ws = matrix_sqrt_spd(n.W);
  return n;
}

Norm Norm::sup() {
  Norm n;
  n.kind = Kind::Sup;
  return n;
}

double Norm::operator()(const Eigen::VectorXd& x) const {
  switch (kind) {
    case Kind::Euclidean:
      return x.norm();
    case Kind::Weighted:
      return std::sqrt(x.dot(W * x));
    case Kind::Sup:
      return x.cwiseAbs().maxCoeff();
  }
  return 0.0;
}

double Norm::induced(const Eigen::MatrixXd& A) const {
  switch (kind) {
    case Kind::Euclidean:
      return spectral_norm(A);
    case Kind::Weighted:
      // sup ||Ax||_W / ||x||_W = ||Ws A Ws^-1||_2.
      return spectral_norm(Ws * A * Ws.inverse());
    case Kind::Sup:
      // Max absolute row sum.
      return A.cwiseAbs().rowwise().sum().maxCoeff();
  }
  return 0.0;
}

double Norm::l_cs(int dim) const {
  switch (kind) {
    case Kind::Euclidean:
      return 1.0;
    case Kind::Weighted: {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(W);
      return std::sqrt(es.eigenvalues().minCoeff());
    }
    case Kind::Sup:
      return 1.0 / std::sqrt(static_cast<double>(dim));
  }
  return 1.0;
}

double Norm::u_cs(int dim) const {
  switch (kind) {
    case Kind::Euclidean:
      return 1.0;
    case Kind::Weighted: {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(W);
      return std::sqrt(es.eigenvalues().maxCoeff());
    }
    case Kind::Sup:
      return 1.0;
  }
  return 1.0;
}

Eigen::VectorXd average_operator(const ProblemSpec& spec,
                                 const Eigen::VectorXd& x) {
  const int n = spec.chain->n_states();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(spec.dim);
  Eigen::VectorXd buf(spec.dim);
  for (int s = 0; s < n; ++s) {
    spec.F(x, s, buf);
    acc += spec.chain->pi()(s) * buf;
  }
  return acc;
}

NoiseBounds estimate_noise_bounds(const ProblemSpec& spec, int n_radii,
                                  int n_dirs, double radius,
                                  std::uint64_t seed) {
  if (n_radii < 2 || n_dirs < 1) {
    throw GridTooSmall("need at least 2 radii and 1 direction");
  }
  Rng rng(seed);
  const int d = spec.dim;
  const int n = spec.chain->n_states();
  std::vector<Eigen::VectorXd> dirs;
  dirs.reserve(n_dirs);
  // Random euclidean-unit directions plus coordinate axes (extremes for the
  // sup-norm).
  for (int i = 0; i < n_dirs; ++i) {
    Eigen::VectorXd v(d);
    for (int j = 0; j < d; ++j) v(j) = rng.normal();
    if (v.norm() == 0.0) v.setOnes();
    dirs.push_back(v / v.norm());
  }
  for (int j = 0; j < d && static_cast<int>(dirs.size()) < n_dirs + d; ++j) {
    dirs.push_back(Eigen::VectorXd::Unit(d, j));
  }

  const double r_min = radius * 1e-3;
  auto radius_at = [&](int i) {
    return r_min * std::pow(radius / r_min,
                            static_cast<double>(i) / (n_radii - 1));
  };

  // Two-point affine fit: slope from the extreme radii of the per-radius
  // maxima, intercept as the max residual (so the envelope touches the grid).
  auto fit = [&](const std::vector<double>& r, const std::vector<double>& v) {
    double v_lo = -1.0, v_hi = -1.0, r_lo = 0.0, r_hi = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (r[i] <= r_min * (1.0 + 1e-12) && v[i] > v_lo) {
        v_lo = v[i];
        r_lo = r[i];
      }
      if (r[i] >= radius * (1.0 - 1e-12) && v[i] > v_hi) {
        v_hi = v[i];
        r_hi = r[i];
      }
    }
    double A = 0.0;
    if (r_hi > r_lo) A = std::max(0.0, (v_hi - v_lo) / (r_hi - r_lo));
    double B = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      B = std::max(B, v[i] - A * r[i]);
    }
    return std::pair<double, double>(A, B);
  };

  std::vector<double> r1, v1, r3, v3;
  Eigen::VectorXd buf(d);
  for (int i = 0; i < n_radii; ++i) {
    const double r = radius_at(i);
    for (const auto& dir : dirs) {
      // Multiplicative-noise envelope: x on a sphere around the origin.
      Eigen::VectorXd x = r * dir;
      Eigen::VectorXd fbar = average_operator(spec, x);
      double worst = 0.0;
      for (int s = 0; s < n; ++s) {
        spec.F(x, s, buf);
        worst = std::max(worst, spec.norm_c(buf - fbar));
      }
      r1.push_back(spec.norm_c(x));
      v1.push_back(worst);

      // Drift envelope: x on a sphere around the fixed point.
      Eigen::VectorXd y = spec.x_star + r * dir;
      Eigen::VectorXd fbar_y = average_operator(spec, y);
      r3.push_back(spec.norm_c(y - spec.x_star));
      v3.push_back(spec.norm_c(fbar_y - spec.x_star));
    }
  }

  NoiseBounds nb = spec.bounds;
  auto [A1, B1] = fit(r1, v1);
  auto [A3, B3] = fit(r3, v3);
  nb.A1 = A1;
  nb.B1 = B1;
  nb.A3 = A3;
  nb.B3 = B3;
  return nb;
}

std::pair<Eigen::MatrixXd, double> solve_lyapunov_and_beta(
    const Eigen::MatrixXd& A_bar) {
  const int d = static_cast<int>(A_bar.rows());
  Eigen::EigenSolver<Eigen::MatrixXd> es(A_bar);
  if (es.eigenvalues().real().maxCoeff() > -1e-10) {
    throw NotHurwitz("matrix has an eigenvalue with real part >= -1e-10");
  }
  // Vectorized Lyapunov solve: (I (x) A' + A' (x) I) vec(P) = -vec(I).
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(d * d, d * d);
  const Eigen::MatrixXd At = A_bar.transpose();
  for (int i = 0; i < d; ++i) {
    K.block(i * d, i * d, d, d) += At;  // I (x) A'
    for (int j = 0; j < d; ++j) {
      K.block(i * d, j * d, d, d) +=
          At(i, j) * Eigen::MatrixXd::Identity(d, d);  // A' (x) I
    }
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d * d);
  for (int i = 0; i < d; ++i) rhs(i * d + i) = -1.0;
  Eigen::VectorXd vecP = K.partialPivLu().solve(rhs);
  Eigen::MatrixXd P(d, d);
  for (int j = 0; j < d; ++j) P.col(j) = vecP.segment(j * d, d);
  P = 0.5 * (P + P.transpose());
  Eigen::MatrixXd resid = A_bar.transpose() * P + P * A_bar +
                          Eigen::MatrixXd::Identity(d, d);
  if (resid.cwiseAbs().maxCoeff() > 1e-10) {
    throw SingularSystem("Lyapunov residual too large");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> pe(P);
  if (pe.eigenvalues().minCoeff() <= 0.0) {
    throw NotHurwitz("Lyapunov solution is not positive definite");
  }
  Eigen::MatrixXd APA = A_bar.transpose() * P * A_bar;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ae(APA);
  const double beta = 1.0 / (2.0 * ae.eigenvalues().maxCoeff());
  return {P, beta};
}

Eigen::VectorXd fixed_point(const ProblemSpec& spec) {
  if (!spec.bounds.gamma_c) {
    throw MissingLipschitz("fixed_point needs a declared contraction factor");
  }
  Eigen::VectorXd x = Eigen::VectorXd::Zero(spec.dim);
  constexpr int kMaxIter = 200000;
  for (int it = 0; it < kMaxIter; ++it) {
    Eigen::VectorXd next = average_operator(spec, x);
    if (spec.norm_c(next - x) <= 1e-13) {
      // Polish once more and confirm the residual.
      Eigen::VectorXd fin = average_operator(spec, next);
      if (spec.norm_c(fin - next) <= 1e-12) return next;
    }
    x = next;
  }
  throw NoConvergence("fixed-point iteration did not converge (gamma_c misdeclared?)");
}

std::pair<double, double> poisson_constants_L1_L2(const ProblemSpec& spec) {
  if (!spec.bounds.L_F || !spec.bounds.gamma_c) {
    throw MissingLipschitz("need L_F and gamma_c for Poisson constants");
  }
  const double tau_max = expected_return_times(*spec.chain).maxCoeff();
  const double L1 = (*spec.bounds.L_F + *spec.bounds.gamma_c) * (1.0 + tau_max);

  const int n = spec.chain->n_states();
  Eigen::MatrixXd g(n, spec.dim);
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(spec.dim);
  Eigen::VectorXd buf(spec.dim);
  for (int s = 0; s < n; ++s) {
    spec.F(zero, s, buf);
    g.row(s) = buf.transpose();
  }
  PoissonSolution sol = solve_poisson(*spec.chain, g);
  double v0_max = 0.0;
  for (int s = 0; s < n; ++s) {
    v0_max = std::max(v0_max, spec.norm_c(sol.V.row(s).transpose()));
  }
  const double L2 = L1 * spec.norm_c(spec.x_star) + v0_max;
  return {L1, L2};
}

LinearSAProblem make_linear_sa(const Eigen::MatrixXd& A_bar,
                               const Eigen::VectorXd& b_bar,
                               const std::vector<Eigen::MatrixXd>& A_of_s,
                               const std::vector<Eigen::VectorXd>& b_of_s,
                               const MarkovChain& chain) {
  const int n = chain.n_states();
  if (static_cast<int>(A_of_s.size()) != n ||
      static_cast<int>(b_of_s.size()) != n) {
    throw BadParams("need one (A(s), b(s)) pair per state");
  }
  Eigen::MatrixXd A_mean = Eigen::MatrixXd::Zero(A_bar.rows(), A_bar.cols());
  Eigen::VectorXd b_mean = Eigen::VectorXd::Zero(b_bar.size());
  for (int s = 0; s < n; ++s) {
    A_mean += chain.pi()(s) * A_of_s[s];
    b_mean += chain.pi()(s) * b_of_s[s];
  }
  if ((A_mean - A_bar).cwiseAbs().maxCoeff() > 1e-10 ||
      (b_mean - b_bar).cwiseAbs().maxCoeff() > 1e-10) {
    throw BadParams("stationary means of A(s), b(s) do not match A_bar, b_bar");
  }
  LinearSAProblem lin;
  lin.A_bar = A_bar;
  lin.b_bar = b_bar;
  lin.A_of_s = A_of_s;
  lin.b_of_s = b_of_s;
  std::tie(lin.P_bar, lin.beta) = solve_lyapunov_and_beta(A_bar);
  return lin;
}

ProblemSpec linear_sa_spec(std::shared_ptr<const MarkovChain> chain,
                           const LinearSAProblem& lin) {
  const int d = static_cast<int>(lin.A_bar.rows());
  ProblemSpec spec;
  spec.name = "linear_sa";
  spec.chain = std::move(chain);
  spec.dim = d;
  spec.norm_c = Norm::weighted(lin.P_bar);
  const double beta = lin.beta;
  // F_beta(x, s) = beta A(s) x + beta b(s) + x.
  auto A = lin.A_of_s;
  auto b = lin.b_of_s;
  spec.F = [A, b, beta](const Eigen::VectorXd& x, int s, Eigen::VectorXd& out) {
    out.noalias() = beta * (A[s] * x);
    out += beta * b[s] + x;
  };
  spec.x_star = -lin.A_bar.partialPivLu().solve(lin.b_bar);

  // Closed-form envelope constants in the P_bar norm, scaled by beta so they
  // certify the beta-scaled operator actually iterated.
  double maxA = 0.0, maxB = 0.0;
  for (int s = 0; s < spec.chain->n_states(); ++s) {
    maxA = std::max(maxA, spec.norm_c.induced(lin.A_of_s[s]));
    maxB = std::max(maxB, spec.norm_c(lin.b_of_s[s]));
  }
  NoiseBounds nb;
  nb.A1 = beta * (maxA + spec.norm_c.induced(lin.A_bar));
  nb.B1 = beta * (maxB + spec.norm_c(lin.b_bar));
  nb.B2 = 0.0;
  // Contraction factor of Fbar_beta(x) = (I + beta A_bar) x + beta b_bar.
  const double gamma_c = spec.norm_c.induced(
      Eigen::MatrixXd::Identity(d, d) + beta * lin.A_bar);
  if (gamma_c >= 1.0) {
    throw ConditionViolated("beta-scaled averaged operator is not a contraction");
  }
  nb.gamma_c = gamma_c;
  nb.A3 = gamma_c;
  nb.B3 = 0.0;
  nb.L_F = beta * maxA + 1.0;  // sup_s (beta ||A(s)|| + ||I||)
  spec.bounds = nb;
  std::tie(spec.bounds.L1, spec.bounds.L2) = poisson_constants_L1_L2(spec);
  return spec;
}

namespace {

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(static_cast<int>(j.size()));
  int i = 0;
  for (const auto& e : j) v(i++) = e.get<double>();
  return v;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const int r = static_cast<int>(j.size());
  if (r == 0) throw BadConfig("empty matrix");
  const int c = static_cast<int>(j.at(0).size());
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i) {
    if (static_cast<int>(j.at(i).size()) != c) {
      throw BadConfig("ragged matrix rows");
    }
    for (int k = 0; k < c; ++k) m(i, k) = j.at(i).at(k).get<double>();
  }
  return m;
}

}  // namespace

ProblemSpec make_stationary_mean(std::shared_ptr<const MarkovChain> chain,
                                 const Eigen::VectorXd& f) {
  if (f.size() != chain->n_states()) {
    throw BadParams("need one observation value per state");
  }
  ProblemSpec spec;
  spec.name = "stationary_mean";
  spec.chain = chain;
  spec.dim = 1;
  spec.norm_c = Norm::euclidean();
  const Eigen::VectorXd fv = f;
  spec.F = [fv](const Eigen::VectorXd&, int s, Eigen::VectorXd& out) {
    out(0) = fv(s);
  };
  const double fbar = chain->pi().dot(f);
  spec.x_star = Eigen::VectorXd::Constant(1, fbar);

  NoiseBounds nb;
  nb.A1 = 0.0;
  nb.B1 = (f.array() - fbar).abs().maxCoeff();
  nb.A3 = 0.0;
  nb.B3 = 0.0;
  nb.gamma_c = 0.0;
  nb.L_F = 0.0;
  spec.bounds = nb;
  std::tie(spec.bounds.L1, spec.bounds.L2) = poisson_constants_L1_L2(spec);
  return spec;
}

ProblemSpec make_contraction_demo(std::shared_ptr<const MarkovChain> chain,
                                  const Eigen::VectorXd& slope_of_s,
                                  const Eigen::VectorXd& intercept_of_s) {
  const int n = chain->n_states();
  if (slope_of_s.size() != n || intercept_of_s.size() != n) {
    throw BadParams("need one (slope, intercept) pair per state");
  }
  const double slope_bar = chain->pi().dot(slope_of_s);
  if (!(slope_bar >= 0.0) || !(slope_bar < 1.0)) {
    throw BadParams("mean slope must lie in [0, 1)");
  }
  ProblemSpec spec;
  spec.name = "contraction_demo";
  spec.chain = chain;
  spec.dim = 1;
  spec.norm_c = Norm::euclidean();
  const Eigen::VectorXd sl = slope_of_s, ic = intercept_of_s;
  spec.F = [sl, ic](const Eigen::VectorXd& x, int s, Eigen::VectorXd& out) {
    out(0) = sl(s) * x(0) + ic(s);
  };
  const double ic_bar = chain->pi().dot(intercept_of_s);
  spec.x_star = Eigen::VectorXd::Constant(1, ic_bar / (1.0 - slope_bar));

  NoiseBounds nb;
  nb.A1 = (slope_of_s.array() - slope_bar).abs().maxCoeff();
  nb.B1 = (intercept_of_s.array() - ic_bar).abs().maxCoeff();
  nb.A3 = slope_bar;
  nb.B3 = 0.0;
  nb.gamma_c = slope_bar;
  nb.L_F = slope_of_s.array().abs().maxCoeff();
  spec.bounds = nb;
  std::tie(spec.bounds.L1, spec.bounds.L2) = poisson_constants_L1_L2(spec);
  return spec;
}

ProblemSpec make_scalar_counterexample(double a, double b, double N) {
  if (!(N > 0.0)) throw BadParams("N must be > 0");
  // i.i.d. states: both rows equal (N/(N+1), 1/(N+1)); state 0 carries the
  // value a, state 1 the value a + N.
  Eigen::MatrixXd P(2, 2);
  P << N / (N + 1.0), 1.0 / (N + 1.0), N / (N + 1.0), 1.0 / (N + 1.0);
  auto chain = std::make_shared<const MarkovChain>(
      P, std::vector<std::string>{"a", "a+N"});
  Eigen::VectorXd sval(2);
  sval << a, a + N;
  const double s_bar = chain->pi().dot(sval);

  ProblemSpec spec;
  spec.name = "scalar_counterexample";
  spec.chain = chain;
  spec.dim = 1;
  spec.norm_c = Norm::euclidean();
  spec.iid_noise = true;
  spec.F = [sval, a, b](const Eigen::VectorXd& x, int s, Eigen::VectorXd& out) {
    out(0) = sval(s) * x(0) + (sval(s) - a) * b;
  };
  if (s_bar < 1.0) {
    spec.x_star = Eigen::VectorXd::Constant(
        1, (s_bar - a) * b / (1.0 - s_bar));
    spec.bounds.gamma_c = (s_bar >= 0.0) ? s_bar : std::abs(s_bar);
  } else {
    spec.x_star = Eigen::VectorXd::Zero(1);
  }
  // F(x,s) - Fbar(x) = (s - s_bar)(x + b).
  spec.bounds.A1 = (sval.array() - s_bar).abs().maxCoeff();
  spec.bounds.B1 = spec.bounds.A1 * std::abs(b);
  spec.bounds.A3 = std::abs(s_bar);
  spec.bounds.B3 = 0.0;
  spec.bounds.L_F = sval.array().abs().maxCoeff();
  if (s_bar < 1.0) {
    std::tie(spec.bounds.L1, spec.bounds.L2) = poisson_constants_L1_L2(spec);
  }
  return spec;
}

std::vector<std::string> problem_catalog() {
  return {"stationary_mean", "linear_sa", "scalar_counterexample",
          "contraction_demo"};
}

ProblemSpec named_problem(const std::string& name,
                          const nlohmann::json& params) {
  if (name == "stationary_mean") {
    auto chain = std::make_shared<const MarkovChain>(
        MarkovChain::from_json(params.at("chain")));
    return make_stationary_mean(chain, vector_from_json(params.at("f")));
  }
  if (name == "contraction_demo") {
    auto chain = std::make_shared<const MarkovChain>(
        MarkovChain::from_json(params.at("chain")));
    return make_contraction_demo(chain,
                                 vector_from_json(params.at("slope")),
                                 vector_from_json(params.at("intercept")));
  }
  if (name == "scalar_counterexample") {
    return make_scalar_counterexample(params.at("a").get<double>(),
                                      params.at("b").get<double>(),
                                      params.at("N").get<double>());
  }
  if (name == "linear_sa") {
    auto chain = std::make_shared<const MarkovChain>(
        MarkovChain::from_json(params.at("chain")));
    const int n = chain->n_states();
    std::vector<Eigen::MatrixXd> As;
    std::vector<Eigen::VectorXd> bs;
    for (int s = 0; s < n; ++s) {
      As.push_back(matrix_from_json(params.at("A_per_state").at(s)));
      bs.push_back(vector_from_json(params.at("b_per_state").at(s)));
    }
    LinearSAProblem lin =
        make_linear_sa(matrix_from_json(params.at("A_bar")),
                       vector_from_json(params.at("b_bar")), As, bs, *chain);
    return linear_sa_spec(chain, lin);
  }
  throw BadConfig("unknown problem builder \"" + name + "\"");
}

ProblemSpec problem_from_json(const nlohmann::json& j) {
  if (j.contains("builder")) {
    return named_problem(j.at("builder").get<std::string>(), j);
  }
  if (j.contains("A_bar")) {
    return named_problem("linear_sa", j);
  }
  throw BadConfig("problem JSON needs \"builder\" or a linear system");
}

}  // namespace saconc
