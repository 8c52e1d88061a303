#include "saconc/markov.hpp"

#include <numeric>
#include <queue>

namespace saconc {

namespace {

constexpr double kRowSumTol = 1e-12;
constexpr double kStationaryTol = 1e-10;

// Reachability over the support graph of P (or its transpose).
std::vector<int> bfs_distances(const Eigen::MatrixXd& P, int source,
                               bool transpose) {
  const int n = static_cast<int>(P.rows());
  std::vector<int> dist(n, -1);
  std::queue<int> q;
  dist[source] = 0;
  q.push(source);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v = 0; v < n; ++v) {
      double w = transpose ? P(v, u) : P(u, v);
      if (w > 0.0 && dist[v] < 0) {
        dist[v] = dist[u] + 1;
        q.push(v);
      }
    }
  }
  return dist;
}

void check_ergodic(const Eigen::MatrixXd& P) {
  const int n = static_cast<int>(P.rows());
  // Strong connectivity: state 0 reaches everyone and is reached by everyone.
  auto fwd = bfs_distances(P, 0, /*transpose=*/false);
  auto bwd = bfs_distances(P, 0, /*transpose=*/true);
  for (int v = 0; v < n; ++v) {
    if (fwd[v] < 0 || bwd[v] < 0) {
      throw NotErgodic("transition graph is not strongly connected");
    }
  }
  // Aperiodicity: gcd over edges (u,v) of d(u)+1-d(v) equals 1, where d is
  // the BFS distance from state 0. This equals the gcd of all cycle lengths.
  long g = 0;
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (P(u, v) > 0.0) {
        g = std::gcd(g, static_cast<long>(fwd[u] + 1 - fwd[v]));
      }
    }
  }
  if (g != 1) {
    throw NotErgodic("chain is periodic (period " + std::to_string(g) + ")");
  }
}

Eigen::VectorXd solve_stationary(const Eigen::MatrixXd& P) {
  const int n = static_cast<int>(P.rows());
  // Solve pi^T (P - I) = 0 with the normalization sum(pi) = 1 by replacing
  // the last equation of (P^T - I) pi = 0 with the all-ones row.
  Eigen::MatrixXd A = P.transpose() - Eigen::MatrixXd::Identity(n, n);
  A.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  Eigen::VectorXd pi = A.partialPivLu().solve(b);
  double resid = (pi.transpose() * P - pi.transpose()).cwiseAbs().maxCoeff();
  if (!pi.allFinite() || resid > kStationaryTol) {
    throw SingularSystem("stationary distribution solve failed, residual " +
                         std::to_string(resid));
  }
  if (pi.minCoeff() <= 0.0) {
    throw NotErgodic("stationary distribution has a non-positive entry");
  }
  return pi;
}

}  // namespace

MarkovChain::MarkovChain(Eigen::MatrixXd P, std::vector<std::string> labels)
    : P_(std::move(P)), labels_(std::move(labels)) {
  const int n = static_cast<int>(P_.rows());
  if (n < 1 || P_.cols() != n) {
    throw BadParams("transition matrix must be square and non-empty");
  }
  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      double p = P_(i, j);
      if (p < 0.0 || p > 1.0) {
        throw BadParams("transition probability out of [0,1]");
      }
      row_sum += p;
    }
    if (std::abs(row_sum - 1.0) > kRowSumTol) {
      throw BadParams("row " + std::to_string(i) + " sums to " +
                      std::to_string(row_sum));
    }
  }
  if (!labels_.empty() && static_cast<int>(labels_.size()) != n) {
    throw BadParams("label count does not match state count");
  }
  check_ergodic(P_);
  pi_ = solve_stationary(P_);

  row_cdf_.resize(n, n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      acc += P_(i, j);
      row_cdf_(i, j) = acc;
    }
    row_cdf_(i, n - 1) = 1.0;  // guard against rounding in the last bucket
  }

  // Fundamental-matrix system I - P + 1*pi^T, factorized once.
  Eigen::MatrixXd Z = Eigen::MatrixXd::Identity(n, n) - P_ +
                      Eigen::VectorXd::Ones(n) * pi_.transpose();
  fundamental_lu_.compute(Z);
}

MarkovChain MarkovChain::from_json(const nlohmann::json& j) {
  if (!j.contains("P")) throw BadConfig("chain JSON missing \"P\"");
  const auto& rows = j.at("P");
  const int n = static_cast<int>(rows.size());
  Eigen::MatrixXd P(n, n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != n) {
      throw BadConfig("chain JSON \"P\" is not square");
    }
    for (int k = 0; k < n; ++k) P(i, k) = rows[i][k].get<double>();
  }
  std::vector<std::string> labels;
  if (j.contains("labels")) {
    labels = j.at("labels").get<std::vector<std::string>>();
  }
  return MarkovChain(std::move(P), std::move(labels));
}

nlohmann::json MarkovChain::to_json() const {
  nlohmann::json j;
  const int n = n_states();
  for (int i = 0; i < n; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int k = 0; k < n; ++k) row.push_back(P_(i, k));
    j["P"].push_back(row);
  }
  if (!labels_.empty()) j["labels"] = labels_;
  for (int i = 0; i < n; ++i) j["pi"].push_back(pi_(i));
  return j;
}

Eigen::VectorXd stationary_distribution(const MarkovChain& chain) {
  return chain.pi();
}

PoissonSolution solve_poisson(const MarkovChain& chain,
                              const Eigen::MatrixXd& g) {
  const int n = chain.n_states();
  if (static_cast<int>(g.rows()) != n) {
    throw BadParams("g must have one row per state");
  }
  // Canonical solution of (I - P + 1*pi^T) V = g - 1*gbar^T; satisfies both
  // the Poisson equation and pi.V = 0.
  Eigen::RowVectorXd gbar = chain.pi().transpose() * g;
  Eigen::MatrixXd rhs = g - Eigen::VectorXd::Ones(n) * gbar;
  Eigen::MatrixXd V = chain.fundamental_lu().solve(rhs);
  if (!V.allFinite()) {
    throw SingularSystem("Poisson solve produced non-finite values");
  }
  // Residual of the defining equation g - gbar + P V - V = 0.
  Eigen::MatrixXd resid = rhs + chain.P() * V - V;
  double r = resid.cwiseAbs().maxCoeff();
  double norm_r = (chain.pi().transpose() * V).cwiseAbs().maxCoeff();
  return PoissonSolution{std::move(V), std::max(r, norm_r)};
}

Eigen::VectorXd expected_return_times(const MarkovChain& chain) {
  const int n = chain.n_states();
  Eigen::VectorXd out(n);
  for (int s = 0; s < n; ++s) {
    // m_i = E[first hitting time of s from i], i != s:
    //   m_i = 1 + sum_{j != s} P(i,j) m_j.
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - chain.P();
    A.col(s).setZero();
    A(s, s) = 1.0;  // dummy equation m_s = 1 (unused below)
    Eigen::VectorXd b = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd m = A.partialPivLu().solve(b);
    if (!m.allFinite()) throw SingularSystem("first-passage solve failed");
    double ret = 1.0;
    for (int j = 0; j < n; ++j) {
      if (j != s) ret += chain.P()(s, j) * m(j);
    }
    out(s) = ret;
  }
  return out;
}

int step_state(const MarkovChain& chain, int s, Rng& rng) {
  const double v = rng.uniform();
  const auto& cdf = chain.row_cdf();
  const int n = chain.n_states();
  for (int j = 0; j < n; ++j) {
    if (v <= cdf(s, j)) return j;
  }
  return n - 1;
}

std::vector<int> sample_path(const MarkovChain& chain, int start, long length,
                             std::uint64_t seed) {
  if (start < 0 || start >= chain.n_states()) {
    throw BadParams("start state out of range");
  }
  Rng rng(seed);
  std::vector<int> path;
  path.reserve(static_cast<std::size_t>(length));
  int s = start;
  for (long k = 0; k < length; ++k) {
    path.push_back(s);
    s = step_state(chain, s, rng);
  }
  return path;
}

}  // namespace saconc
