#include "saconc/envelope.hpp"

#include <algorithm>
#include <cmath>

namespace saconc {

double mu_condition(double gamma_c, double mu, double l_cs, double u_cs) {
  return gamma_c * std::sqrt((1.0 + mu * u_cs * u_cs) /
                             (1.0 + mu * l_cs * l_cs));
}

double choose_mu(double gamma_c, double l_cs, double u_cs, double margin) {
  if (gamma_c < 0.0 || gamma_c >= 1.0) throw BadParams("gamma_c must be in [0,1)");
  if (!(l_cs > 0.0) || l_cs > u_cs) throw BadParams("need 0 < l_cs <= u_cs");
  if (!(margin > 0.0) || margin >= 1.0) throw BadParams("margin must be in (0,1)");
  const double target = 1.0 - margin;
  if (mu_condition(gamma_c, 1.0, l_cs, u_cs) <= target) return 1.0;
  // The condition value rises from gamma_c (mu -> 0) toward the asymptote
  // gamma_c u_cs / l_cs, so when mu = 1 fails we must shrink mu. If even the
  // mu -> 0 limit misses the target, no mu works.
  if (gamma_c > target) {
    throw Infeasible("condition cannot reach 1 - margin for any mu; asymptotic value " +
                     std::to_string(gamma_c * u_cs / l_cs));
  }
  double lo = 1.0;
  while (mu_condition(gamma_c, lo, l_cs, u_cs) > target) lo *= 0.5;
  double hi = lo * 2.0;  // condition(lo) <= target < condition(hi)
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mu_condition(gamma_c, mid, l_cs, u_cs) <= target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

EnvelopeConstants envelope_constants(double gamma_c, double mu, double L,
                                     double l_cs, double u_cs) {
  const double cond = mu_condition(gamma_c, mu, l_cs, u_cs);
  if (cond >= 1.0) {
    throw ConditionViolated("mu condition value " + std::to_string(cond) +
                            " >= 1");
  }
  EnvelopeConstants c;
  c.gamma_c = gamma_c;
  c.mu = mu;
  c.L = L;
  c.eta = 2.0 * (1.0 - cond);
  c.L_s = L / mu;
  c.l = 2.0 * (1.0 + mu * l_cs * l_cs);
  c.u = 2.0 * (1.0 + mu * u_cs * u_cs);
  c.l_cs = l_cs;
  c.u_cs = u_cs;
  return c;
}

std::pair<double, Eigen::VectorXd> moreau_value_and_grad(
    const EnvelopeConstants& constants, const Norm& norm_c,
    const Eigen::VectorXd& x) {
  const double mu = constants.mu;
  const int d = static_cast<int>(x.size());
  switch (norm_c.kind) {
    case Norm::Kind::Euclidean: {
      // min_u { ||u||^2/2 + ||x-u||^2/(2 mu) }: u* = x/(1+mu).
      const double value = x.squaredNorm() / (2.0 * (1.0 + mu));
      return {value, x / (1.0 + mu)};
    }
    case Norm::Kind::Weighted: {
      // (W + I/mu) u = x/mu.
      Eigen::MatrixXd K = norm_c.W + Eigen::MatrixXd::Identity(d, d) / mu;
      Eigen::VectorXd u = K.ldlt().solve(x / mu);
      const double value =
          0.5 * u.dot(norm_c.W * u) + (x - u).squaredNorm() / (2.0 * mu);
      return {value, (x - u) / mu};
    }
    case Norm::Kind::Sup: {
      // Optimal u is clamp(x, -t, t); t minimizes
      //   t^2/2 + (1/2mu) sum_i (|x_i| - t)_+^2,
      // giving t (mu + m) = S_m over the active set of the m largest |x_i|.
      Eigen::VectorXd a = x.cwiseAbs();
      std::vector<double> sorted(a.data(), a.data() + d);
      std::sort(sorted.begin(), sorted.end(), std::greater<double>());
      double t = 0.0, S = 0.0;
      for (int m = 1; m <= d; ++m) {
        S += sorted[m - 1];
        const double cand = S / (mu + m);
        const double lower = (m < d) ? sorted[m] : 0.0;
        if (cand <= sorted[m - 1] + 1e-300 && cand >= lower) {
          t = cand;
          break;
        }
        if (m == d) t = cand;
      }
      Eigen::VectorXd u = x.cwiseMax(-t).cwiseMin(t);
      const double value = 0.5 * t * t + (x - u).squaredNorm() / (2.0 * mu);
      return {value, (x - u) / mu};
    }
  }
  return {0.0, Eigen::VectorXd::Zero(d)};
}

}  // namespace saconc
