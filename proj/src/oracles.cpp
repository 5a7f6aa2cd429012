#include "itm/oracles.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace itm {

std::pair<double, Eigen::VectorXd> FirstOrderOracle::operator()(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) {
    throw std::invalid_argument("oracle: dimension mismatch");
  }
  auto out = eval_(x);
  if (!std::isfinite(out.first) || !out.second.allFinite()) {
    throw std::runtime_error("oracle: non-finite value or gradient");
  }
  return out;
}

void SampledTriplets::add(Eigen::VectorXd xi, Eigen::VectorXd gi, double fi) {
  if (!x.empty() && (xi.size() != x.front().size() || gi.size() != x.front().size())) {
    throw std::invalid_argument("SampledTriplets: inconsistent dimension");
  }
  x.push_back(std::move(xi));
  g.push_back(std::move(gi));
  f.push_back(fi);
}

FirstOrderOracle quadratic_oracle(const Eigen::MatrixXd& H, const Eigen::VectorXd& x_star,
                                  double f_star, const ClassParams& cls) {
  if (H.rows() != H.cols() || H.rows() != x_star.size()) {
    throw std::invalid_argument("quadratic_oracle: H and x_star sizes disagree");
  }
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + H.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("quadratic_oracle: H must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo < cls.mu - 1e-9 || hi > cls.L + 1e-9) {
    throw std::invalid_argument("quadratic_oracle: spectrum outside [mu, L]");
  }
  const int d = static_cast<int>(H.rows());
  auto eval = [H, x_star, f_star](const Eigen::VectorXd& x) {
    const Eigen::VectorXd r = x - x_star;
    const Eigen::VectorXd Hr = H * r;
    return std::make_pair(0.5 * r.dot(Hr) + f_star, Hr);
  };
  return FirstOrderOracle(d, cls, std::move(eval), x_star, f_star);
}

FirstOrderOracle quadratic_oracle_from_json(const nlohmann::json& j, const ClassParams& cls) {
  const auto ev = j.at("eigenvalues").get<std::vector<double>>();
  const auto xs = j.at("xstar").get<std::vector<double>>();
  if (ev.size() != xs.size()) {
    throw std::invalid_argument("quadratic oracle json: eigenvalues/xstar sizes disagree");
  }
  const double fstar = j.value("fstar", 0.0);
  const int d = static_cast<int>(ev.size());
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd x_star(d);
  for (int i = 0; i < d; ++i) {
    H(i, i) = ev[i];
    x_star(i) = xs[i];
  }
  return quadratic_oracle(H, x_star, fstar, cls);
}

double interpolation_slack(const Eigen::VectorXd& xi, const Eigen::VectorXd& gi, double fi,
                           const Eigen::VectorXd& xj, const Eigen::VectorXd& gj, double fj,
                           double mu, double L) {
  const Eigen::VectorXd dx = xi - xj;
  const Eigen::VectorXd dg = gi - gj;
  double slack = fi - fj - gj.dot(dx) - dg.squaredNorm() / (2.0 * L);
  if (mu > 0.0) {
    slack -= mu / (2.0 * (1.0 - mu / L)) * (dx - dg / L).squaredNorm();
  }
  return slack;
}

InterpolationReport interpolation_check(const SampledTriplets& s, double mu, double L) {
  if (!(mu < L)) throw std::invalid_argument("interpolation_check: need mu < L");
  InterpolationReport report{0.0, -1, -1};
  bool first = true;
  const int n = static_cast<int>(s.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double slack = interpolation_slack(s.x[i], s.g[i], s.f[i], s.x[j], s.g[j], s.f[j], mu, L);
      if (first || slack < report.min_slack) {
        report.min_slack = slack;
        report.worst_i = i;
        report.worst_j = j;
        first = false;
      }
    }
  }
  return report;
}

FirstOrderOracle shift_to_tilde(const FirstOrderOracle& oracle) {
  if (!oracle.x_star()) {
    throw std::invalid_argument("shift_to_tilde: oracle must carry its minimizer");
  }
  const Eigen::VectorXd xs = *oracle.x_star();
  const double mu = oracle.params().mu;
  const double L = oracle.params().L;
  auto eval = [oracle, xs, mu](const Eigen::VectorXd& x) {
    auto [f, g] = oracle(x);
    const Eigen::VectorXd r = x - xs;
    return std::make_pair(f - 0.5 * mu * r.squaredNorm(), Eigen::VectorXd(g - mu * r));
  };
  ClassParams shifted(0.0, L - mu);
  if (oracle.f_star()) {
    return FirstOrderOracle(oracle.dim(), shifted, std::move(eval), xs, *oracle.f_star());
  }
  return FirstOrderOracle(oracle.dim(), shifted, std::move(eval));
}

}  // namespace itm
