#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "itm/certificates.hpp"
#include "itm/methods.hpp"
#include "itm/oracles.hpp"
#include "itm/schedules.hpp"

namespace itm::test {

inline Eigen::MatrixXd random_orthogonal(int d, std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd A(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) A(i, j) = n(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  return qr.householderQ();
}

// SPD matrix with spectrum inside [mu, L]; endpoints always present when d >= 2
// so the class constraints are active.
inline Eigen::MatrixXd random_spd(int d, double mu, double L, std::mt19937& rng,
                                  bool pin_endpoints = true) {
  std::uniform_real_distribution<double> u(mu, L);
  Eigen::VectorXd ev(d);
  for (int i = 0; i < d; ++i) ev(i) = u(rng);
  if (pin_endpoints && d >= 2) {
    ev(0) = mu;
    ev(d - 1) = L;
  }
  const Eigen::MatrixXd Q = random_orthogonal(d, rng);
  return Q * ev.asDiagonal() * Q.transpose();
}

inline FirstOrderOracle random_quadratic(int d, const ClassParams& params, std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXd xs(d);
  for (int i = 0; i < d; ++i) xs(i) = n(rng);
  return quadratic_oracle(random_spd(d, params.mu, params.L, rng), xs, 0.0, params);
}

inline Eigen::VectorXd random_vector(int d, std::mt19937& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v(i) = n(rng);
  return v;
}

// The optimized gradient method in its theta form, used as an independent
// reference for the q = 0 limit. Output is z_N (the distance-optimal iterate).
inline Trace run_ogm_theta(const FirstOrderOracle& oracle, const Eigen::VectorXd& x0, int N) {
  const double L = oracle.params().L;
  const std::vector<double> theta = ogm_theta_sequence(N);
  Trace t;
  t.dim = oracle.dim();
  Eigen::VectorXd x = x0, z = x0;
  t.x_seq.push_back(x);
  t.z_seq.push_back(z);
  for (int k = 0; k < N; ++k) {
    const Eigen::VectorXd y = (theta[k] - 1.0) / theta[k] * x + z / theta[k];
    auto [fy, gy] = oracle(y);
    t.y_seq.push_back(y);
    t.evals.push_back({y, gy, fy});
    x = y - gy / L;
    z = z - (2.0 * theta[k] / L) * gy;
    t.x_seq.push_back(x);
    t.z_seq.push_back(z);
  }
  t.output = z;
  return t;
}

// Worst ratio of an h-form method over the one-dimensional quadratic family
// f(x) = kappa x^2 / 2, kappa in [mu, L]; a lower bound on the true worst case.
inline double quadratic_family_worst(const FixedStepMethod& h_form, CriterionKind kind,
                                     double cw, double cf, int grid = 4001) {
  const double mu = h_form.params.mu;
  const double L = h_form.params.L;
  double worst = 0.0;
  for (int s = 0; s < grid; ++s) {
    const double kappa = mu + (L - mu) * s / (grid - 1);
    ClassParams params(h_form.params.mu, h_form.params.L);
    Eigen::MatrixXd H(1, 1);
    H(0, 0) = kappa;
    const auto oracle = quadratic_oracle(H, Eigen::VectorXd::Zero(1), 0.0, params);
    Eigen::VectorXd x0(1);
    x0(0) = 1.0;
    const Trace t = run_fixed_step(h_form, oracle, x0);
    double ratio;
    if (kind == CriterionKind::kDistOverDist) {
      ratio = t.output.squaredNorm();
    } else {
      const double f_end = 0.5 * kappa * t.output.squaredNorm();
      const double f_begin = 0.5 * kappa;
      ratio = f_end / (cw * 1.0 + cf * f_begin);
    }
    worst = std::max(worst, ratio);
  }
  return worst;
}

}  // namespace itm::test
