#include "itm/certificates.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "itm/pep.hpp"

namespace itm {

double psi_value(const Eigen::VectorXd& y, const Eigen::VectorXd& grad, double fval,
                 const Eigen::VectorXd& x_star, double f_star, const ClassParams& params) {
  const double L = params.L;
  double psi = fval - f_star - grad.squaredNorm() / (2.0 * L);
  if (params.mu > 0.0) {
    psi -= params.mu / (2.0 * (1.0 - params.q)) * (y - grad / L - x_star).squaredNorm();
  }
  return psi;
}

PotentialReport potential_decrease_check(const Trace& trace, const Schedule& schedule,
                                         const FirstOrderOracle& oracle) {
  if (trace.z_seq.empty() || trace.y_seq.empty()) {
    throw std::invalid_argument("potential_decrease_check: trace lacks the y/z sequences");
  }
  if (!oracle.x_star() || !oracle.f_star()) {
    throw std::invalid_argument("potential_decrease_check: oracle must carry (x_star, f_star)");
  }
  const int N = schedule.N;
  if (static_cast<int>(trace.z_seq.size()) != N + 1) {
    throw std::invalid_argument("potential_decrease_check: trace horizon differs from schedule");
  }
  const Eigen::VectorXd& xs = *oracle.x_star();
  const double fs = *oracle.f_star();
  const auto& p = schedule.params;

  PotentialReport report;
  for (int k = 0; k <= N; ++k) {
    PotentialState st;
    st.k = k;
    st.A_k = schedule.A[k];
    st.dist_sq = (trace.z_seq[k] - xs).squaredNorm();
    st.psi_prev = k == 0 ? 0.0
                         : psi_value(trace.y_seq[k - 1], trace.evals[k - 1].grad,
                                     trace.evals[k - 1].fval, xs, fs, p);
    st.phi = (1.0 - p.q) * st.A_k * st.psi_prev + (p.L + p.mu * st.A_k) * st.dist_sq;
    report.states.push_back(st);
  }
  for (int k = 0; k < N; ++k) {
    const double slack = 1e-9 * std::max(1.0, report.states[k].phi);
    const double margin = report.states[k + 1].phi - report.states[k].phi - slack;
    if (margin > 0.0) {
      report.nonincreasing = false;
      if (report.first_violation < 0) report.first_violation = k;
    }
    report.worst_margin = std::max(report.worst_margin, margin);
  }
  return report;
}

double weighted_sum_identity_check(double A_k, const ClassParams& params, std::mt19937& rng,
                                   std::optional<double> A_next, int dim) {
  if (A_k < 0.0) throw std::invalid_argument("weighted_sum_identity_check: A_k >= 0 required");
  const double q = params.q;
  const double L = params.L;
  const double mu = params.mu;
  const double A1 = A_next.value_or(
      ((1.0 + q) * A_k + 2.0 * (1.0 + std::sqrt((1.0 + A_k) * (1.0 + q * A_k)))) /
      ((1.0 - q) * (1.0 - q)));

  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto rvec = [&] {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = u(rng);
    return v;
  };
  const Eigen::VectorXd xs = rvec(), zk = rvec(), ykm1 = rvec(), gkm1 = rvec(), gk = rvec();
  const double fs = u(rng), fykm1 = u(rng), fyk = u(rng);

  const double beta = A_k / ((1.0 - q) * A1);
  const double delta = 0.5 * ((1.0 - q) * (1.0 - q) * A1 - (1.0 + q) * A_k) / (1.0 + q + q * A_k);
  const Eigen::VectorXd yk = (1.0 - beta) * zk + beta * (ykm1 - gkm1 / L);
  const Eigen::VectorXd zk1 = (1.0 - q * delta) * zk + q * delta * yk - (delta / L) * gk;

  auto psi = [&](const Eigen::VectorXd& y, const Eigen::VectorXd& g, double fy) {
    return fy - fs - g.squaredNorm() / (2.0 * L) -
           mu / (2.0 * (1.0 - q)) * (y - g / L - xs).squaredNorm();
  };
  const double phi_k = (1.0 - q) * A_k * psi(ykm1, gkm1, fykm1) +
                       (L + mu * A_k) * (zk - xs).squaredNorm();
  const double phi_k1 =
      (1.0 - q) * A1 * psi(yk, gk, fyk) + (L + mu * A1) * (zk1 - xs).squaredNorm();

  // nonnegative slacks of the two class inequalities used by the proof
  const double s1 = interpolation_slack(xs, Eigen::VectorXd::Zero(dim), fs, yk, gk, fyk, mu, L);
  const double s2 = interpolation_slack(ykm1, gkm1, fykm1, yk, gk, fyk, mu, L);
  const double lam1 = (1.0 - q) * (A1 - A_k);
  const double lam2 = (1.0 - q) * A_k;

  const double P = schedule_polynomial(q, A1, A_k);
  const double denom = (1.0 + q) * (1.0 + q) + (1.0 - q) * (1.0 - q) * q * A1;
  const double K1 = q * q / denom;
  const double K2 = denom / ((1.0 - q) * (1.0 - q) * (1.0 + q + q * A_k) * (1.0 + q + q * A_k) *
                             A1 * A1);
  const double K3 = (1.0 + q) * ((1.0 + q) * A_k - (1.0 - q) * (2.0 + q * A_k) * A1) / denom;

  const Eigen::VectorXd X =
      (1.0 - q) * A1 * gk - mu * A_k * (ykm1 - xs - gkm1 / L) + K3 * mu * (zk - xs);

  const double lhs = phi_k1 - phi_k + lam1 * s1 + lam2 * s2;
  const double rhs = -L * K1 * P * (zk - xs).squaredNorm() + K2 * P / (4.0 * L) * X.squaredNorm();

  const double scale = std::abs(phi_k) + std::abs(phi_k1) + lam1 * std::abs(s1) +
                       lam2 * std::abs(s2) + std::abs(rhs) + 1.0;
  return std::abs(lhs - rhs) / scale;
}

double DualCertificate::chain_residual() const {
  double worst = 0.0;
  auto upd = [&worst](double v) { worst = std::max(worst, std::abs(v)); };
  if (criterion == CriterionKind::kDistOverDist) {
    if (N == 1) {
      upd(lambda_star[0] - lambda_last);
    } else {
      upd(lambda_star[0] - lambda_chain[0]);
      for (int i = 1; i <= N - 2; ++i) upd(lambda_chain[i - 1] + lambda_star[i] - lambda_chain[i]);
      upd(lambda_chain[N - 2] + lambda_star[N - 1] - lambda_last);
    }
  } else {
    upd(tau * c_f + lambda_star[0] - lambda_chain[0]);
    for (int i = 1; i <= N - 1; ++i) upd(lambda_chain[i - 1] + lambda_star[i] - lambda_chain[i]);
    upd(lambda_chain[N - 1] + lambda_star[N] - 1.0);
  }
  return worst;
}

DualCertificate item_dual_certificate(const ClassParams& params, int N) {
  if (N < 1) throw std::invalid_argument("item_dual_certificate: N >= 1 required");
  const Schedule s = build_schedule(params, N);
  const double q = params.q;
  const double L = params.L;
  const double denom = 1.0 + q * s.A[N];
  DualCertificate cert{params, N, CriterionKind::kDistOverDist, 1.0, 0.0, 1.0 / denom, {}, {},
                       0.0};
  for (int i = 0; i <= N - 1; ++i) {
    cert.lambda_star.push_back((1.0 - q) / L * (s.A[i + 1] - s.A[i]) / denom);
  }
  for (int i = 0; i <= N - 2; ++i) {
    cert.lambda_chain.push_back((1.0 - q) / L * s.A[i + 1] / denom);
  }
  cert.lambda_last = (1.0 - q) / L * s.A[N] / denom;
  return cert;
}

CertificateReport verify_dual_certificate(const DualCertificate& cert,
                                          const FixedStepMethod& alpha_form) {
  if (alpha_form.form != CoeffForm::kAlpha) {
    throw std::invalid_argument("verify_dual_certificate: method must be in alpha-form");
  }
  if (alpha_form.N != cert.N) {
    throw std::invalid_argument("verify_dual_certificate: certificate/method horizon mismatch");
  }
  if (alpha_form.params.mu != cert.params.mu || alpha_form.params.L != cert.params.L) {
    throw std::invalid_argument("verify_dual_certificate: certificate/method class mismatch");
  }
  Criterion crit = cert.criterion == CriterionKind::kDistOverDist
                       ? Criterion::distance()
                       : Criterion::function_value(cert.c_w, cert.c_f);

  CertificateReport report;
  report.chain_residual = cert.chain_residual();
  report.certified_value = cert.tau;

  double lam_min = cert.tau;
  for (double v : cert.lambda_star) lam_min = std::min(lam_min, v);
  for (double v : cert.lambda_chain) lam_min = std::min(lam_min, v);
  if (cert.criterion == CriterionKind::kDistOverDist) {
    lam_min = std::min(lam_min, cert.lambda_last);
  }

  const LinearizedRows b = linearize_alpha(alpha_form, cert);
  const Eigen::MatrixXd bordered =
      minimax_bordered(cert.params, cert.N, crit, cert.tau, cert.lambda_star, cert.lambda_chain,
                       cert.lambda_last, b);
  report.lmi_min_eig = min_eigenvalue(bordered);

  const Eigen::MatrixXd S = minimax_s_matrix(cert.params, cert.N, crit, cert.tau,
                                             cert.lambda_star, cert.lambda_chain,
                                             cert.lambda_last, b);
  const Eigen::VectorXd wN = minimax_w_last(cert.params, cert.N, cert.criterion, b[cert.N - 1]);
  if (cert.criterion == CriterionKind::kDistOverDist) {
    const Eigen::MatrixXd K = S - wN * wN.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K, Eigen::EigenvaluesOnly);
    report.k_residual = es.eigenvalues().cwiseAbs().maxCoeff();
  } else {
    const Eigen::MatrixXd K = S - 0.5 * cert.params.mu * wN * wN.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K, Eigen::EigenvaluesOnly);
    report.k_residual = es.eigenvalues().cwiseAbs().maxCoeff();
  }

  report.feasible = report.chain_residual <= 1e-12 && report.lmi_min_eig >= -1e-8 &&
                    lam_min >= -1e-12;
  return report;
}

nlohmann::json certificate_to_json(const DualCertificate& c) {
  nlohmann::json j{{"mu", c.params.mu},
                   {"L", c.params.L},
                   {"N", c.N},
                   {"criterion", c.criterion == CriterionKind::kDistOverDist ? "dist" : "func"},
                   {"tau", c.tau},
                   {"lambda_star", c.lambda_star},
                   {"lambda_chain", c.lambda_chain}};
  if (c.criterion == CriterionKind::kDistOverDist) {
    j["lambda_last"] = c.lambda_last;
  } else {
    j["cw"] = c.c_w;
    j["cf"] = c.c_f;
  }
  return j;
}

DualCertificate certificate_from_json(const nlohmann::json& j) {
  ClassParams params(j.at("mu").get<double>(), j.at("L").get<double>());
  const bool dist = j.at("criterion").get<std::string>() == "dist";
  DualCertificate c{params,
                    j.at("N").get<int>(),
                    dist ? CriterionKind::kDistOverDist : CriterionKind::kFuncOverMix,
                    dist ? 1.0 : j.at("cw").get<double>(),
                    dist ? 0.0 : j.at("cf").get<double>(),
                    j.at("tau").get<double>(),
                    j.at("lambda_star").get<std::vector<double>>(),
                    j.at("lambda_chain").get<std::vector<double>>(),
                    dist ? j.at("lambda_last").get<double>() : 0.0};
  return c;
}

}  // namespace itm
