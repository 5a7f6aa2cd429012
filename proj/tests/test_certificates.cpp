#include <random>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "itm/certificates.hpp"
#include "itm/pep.hpp"
#include "test_support.hpp"

using namespace itm;

TEST_CASE("psi vanishes at the minimizer and on the extreme quadratics") {
  const ClassParams params(0.1, 1.0);
  const Eigen::VectorXd xs = Eigen::VectorXd::Zero(2);
  // y = x_star: everything vanishes
  CHECK(psi_value(xs, Eigen::VectorXd::Zero(2), 0.0, xs, 0.0, params) ==
        doctest::Approx(0.0).epsilon(1e-15));
  // f_L saturates the inequality
  Eigen::VectorXd y(2);
  y << 2.0, -1.0;
  const Eigen::VectorXd gL = params.L * y;
  const double fL = 0.5 * params.L * y.squaredNorm();
  CHECK(psi_value(y, gL, fL, xs, 0.0, params) == doctest::Approx(0.0).epsilon(1e-12));
  // f_mu too
  const Eigen::VectorXd gm = params.mu * y;
  const double fm = 0.5 * params.mu * y.squaredNorm();
  CHECK(psi_value(y, gm, fm, xs, 0.0, params) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("potential decreases along ITEM runs") {
  std::mt19937 rng(51);
  const ClassParams params(0.1, 1.0);
  const Schedule schedule = build_schedule(params, 20);
  const auto oracle = test::random_quadratic(10, params, rng);
  const Trace t = run_item(oracle, test::random_vector(10, rng, 3.0), schedule);
  const PotentialReport report = potential_decrease_check(t, schedule, oracle);
  CHECK(report.nonincreasing);
  CHECK(report.states.front().phi ==
        doctest::Approx(params.L * report.states.front().dist_sq).epsilon(1e-12));
  // psi >= 0 at every recorded point
  for (const auto& st : report.states) CHECK(st.psi_prev >= -1e-10);
}

TEST_CASE("potential chain on f_mu matches the tight closed form") {
  const ClassParams params(0.1, 1.0);
  const Schedule schedule = build_schedule(params, 10);
  Eigen::MatrixXd H = params.mu * Eigen::MatrixXd::Identity(1, 1);
  const auto fmu = quadratic_oracle(H, Eigen::VectorXd::Zero(1), 0.0, params);
  Eigen::VectorXd x0(1);
  x0 << 2.0;
  const Trace t = run_item(fmu, x0, schedule);
  const PotentialReport report = potential_decrease_check(t, schedule, fmu);
  CHECK(report.nonincreasing);
  for (int k = 0; k <= 10; ++k) {
    CHECK(report.states[k].psi_prev == doctest::Approx(0.0).epsilon(1e-12));
    const double expect = (params.L + params.mu * schedule.A[k]) * x0.squaredNorm() /
                          (1.0 + params.q * schedule.A[k]);
    CHECK(report.states[k].phi == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("potential is identically zero from the minimizer") {
  std::mt19937 rng(53);
  const ClassParams params(0.2, 1.0);
  const Schedule schedule = build_schedule(params, 6);
  const auto oracle = test::random_quadratic(3, params, rng);
  const Trace t = run_item(oracle, *oracle.x_star(), schedule);
  const PotentialReport report = potential_decrease_check(t, schedule, oracle);
  for (const auto& st : report.states) CHECK(st.phi == doctest::Approx(0.0).epsilon(1e-18));
}

TEST_CASE("weighted sum identity at the schedule root and beyond") {
  std::mt19937 rng(57);
  for (double q : {0.0, 0.1, 0.3}) {
    const ClassParams params(q, 1.0);
    for (double A_k : {0.0, 2.0, 7.5}) {
      for (int rep = 0; rep < 20; ++rep) {
        CHECK(weighted_sum_identity_check(A_k, params, rng) <= 1e-8);
        // arbitrary A_{k+1}: P != 0 exercises the K constants
        const double a1 = 1.3 * (A_k + 1.0) + rep;
        CHECK(weighted_sum_identity_check(A_k, params, rng, a1) <= 1e-8);
      }
    }
  }
}

TEST_CASE("item dual certificate values and chain") {
  const ClassParams params(0.1, 1.0);
  for (int N : {1, 2, 5}) {
    const DualCertificate cert = item_dual_certificate(params, N);
    const Schedule s = build_schedule(params, N);
    CHECK(cert.tau == doctest::Approx(1.0 / (1.0 + params.q * s.A[N])).epsilon(1e-14));
    CHECK(cert.chain_residual() <= 1e-14);
    for (double v : cert.lambda_star) CHECK(v >= 0.0);
    for (double v : cert.lambda_chain) CHECK(v >= 0.0);
    CHECK(cert.lambda_last >= 0.0);
  }
  // q = 0: tau = 1
  const DualCertificate flat = item_dual_certificate(ClassParams(0.0, 1.0), 3);
  CHECK(flat.tau == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("verify accepts the ITEM certificate with K = 0") {
  const ClassParams params(0.1, 1.0);
  for (int N : {1, 2, 3}) {
    const FixedStepMethod alpha = alpha_from_h(extract_h(item_runner(N), N, params));
    const DualCertificate cert = item_dual_certificate(params, N);
    const CertificateReport report = verify_dual_certificate(cert, alpha);
    CHECK(report.feasible);
    CHECK(report.k_residual <= 1e-8);
    CHECK(report.certified_value ==
          doctest::Approx(1.0 / (1.0 + params.q * build_schedule(params, N).A[N]))
              .epsilon(1e-12));
  }
}

TEST_CASE("verify flags a perturbed certificate") {
  const ClassParams params(0.1, 1.0);
  const int N = 3;
  const FixedStepMethod alpha = alpha_from_h(extract_h(item_runner(N), N, params));
  DualCertificate cert = item_dual_certificate(params, N);
  cert.lambda_chain[0] += 0.1;
  const CertificateReport report = verify_dual_certificate(cert, alpha);
  CHECK(report.chain_residual > 1e-3);
  CHECK(!report.feasible);
}

TEST_CASE("verify rejects mismatched horizons") {
  const ClassParams params(0.1, 1.0);
  const FixedStepMethod alpha = alpha_from_h(extract_h(item_runner(3), 3, params));
  const DualCertificate cert = item_dual_certificate(params, 2);
  CHECK_THROWS_AS(verify_dual_certificate(cert, alpha), std::invalid_argument);
}

TEST_CASE("theorem bounds hold along random runs") {
  std::mt19937 rng(61);
  for (double q : {0.01, 0.1, 0.25}) {
    const ClassParams params(q, 1.0);
    const int N = 30;
    const Schedule schedule = build_schedule(params, N);
    for (int rep = 0; rep < 5; ++rep) {
      const int d = 3 + static_cast<int>(rng() % 18);
      const auto oracle = test::random_quadratic(d, params, rng);
      const Eigen::VectorXd x0 = test::random_vector(d, rng, 2.0);
      const Trace t = run_item(oracle, x0, schedule);
      const double d0 = (x0 - *oracle.x_star()).squaredNorm();
      for (int k = 1; k <= N; ++k) {
        const double dist = (t.z_seq[k] - *oracle.x_star()).squaredNorm();
        CHECK(dist <= (1.0 + 1e-8) * d0 / (1.0 + q * schedule.A[k]));
      }
      for (int k = 0; k < N; ++k) {
        const double psi = psi_value(t.y_seq[k], t.evals[k].grad, t.evals[k].fval,
                                     *oracle.x_star(), 0.0, params);
        CHECK(psi >= -1e-10);
        CHECK(psi <= (1.0 + 1e-8) * params.L * d0 / ((1.0 - q) * schedule.A[k + 1]));
      }
    }
  }
}

TEST_CASE("certificate json round trip") {
  const DualCertificate cert = item_dual_certificate(ClassParams(0.1, 1.0), 3);
  const nlohmann::json j = certificate_to_json(cert);
  const DualCertificate back = certificate_from_json(j);
  CHECK(back.tau == doctest::Approx(cert.tau).epsilon(1e-15));
  CHECK(back.lambda_star.size() == cert.lambda_star.size());
  CHECK(back.lambda_last == doctest::Approx(cert.lambda_last).epsilon(1e-15));
}
