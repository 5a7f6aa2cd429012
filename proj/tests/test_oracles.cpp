#include <random>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "itm/oracles.hpp"
#include "test_support.hpp"

using namespace itm;

TEST_CASE("quadratic oracle gradients and values") {
  const ClassParams params(0.1, 1.0);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2, 2);
  H(0, 0) = 0.1;
  H(1, 1) = 1.0;
  const auto oracle = quadratic_oracle(H, Eigen::VectorXd::Zero(2), 0.0, params);
  Eigen::VectorXd x(2);
  x << 1.0, 1.0;
  auto [f, g] = oracle(x);
  CHECK(f == doctest::Approx(0.55).epsilon(1e-15));
  CHECK(g(0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(g(1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("quadratic oracle rejects bad spectrum") {
  const ClassParams params(0.1, 1.0);
  Eigen::MatrixXd H = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(quadratic_oracle(H, Eigen::VectorXd::Zero(2), 0.0, params),
                  std::invalid_argument);
  Eigen::MatrixXd tiny = 0.05 * Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(quadratic_oracle(tiny, Eigen::VectorXd::Zero(2), 0.0, params),
                  std::invalid_argument);
}

TEST_CASE("oracle dimension mismatch") {
  const ClassParams params(0.1, 1.0);
  const auto oracle = quadratic_oracle(Eigen::MatrixXd::Identity(2, 2),
                                       Eigen::VectorXd::Zero(2), 0.0, params);
  CHECK_THROWS_AS(oracle(Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("gradients match central differences") {
  std::mt19937 rng(11);
  const ClassParams params(0.1, 1.0);
  const auto oracle = test::random_quadratic(5, params, rng);
  const double h = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd x = test::random_vector(5, rng);
    const Eigen::VectorXd g = oracle(x).second;
    for (int i = 0; i < 5; ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(5);
      e(i) = h;
      const double fd = (oracle(x + e).first - oracle(x - e).first) / (2.0 * h);
      CHECK(fd == doctest::Approx(g(i)).epsilon(1e-6));
    }
  }
}

TEST_CASE("interpolation check accepts in-class quadratics") {
  std::mt19937 rng(7);
  const ClassParams params(0.1, 1.0);
  const auto oracle = test::random_quadratic(5, params, rng);
  SampledTriplets s;
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXd x = test::random_vector(5, rng, 2.0);
    auto [f, g] = oracle(x);
    s.add(x, g, f);
  }
  const auto report = interpolation_check(s, 0.1, 1.0);
  CHECK(report.ok());
  CHECK(report.min_slack >= -1e-9);
}

TEST_CASE("identical triplets give zero slack") {
  SampledTriplets s;
  Eigen::VectorXd x(2), g(2);
  x << 1.0, 2.0;
  g << 0.5, 0.1;
  s.add(x, g, 3.0);
  s.add(x, g, 3.0);
  const auto report = interpolation_check(s, 0.1, 1.0);
  CHECK(report.min_slack == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("out-of-class function is flagged") {
  // curvature 2L declared as L
  const ClassParams params(0.1, 1.0);
  SampledTriplets s;
  for (double x : {0.5, 1.5}) {
    Eigen::VectorXd xv(1), gv(1);
    xv << x;
    gv << 2.0 * x;  // f = x^2 => smoothness constant 2 > L
    s.add(xv, gv, x * x);
  }
  const auto report = interpolation_check(s, 0.1, 1.0);
  CHECK(report.min_slack < 0.0);
}

TEST_CASE("shift to tilde") {
  std::mt19937 rng(3);
  const ClassParams params(0.1, 1.0);
  const auto oracle = test::random_quadratic(4, params, rng);
  const auto tilde = shift_to_tilde(oracle);
  CHECK(tilde.params().mu == 0.0);
  CHECK(tilde.params().L == doctest::Approx(0.9).epsilon(1e-15));
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd x = test::random_vector(4, rng);
    const double recon =
        tilde(x).first + 0.05 * (x - *oracle.x_star()).squaredNorm();
    CHECK(recon == doctest::Approx(oracle(x).first).epsilon(1e-12));
  }
  // f_mu shifts to the zero function
  Eigen::MatrixXd H = 0.1 * Eigen::MatrixXd::Identity(3, 3);
  const auto fmu = quadratic_oracle(H, Eigen::VectorXd::Zero(3), 0.0, params);
  const auto flat = shift_to_tilde(fmu);
  const Eigen::VectorXd x = test::random_vector(3, rng);
  CHECK(flat(x).first == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(flat(x).second.norm() == doctest::Approx(0.0).epsilon(1e-14));
  // missing minimizer is an error
  const FirstOrderOracle bare(3, params, [&fmu](const Eigen::VectorXd& x) { return fmu(x); });
  CHECK_THROWS_AS(shift_to_tilde(bare), std::invalid_argument);
  // tilde passes the interpolation check for (0, L - mu)
  SampledTriplets s;
  const auto tilde2 = shift_to_tilde(oracle);
  for (int i = 0; i < 15; ++i) {
    const Eigen::VectorXd xv = test::random_vector(4, rng, 2.0);
    auto [f, g] = tilde2(xv);
    s.add(xv, g, f);
  }
  CHECK(interpolation_check(s, 0.0, 0.9).ok());
}

TEST_CASE("quadratic oracle json") {
  const ClassParams params(0.1, 1.0);
  const nlohmann::json j{{"eigenvalues", {0.1, 0.5, 1.0}},
                         {"xstar", {1.0, -1.0, 0.0}},
                         {"fstar", 2.0}};
  const auto oracle = quadratic_oracle_from_json(j, params);
  CHECK(oracle.dim() == 3);
  CHECK(oracle(*oracle.x_star()).first == doctest::Approx(2.0).epsilon(1e-15));
}
