#include <cmath>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "itm/schedules.hpp"

using namespace itm;

TEST_CASE("class params validation") {
  CHECK_THROWS_AS(ClassParams(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ClassParams(2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ClassParams(-0.1, 1.0), std::invalid_argument);
  const ClassParams p(0.25, 2.0);
  CHECK(p.q == doctest::Approx(0.125).epsilon(1e-15));
}

TEST_CASE("A_1 closed form") {
  const Schedule s = build_schedule(ClassParams(0.1, 1.0), 1);
  CHECK(s.A[0] == 0.0);
  CHECK(s.A[1] == doctest::Approx(4.0 / 0.81).epsilon(1e-14));
  CHECK(s.beta[0] == 0.0);
}

TEST_CASE("q = 0 first values") {
  const Schedule s = build_schedule(ClassParams(0.0, 1.0), 2);
  CHECK(s.A[1] == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(s.A[2] == doctest::Approx(6.0 + 2.0 * std::sqrt(5.0)).epsilon(1e-15));
}

TEST_CASE("A_{k+1} is the larger root of P and P vanishes") {
  for (double q : {0.0, 0.01, 0.1, 0.25, 0.5}) {
    const ClassParams params(q, 1.0);
    const Schedule s = build_schedule(params, 40);
    for (int k = 0; k < 40; ++k) {
      const double x = s.A[k + 1];
      const double y = s.A[k];
      const double rel = std::abs(schedule_polynomial(q, x, y)) /
                         schedule_polynomial_scale(q, x, y);
      CHECK(rel <= 1e-10);
      // quadratic-formula larger root
      const double a2 = (1.0 - q) * (1.0 - q);
      const double a1 = 2.0 * (1.0 - q) * y + 4.0 * (1.0 + q * y);
      const double a0 = y * y;
      const double root = (a1 + std::sqrt(a1 * a1 - 4.0 * a2 * a0)) / (2.0 * a2);
      CHECK(x == doctest::Approx(root).epsilon(1e-12));
    }
  }
}

TEST_CASE("growth lower bounds") {
  const Schedule s0 = build_schedule(ClassParams(0.0, 1.0), 60);
  for (int k = 0; k <= 60; ++k) {
    CHECK(s0.A[k] >= double(k) * k - 1e-9 * k * k);
  }
  for (double q : {0.01, 0.1, 0.25}) {
    const Schedule s = build_schedule(ClassParams(q, 1.0), 60);
    const double rate = 1.0 / ((1.0 - std::sqrt(q)) * (1.0 - std::sqrt(q)));
    double bound = 1.0;
    for (int k = 1; k <= 60; ++k) {
      bound *= rate;
      CHECK(s.A[k] >= bound * (1.0 - 1e-12));
    }
  }
}

TEST_CASE("beta and delta finite, delta positive") {
  for (double q : {0.0, 0.3, 0.9}) {
    const Schedule s = build_schedule(ClassParams(q, 1.0), 30);
    for (int k = 0; k < 30; ++k) {
      CHECK(std::isfinite(s.beta[k]));
      CHECK(std::isfinite(s.delta[k]));
      CHECK(s.delta[k] > 0.0);
    }
  }
}

TEST_CASE("log_A tracks A and survives overflow") {
  const Schedule s = build_schedule(ClassParams(0.1, 1.0), 50);
  for (int k = 1; k <= 50; ++k) {
    CHECK(s.log_A[k] == doctest::Approx(std::log(s.A[k])).epsilon(1e-12));
  }
  // q = 0.5: ratio ~ 11.66 per step; A overflows well before k = 700
  const Schedule big = build_schedule(ClassParams(0.5, 1.0), 700);
  CHECK(std::isinf(big.A[700]));
  CHECK(std::isfinite(big.log_A[700]));
  const TmmLimits lim = tmm_limit_params(0.5);
  // beta stays accurate through the log path
  CHECK(big.beta[699] == doctest::Approx(lim.beta_inf).epsilon(1e-9));
  CHECK(big.delta[699] == doctest::Approx(lim.delta_inf).epsilon(1e-9));
}

TEST_CASE("lower bound sequence basics") {
  CHECK_THROWS_AS(lower_bound_sequence(0.0, 3), std::domain_error);
  CHECK_THROWS_AS(lower_bound_sequence(1.0, 3), std::domain_error);
  const LowerBoundSequence lb = lower_bound_sequence(0.25, 1);
  CHECK(lb.lambda[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(lb.lambda[1] == doctest::Approx(0.3).epsilon(1e-15));
  // identity against the schedule
  const Schedule s = build_schedule(ClassParams(0.25, 1.0), 1);
  CHECK(s.A[1] == doctest::Approx(4.0 / 0.5625).epsilon(1e-14));
  CHECK(0.25 / (1.0 + 0.25 * s.A[1]) == doctest::Approx(0.09).epsilon(1e-13));
}

TEST_CASE("lambda identity lambda_k^2 (1 + q A_k) = q up to N = 100") {
  for (double q : {0.01, 0.1, 0.25, 0.5}) {
    const LowerBoundSequence lb = lower_bound_sequence(q, 100);
    const Schedule s = build_schedule(ClassParams(q, 1.0), 100);
    for (int k = 0; k <= 100; ++k) {
      const double lhs = lb.lambda[k] * lb.lambda[k] * (1.0 + q * s.A[k]);
      CHECK(lhs == doctest::Approx(q).epsilon(1e-12));
    }
  }
}

TEST_CASE("ogm theta sequence") {
  const auto theta = ogm_theta_sequence(2);
  CHECK(theta[0] == 1.0);
  CHECK(theta[1] == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-15));
  CHECK(theta[2] * theta[2] - theta[1] * theta[1] - theta[2] ==
        doctest::Approx(0.0).epsilon(1e-12));
  // 4 theta_k^2 = A_{k+1} at q = 0
  const auto th = ogm_theta_sequence(50);
  const Schedule s = build_schedule(ClassParams(0.0, 1.0), 51);
  for (int k = 0; k <= 50; ++k) {
    CHECK(4.0 * th[k] * th[k] == doctest::Approx(s.A[k + 1]).epsilon(1e-12));
  }
}

TEST_CASE("tmm limits") {
  CHECK_THROWS_AS(tmm_limit_params(0.0), std::domain_error);
  const TmmLimits lim = tmm_limit_params(0.25);
  CHECK(lim.beta_inf == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(lim.delta_inf == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(lim.rate == doctest::Approx(0.25).epsilon(1e-15));
  // beta_k converges to the limit
  const Schedule s = build_schedule(ClassParams(0.1, 1.0), 200);
  const TmmLimits l01 = tmm_limit_params(0.1);
  CHECK(std::abs(s.beta[199] - l01.beta_inf) < 1e-6);
}

TEST_CASE("schedule json round trip") {
  const Schedule s = build_schedule(ClassParams(0.2, 2.0), 4);
  const nlohmann::json j = schedule_to_json(s);
  CHECK(j.at("mu") == 0.2);
  CHECK(j.at("A").size() == 5);
  const Schedule back = schedule_from_json(j);
  for (int k = 0; k <= 4; ++k) CHECK(back.A[k] == doctest::Approx(s.A[k]).epsilon(1e-15));
}
