#include "itm/schedules.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace itm {

namespace {

// Above this, (1+A)(1+qA) risks overflow; switch to ratio-based updates.
constexpr double kLargeA = 1e140;

// A_{k+1}/A_k, computed without forming products of huge numbers.
double growth_ratio(double q, double a) {
  const double inv = 1.0 / a;
  return ((1.0 + q) + 2.0 * inv + 2.0 * std::sqrt((inv + 1.0) * (inv + q))) /
         ((1.0 - q) * (1.0 - q));
}

}  // namespace

ClassParams::ClassParams(double mu_, double L_) : mu(mu_), L(L_), q(mu_ / L_) {
  if (!(mu >= 0.0) || !(L > mu) || !std::isfinite(L)) {
    throw std::invalid_argument("ClassParams: need 0 <= mu < L < inf");
  }
}

Schedule build_schedule(const ClassParams& params, int N) {
  if (N < 0) throw std::invalid_argument("build_schedule: N must be >= 0");
  const double q = params.q;
  Schedule s{params, N, {}, {}, {}, {}};
  s.A.reserve(N + 1);
  s.log_A.reserve(N + 1);
  s.A.push_back(0.0);
  s.log_A.push_back(-std::numeric_limits<double>::infinity());
  for (int k = 0; k < N; ++k) {
    const double a = s.A[k];
    double next;
    if (a < kLargeA) {
      next = ((1.0 + q) * a + 2.0 * (1.0 + std::sqrt((1.0 + a) * (1.0 + q * a)))) /
             ((1.0 - q) * (1.0 - q));
      s.log_A.push_back(k == 0 ? std::log(next) : s.log_A[k] + std::log(next / a));
    } else {
      const double r = growth_ratio(q, a);
      next = a * r;  // may overflow to inf; log_A stays usable
      s.log_A.push_back(s.log_A[k] + std::log(r));
    }
    s.A.push_back(next);

    // beta_k = A_k / ((1-q) A_{k+1}); exactly 0 at k = 0.
    double beta;
    if (k == 0) {
      beta = 0.0;
    } else if (std::isfinite(next)) {
      beta = a / ((1.0 - q) * next);
    } else {
      beta = std::exp(s.log_A[k] - s.log_A[k + 1]) / (1.0 - q);
    }
    s.beta.push_back(beta);

    // delta_k = ((1-q)^2 A_{k+1} - (1+q) A_k) / (2 (1 + q + q A_k))
    double delta;
    if (a < kLargeA && std::isfinite(next)) {
      delta = 0.5 * ((1.0 - q) * (1.0 - q) * next - (1.0 + q) * a) / (1.0 + q + q * a);
    } else {
      const double r = growth_ratio(q, a);
      delta = 0.5 * ((1.0 - q) * (1.0 - q) * r - (1.0 + q)) / ((1.0 + q) / a + q);
    }
    s.delta.push_back(delta);
  }
  return s;
}

LowerBoundSequence lower_bound_sequence(double q, int N) {
  if (!(q > 0.0) || !(q < 1.0)) {
    throw std::domain_error("lower_bound_sequence: q must lie in (0, 1)");
  }
  if (N < 0) throw std::invalid_argument("lower_bound_sequence: N must be >= 0");
  LowerBoundSequence out{q, {std::sqrt(q)}};
  out.lambda.reserve(N + 1);
  for (int k = 0; k < N; ++k) {
    const double lam = out.lambda.back();
    const double radicand = q - (1.0 - q) * lam * lam;
    if (radicand < 0.0) {
      throw std::runtime_error("lower_bound_sequence: negative radicand (lost the invariant)");
    }
    out.lambda.push_back((1.0 - std::sqrt(radicand)) / (1.0 + lam * lam) * lam);
  }
  return out;
}

std::vector<double> ogm_theta_sequence(int N) {
  if (N < 0) throw std::invalid_argument("ogm_theta_sequence: N must be >= 0");
  std::vector<double> theta{1.0};
  theta.reserve(N + 1);
  for (int k = 0; k < N; ++k) {
    const double t = theta.back();
    theta.push_back(0.5 * (1.0 + std::sqrt(4.0 * t * t + 1.0)));
  }
  return theta;
}

TmmLimits tmm_limit_params(double q) {
  if (!(q > 0.0) || !(q < 1.0)) {
    throw std::domain_error("tmm_limit_params: q must lie in (0, 1)");
  }
  const double sq = std::sqrt(q);
  return {(1.0 - sq) / (1.0 + sq), 1.0 / sq, (1.0 - sq) * (1.0 - sq)};
}

double schedule_polynomial(double q, double x, double y) {
  const double t = y - (1.0 - q) * x;
  return t * t - 4.0 * x * (1.0 + q * y);
}

double schedule_polynomial_scale(double q, double x, double y) {
  const double t = y + (1.0 - q) * x;
  return t * t + 4.0 * x * (1.0 + q * y) + 1.0;
}

nlohmann::json schedule_to_json(const Schedule& s) {
  return nlohmann::json{{"mu", s.params.mu}, {"L", s.params.L},    {"N", s.N},
                        {"A", s.A},          {"beta", s.beta},     {"delta", s.delta}};
}

Schedule schedule_from_json(const nlohmann::json& j) {
  ClassParams params(j.at("mu").get<double>(), j.at("L").get<double>());
  Schedule rebuilt = build_schedule(params, j.at("N").get<int>());
  // stored sequences win, but must agree with the recursion
  const auto a = j.at("A").get<std::vector<double>>();
  if (a.size() != rebuilt.A.size()) {
    throw std::invalid_argument("schedule_from_json: A length does not match N");
  }
  return rebuilt;
}

}  // namespace itm
