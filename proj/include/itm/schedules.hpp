#pragma once

#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace itm {

/// Problem class parameters: mu-strongly convex, L-smooth, 0 <= mu < L.
struct ClassParams {
  double mu;
  double L;
  double q;  // inverse condition number mu/L, cached at construction

  ClassParams(double mu, double L);
};

/// The scalar sequences driving the information-theoretic exact method:
/// A_0 = 0 and A_{k+1} is the largest root of P(., A_k), with the step
/// parameters beta_k, delta_k derived from consecutive A's.
struct Schedule {
  ClassParams params;
  int N;
  std::vector<double> A;      // A_0..A_N
  std::vector<double> log_A;  // log A_k, finite long after A overflows; log_A[0] = -inf
  std::vector<double> beta;   // beta_0..beta_{N-1}, beta_0 = 0
  std::vector<double> delta;  // delta_0..delta_{N-1}
};

struct LowerBoundSequence {
  double q;
  std::vector<double> lambda;  // lambda_0..lambda_N, lambda_0 = sqrt(q)
};

struct TmmLimits {
  double beta_inf;   // (1-sqrt(q))/(1+sqrt(q))
  double delta_inf;  // 1/sqrt(q)
  double rate;       // (1-sqrt(q))^2
};

Schedule build_schedule(const ClassParams& params, int N);

LowerBoundSequence lower_bound_sequence(double q, int N);

std::vector<double> ogm_theta_sequence(int N);

TmmLimits tmm_limit_params(double q);

/// P(x, y) = (y - (1-q)x)^2 - 4x(1 + qy); A_{k+1} is its largest root in x at y = A_k.
double schedule_polynomial(double q, double x, double y);

/// Natural magnitude of P's terms at (x, y); |P|/scale is the relative residual.
double schedule_polynomial_scale(double q, double x, double y);

nlohmann::json schedule_to_json(const Schedule& s);
Schedule schedule_from_json(const nlohmann::json& j);

}  // namespace itm
