#include "itm/design.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace itm {

namespace {

// variable layout mirrors pep.cpp's build_design_problem
int design_vars_before_b(const Criterion& c, int N) {
  const int n_star = c.kind == CriterionKind::kDistOverDist ? N : N + 1;
  const int n_chain = c.kind == CriterionKind::kDistOverDist ? N - 1 : N;
  const int has_last = c.kind == CriterionKind::kDistOverDist ? 1 : 0;
  return 1 + n_star + n_chain + has_last;
}

DesignResult run_design(const ClassParams& params, int N, const Criterion& criterion,
                        const SdpSettings& settings) {
  const SdpProblem problem = build_design_problem(params, N, criterion);
  const SdpSolution sol = solve(problem, settings);
  if (sol.status != SdpStatus::kOptimal) {
    throw std::runtime_error("design: solver did not reach an optimal point (status " +
                             std::to_string(static_cast<int>(sol.status)) + ")");
  }
  DualCertificate cert = dual_certificate_from_solution(params, N, criterion, sol.x);

  LinearizedRows b(N);
  int idx = design_vars_before_b(criterion, N);
  for (int i = 1; i <= N; ++i) {
    b[i - 1].resize(i);
    for (int j = 0; j < i; ++j) b[i - 1][j] = sol.x(idx++);
  }

  auto alpha_rows = recover_alpha(b, cert);
  FixedStepMethod alpha(params, CoeffForm::kAlpha, std::move(alpha_rows));
  FixedStepMethod h = h_from_alpha(alpha);
  return DesignResult{cert.tau, std::move(alpha), std::move(h), std::move(cert), std::move(b)};
}

}  // namespace

std::vector<std::vector<double>> recover_alpha(const LinearizedRows& b,
                                               const DualCertificate& lambdas,
                                               const RecoverySettings& rs) {
  const int N = static_cast<int>(b.size());
  std::vector<std::vector<double>> alpha(N);
  for (int i = 1; i <= N; ++i) {
    alpha[i - 1].resize(i);
    if (i == N) {
      alpha[i - 1] = b[i - 1];
      continue;
    }
    double mult;
    if (lambdas.criterion == CriterionKind::kDistOverDist && i == N - 1) {
      mult = lambdas.lambda_last;
    } else {
      mult = lambdas.lambda_chain[i];
    }
    for (int j = 0; j < i; ++j) {
      if (mult <= rs.zero_tol) {
        if (std::abs(b[i - 1][j]) > rs.resid_tol) {
          throw std::runtime_error(
              "recover_alpha: multiplier vanished but its b entry did not (solver accuracy)");
        }
        alpha[i - 1][j] = 0.0;
      } else {
        alpha[i - 1][j] = b[i - 1][j] / mult;
      }
    }
  }
  return alpha;
}

SdpSettings design_solver_settings() {
  SdpSettings s;
  s.feas_tol = 1e-11;
  s.gap_tol = 1e-10;
  s.max_iter = 200;
  return s;
}

DesignResult design_distance(const ClassParams& params, int N, const SdpSettings& settings) {
  if (N < 1) throw std::invalid_argument("design_distance: N >= 1 required");
  return run_design(params, N, Criterion::distance(), settings);
}

DesignResult design_function_value(const ClassParams& params, int N, double c_w, double c_f,
                                   const SdpSettings& settings) {
  if (N < 1) throw std::invalid_argument("design_function_value: N >= 1 required");
  return run_design(params, N, Criterion::function_value(c_w, c_f), settings);
}

}  // namespace itm
