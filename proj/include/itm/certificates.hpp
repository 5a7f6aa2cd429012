#pragma once

#include <optional>
#include <random>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "itm/methods.hpp"
#include "itm/oracles.hpp"
#include "itm/schedules.hpp"

namespace itm {

enum class CriterionKind { kDistOverDist, kFuncOverMix };

/// psi = f(y) - f_star - |g|^2/(2L) - mu/(2(1-q)) |y - g/L - x_star|^2.
/// Nonnegative whenever f belongs to the declared class.
double psi_value(const Eigen::VectorXd& y, const Eigen::VectorXd& grad, double fval,
                 const Eigen::VectorXd& x_star, double f_star, const ClassParams& params);

struct PotentialState {
  int k;
  double A_k;
  double psi_prev;  // psi_{k-1}; 0 by convention at k = 0 where A_0 kills the term
  double dist_sq;   // |z_k - x_star|^2
  double phi;       // (1-q) A_k psi_{k-1} + (L + mu A_k) dist_sq
};

struct PotentialReport {
  std::vector<PotentialState> states;  // k = 0..N
  bool nonincreasing = true;
  int first_violation = -1;
  double worst_margin = 0.0;  // most positive phi_{k+1} - phi_k - slack
};

/// Evaluates phi_0..phi_N along a run of the three-sequence method and checks
/// phi_{k+1} <= phi_k + 1e-9 max(1, phi_k).
PotentialReport potential_decrease_check(const Trace& trace, const Schedule& schedule,
                                         const FirstOrderOracle& oracle);

/// Residual of the potential-decrease algebra on random data: instantiates
/// random (y_{k-1}, z_k, gradients, values, x_star), forms both sides of the
/// proof's exact reformulation, and returns |lhs - rhs| / scale. A_next
/// defaults to the schedule recursion (the root of P); any other nonnegative
/// value exercises the correction terms with P != 0.
double weighted_sum_identity_check(double A_k, const ClassParams& params, std::mt19937& rng,
                                   std::optional<double> A_next = std::nullopt, int dim = 3);

/// Multipliers certifying a worst-case bound for a fixed-step method.
struct DualCertificate {
  ClassParams params;
  int N;
  CriterionKind criterion;
  double c_w = 1.0;  // function-value criterion weights
  double c_f = 0.0;
  double tau;
  std::vector<double> lambda_star;   // lambda_{*,i}: size N (dist) or N+1 (func)
  std::vector<double> lambda_chain;  // lambda_{i,i+1}: size N-1 (dist) or N (func)
  double lambda_last = 0.0;          // lambda_{N-1,*}, distance criterion only

  /// Largest violation of the linear equality chain tying the multipliers.
  double chain_residual() const;
};

/// The closed-form optimal multipliers of the exact method (distance
/// criterion): tau = 1/(1 + q A_N), lambda_{*,i} ~ A_{i+1} - A_i, etc.
DualCertificate item_dual_certificate(const ClassParams& params, int N);

struct CertificateReport {
  bool feasible = false;
  double chain_residual = 0.0;
  double lmi_min_eig = 0.0;  // of the bordered linearized matrix
  double k_residual = 0.0;   // spectral norm of S'' - w_N w_N^T (0 for the exact method)
  double certified_value = 0.0;
};

/// Checks a certificate against a method in alpha-form: equality chain,
/// feasibility of the bordered LMI, and the K-residual.
CertificateReport verify_dual_certificate(const DualCertificate& cert,
                                          const FixedStepMethod& alpha_form);

nlohmann::json certificate_to_json(const DualCertificate& c);
DualCertificate certificate_from_json(const nlohmann::json& j);

}  // namespace itm
