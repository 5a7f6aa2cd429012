#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "itm/certificates.hpp"
#include "itm/methods.hpp"
#include "itm/sdp.hpp"

namespace itm {

/// What the worst case is measured against.
struct Criterion {
  CriterionKind kind;
  double c_w = 1.0;  // weight of |w_0 - w_star|^2 in the denominator
  double c_f = 0.0;  // weight of f(w_0) - f_star

  static Criterion distance() { return {CriterionKind::kDistOverDist, 1.0, 0.0}; }
  static Criterion function_value(double cw, double cf);
};

/// Unit-vector selectors of the Gram lifting, over the shifted class
/// F_{0,L-mu}: w0 = e_0, g_i = e_{i+1}; derived iterate selectors w_k are
/// affine in the alpha coefficients. Gram dimension is N+1 for the distance
/// criterion (gradients g_0..g_{N-1}) and N+2 for function values (g_N too).
struct GramBasis {
  int gram_dim;
  int f_dim;
  Eigen::VectorXd w0;
  std::vector<Eigen::VectorXd> g;
  std::vector<Eigen::VectorXd> w;  // w_0..w_N

  static GramBasis build(const FixedStepMethod& alpha_form, CriterionKind kind);
};

/// Maximization over all interpolation constraints (every ordered index pair).
SdpProblem build_full_pep(const FixedStepMethod& alpha_form, const Criterion& criterion);

/// Maximization over the chain/star constraint subset only.
SdpProblem build_relaxed_pep(const FixedStepMethod& alpha_form, const Criterion& criterion);

/// Dual of the relaxed problem: minimize tau over multipliers with the
/// bordered LMI and the equality chain. Solutions certify worst-case bounds.
SdpProblem build_dual_relaxed(const FixedStepMethod& alpha_form, const Criterion& criterion);

enum class PepMode { kFull, kRelaxed };

struct WorstCaseResult {
  SdpStatus status = SdpStatus::kMaxIter;
  double value = 0.0;
  std::optional<DualCertificate> certificate;  // relaxed mode
  std::optional<Eigen::MatrixXd> gram;         // full mode: worst-case Gram matrix
};

/// Builds and solves the chosen PEP for a method in either form.
WorstCaseResult worst_case_bound(const FixedStepMethod& method, const Criterion& criterion,
                                 PepMode mode, const SdpSettings& settings = {});

/// Worst-case data points reconstructed from a Gram witness (eigenvalues
/// clipped at 0 below 1e-10): rows are the lifted vectors.
Eigen::MatrixXd gram_factor(const Eigen::MatrixXd& gram);

// --- linearized minimax assembly (shared by design and certificate checks) ---

/// b rows of the change of variables: b[i-1] has i entries, i = 1..N;
/// row i < N-1 carries lambda_{i,i+1} alpha_{i,j}, row N-1 carries
/// lambda_{N-1,*} alpha_{N-1,j} (distance) or lambda_{N-1,N} alpha (func),
/// row N carries alpha_{N,j} itself.
using LinearizedRows = std::vector<std::vector<double>>;

LinearizedRows linearize_alpha(const FixedStepMethod& alpha_form, const DualCertificate& cert);

/// S'' (distance) or S-bar' (function value): the linearized dual LMI body.
Eigen::MatrixXd minimax_s_matrix(const ClassParams& params, int N, const Criterion& criterion,
                                 double tau, const std::vector<double>& lambda_star,
                                 const std::vector<double>& lambda_chain, double lambda_last,
                                 const LinearizedRows& b);

/// Selector of w_N as a function of the last linearized row.
Eigen::VectorXd minimax_w_last(const ClassParams& params, int N, CriterionKind kind,
                               const std::vector<double>& b_last);

/// The bordered LMI of the linearized program:
/// [[S'', w_N],[w_N', 1]] (distance), [[S-bar', sqrt(mu) w_N],[., 2]]
/// (function value, mu > 0), or S-bar' alone at mu = 0.
Eigen::MatrixXd minimax_bordered(const ClassParams& params, int N, const Criterion& criterion,
                                 double tau, const std::vector<double>& lambda_star,
                                 const std::vector<double>& lambda_chain, double lambda_last,
                                 const LinearizedRows& b);

/// The full linearized minimax program with (tau, lambda, b) as variables.
/// Variable order: tau, lambda_star..., lambda_chain..., [lambda_last], b rows.
SdpProblem build_design_problem(const ClassParams& params, int N, const Criterion& criterion);

/// Reads the multiplier part of a dual/design solution vector back into a
/// certificate (shared variable layout with build_design_problem).
DualCertificate dual_certificate_from_solution(const ClassParams& params, int N,
                                               const Criterion& criterion,
                                               const Eigen::VectorXd& vars);

}  // namespace itm
