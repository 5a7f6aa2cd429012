#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

namespace itm {

/// One block of a block-diagonal linear matrix inequality:
/// C + sum_i x_i A_i >= 0 (PSD). Terms are sparse in the variable index.
struct SdpBlock {
  int dim = 0;
  Eigen::MatrixXd C;
  std::vector<std::pair<int, Eigen::MatrixXd>> terms;
};

/// minimize c'x  s.t.  block-diagonal LMI(x) >= 0,  E x = e.
/// Scalar constraints (variable bounds, linear inequalities) are 1x1 blocks.
struct SdpProblem {
  int n_vars = 0;
  Eigen::VectorXd objective;
  std::vector<SdpBlock> blocks;
  Eigen::MatrixXd eq_lhs;  // may have zero rows
  Eigen::VectorXd eq_rhs;

  explicit SdpProblem(int vars);

  /// Appends a dense block; matrices are symmetrized on entry.
  SdpBlock& add_block(int dim);
  void add_term(SdpBlock& block, int var, const Eigen::MatrixXd& coeff);
  /// x_var >= lb as a 1x1 block.
  void add_lower_bound(int var, double lb);
  /// a'x <= b as the 1x1 block b - a'x >= 0.
  void add_linear_le(const Eigen::VectorXd& a, double b);
  void add_equality(const Eigen::VectorXd& a, double b);
};

enum class SdpStatus { kOptimal, kInfeasible, kUnbounded, kMaxIter };

struct SdpSolution {
  SdpStatus status = SdpStatus::kMaxIter;
  Eigen::VectorXd x;
  double objective = 0.0;
  double lmi_min_eig = 0.0;   // over all blocks, at x
  double eq_residual = 0.0;   // max |Ex - e|
  double duality_gap = 0.0;   // |c'x - dual objective| / (1 + scale)
  double dual_objective = 0.0;
  std::vector<Eigen::MatrixXd> dual_blocks;  // PSD certificate matrices
  int iterations = 0;
};

struct SdpSettings {
  double feas_tol = 1e-9;
  double gap_tol = 1e-8;
  int max_iter = 200;
  bool verbose = false;  // per-iteration residual trace on stderr
};

/// Dense primal-dual interior-point solve (Mehrotra-style predictor-corrector
/// with the HKM direction). Equalities are eliminated through a null-space
/// basis before the iteration. Deterministic.
SdpSolution solve(const SdpProblem& problem, const SdpSettings& settings = {});

/// Smallest eigenvalue of a symmetric matrix; rejects non-symmetric input.
double min_eigenvalue(const Eigen::MatrixXd& M);

nlohmann::json sdp_problem_to_json(const SdpProblem& p);
SdpProblem sdp_problem_from_json(const nlohmann::json& j);

}  // namespace itm
