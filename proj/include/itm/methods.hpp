#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "itm/oracles.hpp"
#include "itm/schedules.hpp"

namespace itm {

enum class CoeffForm { kH, kAlpha };

/// A fixed-step first-order method: iterate k is a fixed linear combination of
/// past gradients. Row k (1-based) holds the coefficients for gradients 0..k-1,
/// applied scaled by 1/L. The same storage carries either the h-form
/// (w_k = w_{k-1} - sum h_{k,i} g_i / L) or the alpha-form acting on the
/// shifted function.
struct FixedStepMethod {
  ClassParams params;
  int N;
  CoeffForm form;
  std::vector<std::vector<double>> rows;  // rows[k-1] has k entries, k = 1..N

  FixedStepMethod(ClassParams p, CoeffForm f, std::vector<std::vector<double>> r);

  double coeff(int k, int i) const { return rows[k - 1][i]; }  // 0 <= i < k <= N
};

struct TracePoint {
  Eigen::VectorXd x;
  Eigen::VectorXd grad;
  double fval;
};

/// Record of one run: the oracle evaluations in call order, the output point,
/// and (for the three-sequence method) the x/y/z iterates.
struct Trace {
  int dim = 0;
  std::vector<TracePoint> evals;  // one entry per oracle call
  Eigen::VectorXd output;

  std::vector<Eigen::VectorXd> x_seq;  // x_0..x_N   (three-sequence runs only)
  std::vector<Eigen::VectorXd> y_seq;  // y_0..y_{N-1}
  std::vector<Eigen::VectorXd> z_seq;  // z_0..z_N
};

/// Runs the information-theoretic exact method for the schedule's horizon.
/// Exactly N oracle calls, at y_0..y_{N-1}; output is z_N.
Trace run_item(const FirstOrderOracle& oracle, const Eigen::VectorXd& x0, const Schedule& schedule);

/// Runs an h-form method; N oracle calls at w_0..w_{N-1}; output w_N.
Trace run_fixed_step(const FixedStepMethod& method, const FirstOrderOracle& oracle,
                     const Eigen::VectorXd& x0);

/// Runs an alpha-form method against the shifted oracle (class F_{0,L-mu}).
/// Needs the minimizer, so this is a test-surface runner.
Trace run_alpha_form(const FixedStepMethod& method, const FirstOrderOracle& tilde_oracle,
                     const Eigen::VectorXd& w_star, const Eigen::VectorXd& x0);

FixedStepMethod alpha_from_h(const FixedStepMethod& method);
FixedStepMethod h_from_alpha(const FixedStepMethod& method);

using Runner = std::function<Trace(const FirstOrderOracle&, const Eigen::VectorXd&)>;

/// Reads off the h coefficients of any runner whose updates are affine in past
/// gradients, by running it against a synthetic oracle that returns fresh unit
/// basis vectors. Throws if the expansion residual exceeds 1e-9.
FixedStepMethod extract_h(const Runner& runner, int N, const ClassParams& params);

/// Runner adapter for run_item (evaluation points y_i, output z_N).
Runner item_runner(int N);

nlohmann::json method_to_json(const FixedStepMethod& m);
FixedStepMethod method_from_json(const nlohmann::json& j);

/// CSV with header k,x_dist_sq,f_gap[,z_dist_sq,z_bound]; the distance and gap
/// columns need the oracle's minimizer.
std::string trace_to_csv(const Trace& trace, const FirstOrderOracle& oracle,
                         const Schedule* schedule = nullptr);

}  // namespace itm
