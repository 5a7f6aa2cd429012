#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "itm/schedules.hpp"

namespace itm {

/// First-order oracle x -> (f(x), grad f(x)) for a declared class F_{mu,L}.
/// Immutable; safe to evaluate from several threads at once.
class FirstOrderOracle {
 public:
  using Eval = std::function<std::pair<double, Eigen::VectorXd>(const Eigen::VectorXd&)>;

  FirstOrderOracle(int dim, ClassParams cls, Eval eval)
      : dim_(dim), cls_(cls), eval_(std::move(eval)) {}

  FirstOrderOracle(int dim, ClassParams cls, Eval eval, Eigen::VectorXd x_star, double f_star)
      : dim_(dim), cls_(cls), eval_(std::move(eval)), x_star_(std::move(x_star)), f_star_(f_star) {}

  std::pair<double, Eigen::VectorXd> operator()(const Eigen::VectorXd& x) const;

  int dim() const { return dim_; }
  const ClassParams& params() const { return cls_; }
  const std::optional<Eigen::VectorXd>& x_star() const { return x_star_; }
  std::optional<double> f_star() const { return f_star_; }

 private:
  int dim_;
  ClassParams cls_;
  Eval eval_;
  std::optional<Eigen::VectorXd> x_star_;
  std::optional<double> f_star_;
};

struct SampledTriplets {
  std::vector<Eigen::VectorXd> x;
  std::vector<Eigen::VectorXd> g;
  std::vector<double> f;

  void add(Eigen::VectorXd xi, Eigen::VectorXd gi, double fi);
  size_t size() const { return f.size(); }
};

struct InterpolationReport {
  double min_slack;  // negative = some pair violates the class inequality
  int worst_i = -1;
  int worst_j = -1;
  bool ok(double tol = -1e-9) const { return min_slack >= tol; }
};

/// f(x) = (x - x_star)' H (x - x_star) / 2 + f_star with spec(H) in [mu, L]
/// (verified to 1e-9).
FirstOrderOracle quadratic_oracle(const Eigen::MatrixXd& H, const Eigen::VectorXd& x_star,
                                  double f_star, const ClassParams& cls);

/// {"eigenvalues":[...], "xstar":[...], "fstar":...} with H = diag(eigenvalues).
FirstOrderOracle quadratic_oracle_from_json(const nlohmann::json& j, const ClassParams& cls);

/// Checks the F_{mu,L}-interpolation inequality over every ordered pair and
/// reports the smallest slack.
InterpolationReport interpolation_check(const SampledTriplets& s, double mu, double L);

/// Slack of the single pair (i, j): f_i - f_j - <g_j, x_i - x_j> - ... >= 0 iff in class.
double interpolation_slack(const Eigen::VectorXd& xi, const Eigen::VectorXd& gi, double fi,
                           const Eigen::VectorXd& xj, const Eigen::VectorXd& gj, double fj,
                           double mu, double L);

/// Shifted oracle for f~(x) = f(x) - mu/2 |x - x_star|^2, in class F_{0, L-mu}.
FirstOrderOracle shift_to_tilde(const FirstOrderOracle& oracle);

}  // namespace itm
