#include "itm/methods.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace itm {

FixedStepMethod::FixedStepMethod(ClassParams p, CoeffForm f, std::vector<std::vector<double>> r)
    : params(p), N(static_cast<int>(r.size())), form(f), rows(std::move(r)) {
  for (int k = 1; k <= N; ++k) {
    if (static_cast<int>(rows[k - 1].size()) != k) {
      throw std::invalid_argument("FixedStepMethod: row " + std::to_string(k) +
                                  " must have " + std::to_string(k) + " entries");
    }
  }
}

Trace run_item(const FirstOrderOracle& oracle, const Eigen::VectorXd& x0,
               const Schedule& schedule) {
  if (x0.size() != oracle.dim()) throw std::invalid_argument("run_item: x0 dimension mismatch");
  if (!x0.allFinite()) throw std::invalid_argument("run_item: x0 must be finite");
  const double q = schedule.params.q;
  const double L = schedule.params.L;
  const int N = schedule.N;

  Trace t;
  t.dim = oracle.dim();
  Eigen::VectorXd x = x0;
  Eigen::VectorXd z = x0;
  t.x_seq.push_back(x);
  t.z_seq.push_back(z);
  for (int k = 0; k < N; ++k) {
    const Eigen::VectorXd y = (1.0 - schedule.beta[k]) * z + schedule.beta[k] * x;
    auto [fy, gy] = oracle(y);
    t.y_seq.push_back(y);
    t.evals.push_back({y, gy, fy});
    x = y - gy / L;
    z = (1.0 - q * schedule.delta[k]) * z + q * schedule.delta[k] * y -
        (schedule.delta[k] / L) * gy;
    t.x_seq.push_back(x);
    t.z_seq.push_back(z);
  }
  t.output = z;
  return t;
}

Trace run_fixed_step(const FixedStepMethod& method, const FirstOrderOracle& oracle,
                     const Eigen::VectorXd& x0) {
  if (method.form != CoeffForm::kH) {
    throw std::invalid_argument("run_fixed_step: method must be in h-form");
  }
  if (x0.size() != oracle.dim()) {
    throw std::invalid_argument("run_fixed_step: x0 dimension mismatch");
  }
  const double L = method.params.L;
  Trace t;
  t.dim = oracle.dim();
  Eigen::VectorXd w = x0;
  for (int k = 1; k <= method.N; ++k) {
    auto [fw, gw] = oracle(w);
    t.evals.push_back({w, gw, fw});
    Eigen::VectorXd next = w;
    for (int i = 0; i < k; ++i) {
      next -= (method.coeff(k, i) / L) * t.evals[i].grad;
    }
    w = next;
  }
  t.output = w;
  return t;
}

Trace run_alpha_form(const FixedStepMethod& method, const FirstOrderOracle& tilde_oracle,
                     const Eigen::VectorXd& w_star, const Eigen::VectorXd& x0) {
  if (method.form != CoeffForm::kAlpha) {
    throw std::invalid_argument("run_alpha_form: method must be in alpha-form");
  }
  if (x0.size() != tilde_oracle.dim() || w_star.size() != tilde_oracle.dim()) {
    throw std::invalid_argument("run_alpha_form: dimension mismatch");
  }
  const double L = method.params.L;
  const double q = method.params.q;
  Trace t;
  t.dim = tilde_oracle.dim();
  Eigen::VectorXd w = x0;
  for (int k = 1; k <= method.N; ++k) {
    auto [fw, gw] = tilde_oracle(w);
    t.evals.push_back({w, gw, fw});
    double coeff_sum = 0.0;
    for (int i = 0; i < k; ++i) coeff_sum += method.coeff(k, i);
    Eigen::VectorXd next = w_star + (x0 - w_star) * (1.0 - q * coeff_sum);
    for (int i = 0; i < k; ++i) {
      next -= (method.coeff(k, i) / L) * t.evals[i].grad;
    }
    w = next;
  }
  t.output = w;
  return t;
}

FixedStepMethod alpha_from_h(const FixedStepMethod& method) {
  if (method.form != CoeffForm::kH) throw std::invalid_argument("alpha_from_h: expects h-form");
  const double q = method.params.q;
  const int N = method.N;
  std::vector<std::vector<double>> alpha(N);
  for (int k = 1; k <= N; ++k) {
    alpha[k - 1].resize(k);
    alpha[k - 1][k - 1] = method.coeff(k, k - 1);
    for (int i = k - 2; i >= 0; --i) {
      double s = 0.0;
      for (int j = i + 1; j <= k - 1; ++j) s += method.coeff(k, j) * alpha[j - 1][i];
      alpha[k - 1][i] = method.coeff(k, i) + alpha[k - 2][i] - q * s;
    }
  }
  return FixedStepMethod(method.params, CoeffForm::kAlpha, std::move(alpha));
}

FixedStepMethod h_from_alpha(const FixedStepMethod& method) {
  if (method.form != CoeffForm::kAlpha) {
    throw std::invalid_argument("h_from_alpha: expects alpha-form");
  }
  const double q = method.params.q;
  const int N = method.N;
  const auto& alpha = method.rows;
  std::vector<std::vector<double>> h(N);
  for (int k = 1; k <= N; ++k) {
    h[k - 1].resize(k);
    h[k - 1][k - 1] = alpha[k - 1][k - 1];
    for (int i = k - 2; i >= 0; --i) {
      double s = 0.0;
      for (int j = i + 1; j <= k - 1; ++j) s += h[k - 1][j] * alpha[j - 1][i];
      h[k - 1][i] = alpha[k - 1][i] - alpha[k - 2][i] + q * s;
    }
  }
  return FixedStepMethod(method.params, CoeffForm::kH, std::move(h));
}

FixedStepMethod extract_h(const Runner& runner, int N, const ClassParams& params) {
  // Synthetic space: x0 = e_0, the k-th gradient returned is e_{k+1}. Every
  // iterate of an affine-in-gradients method is then x0 plus a readable
  // combination of the basis gradients.
  const int d = N + 1;
  int calls = 0;
  auto eval = [&calls, d](const Eigen::VectorXd&) {
    if (calls >= d - 1) throw std::runtime_error("extract_h: more oracle calls than declared N");
    Eigen::VectorXd g = Eigen::VectorXd::Zero(d);
    g(++calls) = 1.0;
    return std::make_pair(0.0, g);
  };
  FirstOrderOracle synthetic(d, params, eval);
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(d);
  x0(0) = 1.0;
  Trace t = runner(synthetic, x0);
  if (static_cast<int>(t.evals.size()) != N) {
    throw std::runtime_error("extract_h: runner made an unexpected number of oracle calls");
  }

  std::vector<Eigen::VectorXd> w;
  for (const auto& p : t.evals) w.push_back(p.x);
  w.push_back(t.output);

  const double L = params.L;
  std::vector<std::vector<double>> h(N);
  for (int k = 1; k <= N; ++k) {
    const Eigen::VectorXd diff = w[k - 1] - w[k];
    if (std::abs(diff(0)) > 1e-9) {
      throw std::runtime_error("extract_h: nonlinearity detected (x0 coefficient drifts)");
    }
    h[k - 1].resize(k);
    for (int i = 0; i < k; ++i) h[k - 1][i] = L * diff(i + 1);
    for (int i = k; i < N; ++i) {
      if (std::abs(diff(i + 1)) > 1e-9) {
        throw std::runtime_error("extract_h: update uses a gradient not yet evaluated");
      }
    }
  }
  return FixedStepMethod(params, CoeffForm::kH, std::move(h));
}

Runner item_runner(int N) {
  return [N](const FirstOrderOracle& oracle, const Eigen::VectorXd& x0) {
    return run_item(oracle, x0, build_schedule(oracle.params(), N));
  };
}

nlohmann::json method_to_json(const FixedStepMethod& m) {
  return nlohmann::json{{"mu", m.params.mu},
                        {"L", m.params.L},
                        {"N", m.N},
                        {"form", m.form == CoeffForm::kH ? "h" : "alpha"},
                        {"rows", m.rows}};
}

FixedStepMethod method_from_json(const nlohmann::json& j) {
  ClassParams params(j.at("mu").get<double>(), j.at("L").get<double>());
  const std::string form = j.at("form").get<std::string>();
  if (form != "h" && form != "alpha") {
    throw std::invalid_argument("method_from_json: form must be 'h' or 'alpha'");
  }
  auto rows = j.at("rows").get<std::vector<std::vector<double>>>();
  FixedStepMethod m(params, form == "h" ? CoeffForm::kH : CoeffForm::kAlpha, std::move(rows));
  if (j.contains("N") && j.at("N").get<int>() != m.N) {
    throw std::invalid_argument("method_from_json: N does not match rows");
  }
  return m;
}

std::string trace_to_csv(const Trace& trace, const FirstOrderOracle& oracle,
                         const Schedule* schedule) {
  std::ostringstream os;
  os.precision(17);
  const bool item = !trace.z_seq.empty();
  const bool with_bound = item && schedule != nullptr;
  os << "k,x_dist_sq,f_gap";
  if (item) os << ",z_dist_sq";
  if (with_bound) os << ",z_bound";
  os << "\n";
  if (!oracle.x_star()) return os.str();
  const Eigen::VectorXd& xs = *oracle.x_star();
  const double fs = oracle.f_star() ? *oracle.f_star() : 0.0;
  const auto& xseq = item ? trace.x_seq : std::vector<Eigen::VectorXd>{};
  const int n = item ? static_cast<int>(trace.x_seq.size())
                     : static_cast<int>(trace.evals.size()) + 1;
  const double z0 = item ? (trace.z_seq[0] - xs).squaredNorm() : 0.0;
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd xk;
    if (item) {
      xk = xseq[k];
    } else {
      xk = (k < static_cast<int>(trace.evals.size())) ? trace.evals[k].x : trace.output;
    }
    os << k << "," << (xk - xs).squaredNorm() << "," << (oracle(xk).first - fs);
    if (item) os << "," << (trace.z_seq[k] - xs).squaredNorm();
    if (with_bound) {
      const double q = schedule->params.q;
      os << "," << z0 / (1.0 + q * schedule->A[k]);
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace itm
