#include "itm/pep.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace itm {

namespace {

Eigen::MatrixXd sym_outer(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return 0.5 * (a * b.transpose() + b * a.transpose());
}

// Variable layout for the primal PEPs: the gram_dim x gram_dim symmetric G
// packed (i <= j), then the f values. G_{ij} for i < j is one variable
// entering the matrix at both (i,j) and (j,i).
struct PrimalLayout {
  int gram_dim;
  int f_dim;

  int n_gram() const { return gram_dim * (gram_dim + 1) / 2; }
  int n_vars() const { return n_gram() + f_dim; }
  int gram_var(int i, int j) const {  // i <= j
    return i * gram_dim - i * (i - 1) / 2 + (j - i);
  }
  int f_var(int i) const { return n_gram() + i; }

  // linear form <Q, G> in the packed variables
  void accumulate_gram(Eigen::VectorXd& coeffs, const Eigen::MatrixXd& Q, double w = 1.0) const {
    for (int i = 0; i < gram_dim; ++i) {
      coeffs(gram_var(i, i)) += w * Q(i, i);
      for (int j = i + 1; j < gram_dim; ++j) coeffs(gram_var(i, j)) += w * 2.0 * Q(i, j);
    }
  }
};

struct PairConstraint {
  int i;  // -1 encodes the optimum index
  int j;
};

// interpolation constraint for pair (i, j) over the shifted class:
// f_j - f_i + <g_j, w_i - w_j> + |g_i - g_j|^2 / (2 Lt) <= 0
Eigen::VectorXd pair_row(const PrimalLayout& lay, const GramBasis& basis, double Lt,
                         const PairConstraint& pc) {
  const int n = lay.gram_dim;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd& gi = pc.i < 0 ? zero : basis.g[pc.i];
  const Eigen::VectorXd& gj = pc.j < 0 ? zero : basis.g[pc.j];
  const Eigen::VectorXd& wi = pc.i < 0 ? zero : basis.w[pc.i];
  const Eigen::VectorXd& wj = pc.j < 0 ? zero : basis.w[pc.j];
  Eigen::VectorXd row = Eigen::VectorXd::Zero(lay.n_vars());
  if (pc.i >= 0) row(lay.f_var(pc.i)) -= 1.0;
  if (pc.j >= 0) row(lay.f_var(pc.j)) += 1.0;
  Eigen::MatrixXd Q = sym_outer(gj, wi - wj);
  Q += (gi - gj) * (gi - gj).transpose() / (2.0 * Lt);
  lay.accumulate_gram(row, Q);
  return row;
}

SdpProblem build_primal(const FixedStepMethod& alpha_form, const Criterion& criterion,
                        const std::vector<PairConstraint>& pairs) {
  const auto& params = alpha_form.params;
  const int N = alpha_form.N;
  const double Lt = params.L - params.mu;
  GramBasis basis = GramBasis::build(alpha_form, criterion.kind);
  PrimalLayout lay{basis.gram_dim, basis.f_dim};

  SdpProblem p(lay.n_vars());

  // objective: maximize the criterion numerator
  Eigen::VectorXd obj = Eigen::VectorXd::Zero(lay.n_vars());
  if (criterion.kind == CriterionKind::kDistOverDist) {
    lay.accumulate_gram(obj, basis.w[N] * basis.w[N].transpose());
  } else {
    obj(lay.f_var(N)) += 1.0;
    lay.accumulate_gram(obj, basis.w[N] * basis.w[N].transpose(), params.mu / 2.0);
  }
  p.objective = -obj;  // SdpProblem minimizes

  // G >= 0
  auto& gblock = p.add_block(lay.gram_dim);
  for (int i = 0; i < lay.gram_dim; ++i) {
    for (int j = i; j < lay.gram_dim; ++j) {
      Eigen::MatrixXd E = Eigen::MatrixXd::Zero(lay.gram_dim, lay.gram_dim);
      E(i, j) = E(j, i) = 1.0;
      p.add_term(gblock, lay.gram_var(i, j), E);
    }
  }

  // normalization
  Eigen::VectorXd norm = Eigen::VectorXd::Zero(lay.n_vars());
  if (criterion.kind == CriterionKind::kDistOverDist) {
    lay.accumulate_gram(norm, basis.w0 * basis.w0.transpose());
  } else {
    lay.accumulate_gram(norm, basis.w0 * basis.w0.transpose(),
                        criterion.c_w + criterion.c_f * params.mu / 2.0);
    norm(lay.f_var(0)) += criterion.c_f;
  }
  p.add_equality(norm, 1.0);

  for (const auto& pc : pairs) {
    p.add_linear_le(pair_row(lay, basis, Lt, pc), 0.0);
  }
  return p;
}

std::vector<PairConstraint> relaxed_pairs(CriterionKind kind, int N) {
  std::vector<PairConstraint> pairs;
  if (kind == CriterionKind::kDistOverDist) {
    for (int i = 0; i + 1 <= N - 1; ++i) pairs.push_back({i, i + 1});
    for (int i = 0; i <= N - 1; ++i) pairs.push_back({-1, i});
    pairs.push_back({N - 1, -1});
  } else {
    for (int i = 0; i + 1 <= N; ++i) pairs.push_back({i, i + 1});
    for (int i = 0; i <= N; ++i) pairs.push_back({-1, i});
  }
  return pairs;
}

std::vector<PairConstraint> full_pairs(CriterionKind kind, int N) {
  const int last = (kind == CriterionKind::kDistOverDist) ? N - 1 : N;
  std::vector<PairConstraint> pairs;
  for (int i = -1; i <= last; ++i) {
    for (int j = -1; j <= last; ++j) {
      if (i != j) pairs.push_back({i, j});
    }
  }
  return pairs;
}

FixedStepMethod as_alpha(const FixedStepMethod& method) {
  return method.form == CoeffForm::kAlpha ? method : alpha_from_h(method);
}

// variable layout of the dual/linearized problems
struct DualLayout {
  int N;
  CriterionKind kind;
  bool with_b;  // design problems carry the linearized rows as variables

  int n_star() const { return kind == CriterionKind::kDistOverDist ? N : N + 1; }
  int n_chain() const { return kind == CriterionKind::kDistOverDist ? N - 1 : N; }
  bool has_last() const { return kind == CriterionKind::kDistOverDist; }
  int tau() const { return 0; }
  int star(int i) const { return 1 + i; }
  int chain(int i) const { return 1 + n_star() + i; }
  int last() const { return 1 + n_star() + n_chain(); }
  int b_var(int i, int j) const {  // row i = 1..N, entry j < i
    return 1 + n_star() + n_chain() + (has_last() ? 1 : 0) + i * (i - 1) / 2 + j;
  }
  int n_vars() const {
    const int base = 1 + n_star() + n_chain() + (has_last() ? 1 : 0);
    return with_b ? base + N * (N + 1) / 2 : base;
  }
};

}  // namespace

Criterion Criterion::function_value(double cw, double cf) {
  if (cw < 0.0 || cf < 0.0 || (cw == 0.0 && cf == 0.0)) {
    throw std::invalid_argument("criterion: need c_w, c_f >= 0, not both zero");
  }
  return {CriterionKind::kFuncOverMix, cw, cf};
}

GramBasis GramBasis::build(const FixedStepMethod& alpha_form, CriterionKind kind) {
  if (alpha_form.form != CoeffForm::kAlpha) {
    throw std::invalid_argument("GramBasis: method must be in alpha-form");
  }
  const int N = alpha_form.N;
  GramBasis basis;
  basis.gram_dim = kind == CriterionKind::kDistOverDist ? N + 1 : N + 2;
  basis.f_dim = kind == CriterionKind::kDistOverDist ? N : N + 1;
  basis.w0 = Eigen::VectorXd::Zero(basis.gram_dim);
  basis.w0(0) = 1.0;
  const int n_grad = kind == CriterionKind::kDistOverDist ? N : N + 1;
  for (int i = 0; i < n_grad; ++i) {
    Eigen::VectorXd gi = Eigen::VectorXd::Zero(basis.gram_dim);
    gi(i + 1) = 1.0;
    basis.g.push_back(std::move(gi));
  }
  const double q = alpha_form.params.q;
  const double L = alpha_form.params.L;
  basis.w.push_back(basis.w0);
  for (int k = 1; k <= N; ++k) {
    double coeff_sum = 0.0;
    for (int i = 0; i < k; ++i) coeff_sum += alpha_form.coeff(k, i);
    Eigen::VectorXd wk = basis.w0 * (1.0 - q * coeff_sum);
    for (int i = 0; i < k; ++i) wk -= (alpha_form.coeff(k, i) / L) * basis.g[i];
    basis.w.push_back(std::move(wk));
  }
  return basis;
}

SdpProblem build_full_pep(const FixedStepMethod& alpha_form, const Criterion& criterion) {
  const auto a = as_alpha(alpha_form);
  return build_primal(a, criterion, full_pairs(criterion.kind, a.N));
}

SdpProblem build_relaxed_pep(const FixedStepMethod& alpha_form, const Criterion& criterion) {
  const auto a = as_alpha(alpha_form);
  return build_primal(a, criterion, relaxed_pairs(criterion.kind, a.N));
}

LinearizedRows linearize_alpha(const FixedStepMethod& alpha_form, const DualCertificate& cert) {
  const int N = alpha_form.N;
  LinearizedRows b(N);
  for (int i = 1; i <= N; ++i) {
    b[i - 1].resize(i);
    double mult;
    if (i == N) {
      mult = 1.0;
    } else if (cert.criterion == CriterionKind::kDistOverDist && i == N - 1) {
      mult = cert.lambda_last;
    } else {
      mult = cert.lambda_chain[i];
    }
    for (int j = 0; j < i; ++j) b[i - 1][j] = mult * alpha_form.coeff(i, j);
  }
  return b;
}

Eigen::MatrixXd minimax_s_matrix(const ClassParams& params, int N, const Criterion& criterion,
                                 double tau, const std::vector<double>& lambda_star,
                                 const std::vector<double>& lambda_chain, double lambda_last,
                                 const LinearizedRows& b) {
  const bool dist = criterion.kind == CriterionKind::kDistOverDist;
  const double q = params.q;
  const double L = params.L;
  const double Lt = L - params.mu;
  const int dim = dist ? N + 1 : N + 2;
  const int n_grad = dist ? N : N + 1;

  Eigen::VectorXd w0 = Eigen::VectorXd::Zero(dim);
  w0(0) = 1.0;
  std::vector<Eigen::VectorXd> g(n_grad, Eigen::VectorXd::Zero(dim));
  for (int i = 0; i < n_grad; ++i) g[i](i + 1) = 1.0;

  auto row_sum = [&b](int i) {
    if (i == 0) return 0.0;  // row 0 has no entries
    double s = 0.0;
    for (double v : b[i - 1]) s += v;
    return s;
  };

  Eigen::MatrixXd S;
  if (dist) {
    S = tau * (w0 * w0.transpose());
    S += lambda_last / (2.0 * Lt) * (g[N - 1] * g[N - 1].transpose());
    for (int i = 0; i < N; ++i) S += lambda_star[i] / (2.0 * Lt) * (g[i] * g[i].transpose());
    for (int i = 0; i + 1 <= N - 1; ++i) {
      const Eigen::VectorXd dg = g[i] - g[i + 1];
      S += lambda_chain[i] / (2.0 * Lt) * (dg * dg.transpose());
    }
    S -= lambda_star[0] * sym_outer(g[0], w0);
    // -lambda_{i,i+1} (x) w_i for the interior rows, expanded through b
    for (int i = 1; i <= N - 2; ++i) {
      S -= (lambda_chain[i] - q * row_sum(i)) * sym_outer(g[i], w0);
      for (int j = 0; j < i; ++j) S += (b[i - 1][j] / L) * sym_outer(g[i], g[j]);
    }
    // -lambda_{N-1,*} (x) w_{N-1}; only exists once the chain substitution
    // applies, i.e. N >= 2
    if (N >= 2) {
      S -= (lambda_last - q * row_sum(N - 1)) * sym_outer(g[N - 1], w0);
      for (int j = 0; j < N - 1; ++j) S += (b[N - 2][j] / L) * sym_outer(g[N - 1], g[j]);
    }
    // +lambda_{i,i+1} (x) w_i on g_{i+1}
    for (int i = 0; i <= N - 2; ++i) {
      S += (lambda_chain[i] - q * row_sum(i)) * sym_outer(g[i + 1], w0);
      for (int j = 0; j < i; ++j) S -= (b[i - 1][j] / L) * sym_outer(g[i + 1], g[j]);
    }
  } else {
    S = tau * (criterion.c_w + criterion.c_f * params.mu / 2.0) * (w0 * w0.transpose());
    for (int i = 0; i <= N; ++i) S += lambda_star[i] / (2.0 * Lt) * (g[i] * g[i].transpose());
    for (int i = 0; i <= N - 1; ++i) {
      const Eigen::VectorXd dg = g[i] - g[i + 1];
      S += lambda_chain[i] / (2.0 * Lt) * (dg * dg.transpose());
    }
    S -= lambda_star[0] * sym_outer(g[0], w0);
    for (int i = 1; i <= N - 1; ++i) {
      S -= (lambda_chain[i] - q * row_sum(i)) * sym_outer(g[i], w0);
      for (int j = 0; j < i; ++j) S += (b[i - 1][j] / L) * sym_outer(g[i], g[j]);
    }
    // g_N row: its multiplier is pinned to 1 by the chain
    S -= (1.0 - q * row_sum(N)) * sym_outer(g[N], w0);
    for (int j = 0; j < N; ++j) S += (b[N - 1][j] / L) * sym_outer(g[N], g[j]);
    for (int i = 0; i <= N - 1; ++i) {
      S += (lambda_chain[i] - q * row_sum(i)) * sym_outer(g[i + 1], w0);
      for (int j = 0; j < i; ++j) S -= (b[i - 1][j] / L) * sym_outer(g[i + 1], g[j]);
    }
  }

  // row 0 of b never exists (j < 0); sums over it are empty by construction
  return S;
}

Eigen::VectorXd minimax_w_last(const ClassParams& params, int N, CriterionKind kind,
                               const std::vector<double>& b_last) {
  const int dim = kind == CriterionKind::kDistOverDist ? N + 1 : N + 2;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
  double s = 0.0;
  for (double v : b_last) s += v;
  w(0) = 1.0 - params.q * s;
  for (int j = 0; j < N; ++j) w(j + 1) -= b_last[j] / params.L;
  return w;
}

Eigen::MatrixXd minimax_bordered(const ClassParams& params, int N, const Criterion& criterion,
                                 double tau, const std::vector<double>& lambda_star,
                                 const std::vector<double>& lambda_chain, double lambda_last,
                                 const LinearizedRows& b) {
  const Eigen::MatrixXd S =
      minimax_s_matrix(params, N, criterion, tau, lambda_star, lambda_chain, lambda_last, b);
  const bool dist = criterion.kind == CriterionKind::kDistOverDist;
  if (!dist && params.mu == 0.0) return S;  // objective has no |w_N|^2 term at mu = 0
  const Eigen::VectorXd wN = minimax_w_last(params, N, criterion.kind, b[N - 1]);
  const int n = static_cast<int>(S.rows());
  Eigen::MatrixXd M(n + 1, n + 1);
  M.topLeftCorner(n, n) = S;
  const double scale = dist ? 1.0 : std::sqrt(params.mu);
  M.block(0, n, n, 1) = scale * wN;
  M.block(n, 0, 1, n) = scale * wN.transpose();
  M(n, n) = dist ? 1.0 : 2.0;
  return M;
}

namespace {

// Builds dual-relaxed or minimax problems through the shared assembly, by
// sampling the affine map at unit vectors.
SdpProblem build_dual_like(const ClassParams& params, int N, const Criterion& criterion,
                           bool with_b, const FixedStepMethod* fixed_alpha) {
  DualLayout lay{N, criterion.kind, with_b};
  SdpProblem p(lay.n_vars());
  p.objective(lay.tau()) = 1.0;

  auto evaluate = [&](const Eigen::VectorXd& vars) {
    std::vector<double> lam_star(lay.n_star()), lam_chain(lay.n_chain());
    for (int i = 0; i < lay.n_star(); ++i) lam_star[i] = vars(lay.star(i));
    for (int i = 0; i < lay.n_chain(); ++i) lam_chain[i] = vars(lay.chain(i));
    const double lam_last = lay.has_last() ? vars(lay.last()) : 0.0;
    LinearizedRows b(N);
    for (int i = 1; i <= N; ++i) {
      b[i - 1].resize(i);
      for (int j = 0; j < i; ++j) {
        if (with_b) {
          b[i - 1][j] = vars(lay.b_var(i, j));
        } else {
          double mult;
          if (i == N) {
            mult = 1.0;
          } else if (criterion.kind == CriterionKind::kDistOverDist && i == N - 1) {
            mult = lam_last;
          } else {
            mult = lam_chain[i];
          }
          b[i - 1][j] = mult * fixed_alpha->coeff(i, j);
        }
      }
    }
    return minimax_bordered(params, N, criterion, vars(lay.tau()), lam_star, lam_chain, lam_last,
                            b);
  };

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(lay.n_vars());
  const Eigen::MatrixXd base = evaluate(zero);
  auto& block = p.add_block(static_cast<int>(base.rows()));
  block.C = base;
  for (int v = 0; v < lay.n_vars(); ++v) {
    Eigen::VectorXd unit = zero;
    unit(v) = 1.0;
    const Eigen::MatrixXd diff = evaluate(unit) - base;
    if (diff.cwiseAbs().maxCoeff() > 0.0) p.add_term(block, v, diff);
  }

  p.add_lower_bound(lay.tau(), 0.0);
  for (int i = 0; i < lay.n_star(); ++i) p.add_lower_bound(lay.star(i), 0.0);
  for (int i = 0; i < lay.n_chain(); ++i) p.add_lower_bound(lay.chain(i), 0.0);
  if (lay.has_last()) p.add_lower_bound(lay.last(), 0.0);

  // equality chain
  auto unit_eq = [&](std::initializer_list<std::pair<int, double>> terms, double rhs) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(lay.n_vars());
    for (const auto& [idx, c] : terms) a(idx) += c;
    p.add_equality(a, rhs);
  };
  if (criterion.kind == CriterionKind::kDistOverDist) {
    if (N == 1) {
      unit_eq({{lay.star(0), 1.0}, {lay.last(), -1.0}}, 0.0);
    } else {
      unit_eq({{lay.star(0), 1.0}, {lay.chain(0), -1.0}}, 0.0);
      for (int i = 1; i <= N - 2; ++i) {
        unit_eq({{lay.chain(i - 1), 1.0}, {lay.star(i), 1.0}, {lay.chain(i), -1.0}}, 0.0);
      }
      unit_eq({{lay.chain(N - 2), 1.0}, {lay.star(N - 1), 1.0}, {lay.last(), -1.0}}, 0.0);
    }
  } else {
    // tau c_f + lambda_{*,0} - lambda_{0,1} = 0
    unit_eq({{lay.tau(), criterion.c_f}, {lay.star(0), 1.0}, {lay.chain(0), -1.0}}, 0.0);
    for (int i = 1; i <= N - 1; ++i) {
      unit_eq({{lay.chain(i - 1), 1.0}, {lay.star(i), 1.0}, {lay.chain(i), -1.0}}, 0.0);
    }
    unit_eq({{lay.chain(N - 1), 1.0}, {lay.star(N), 1.0}}, 1.0);
  }
  return p;
}

DualCertificate certificate_from_vars(const ClassParams& params, int N,
                                      const Criterion& criterion, const Eigen::VectorXd& vars) {
  DualLayout lay{N, criterion.kind, false};
  DualCertificate cert{params,
                       N,
                       criterion.kind,
                       criterion.c_w,
                       criterion.c_f,
                       vars(lay.tau()),
                       {},
                       {},
                       0.0};
  for (int i = 0; i < lay.n_star(); ++i) cert.lambda_star.push_back(vars(lay.star(i)));
  for (int i = 0; i < lay.n_chain(); ++i) cert.lambda_chain.push_back(vars(lay.chain(i)));
  if (lay.has_last()) cert.lambda_last = vars(lay.last());
  return cert;
}

}  // namespace

SdpProblem build_dual_relaxed(const FixedStepMethod& alpha_form, const Criterion& criterion) {
  const auto a = as_alpha(alpha_form);
  if (a.N < 1) throw std::invalid_argument("build_dual_relaxed: N >= 1 required");
  return build_dual_like(a.params, a.N, criterion, /*with_b=*/false, &a);
}

SdpProblem build_design_problem(const ClassParams& params, int N, const Criterion& criterion) {
  return build_dual_like(params, N, criterion, /*with_b=*/true, nullptr);
}

DualCertificate dual_certificate_from_solution(const ClassParams& params, int N,
                                               const Criterion& criterion,
                                               const Eigen::VectorXd& vars) {
  return certificate_from_vars(params, N, criterion, vars);
}

WorstCaseResult worst_case_bound(const FixedStepMethod& method, const Criterion& criterion,
                                 PepMode mode, const SdpSettings& settings) {
  const auto a = as_alpha(method);
  WorstCaseResult result;
  if (mode == PepMode::kFull) {
    const SdpProblem p = build_full_pep(a, criterion);
    const SdpSolution s = solve(p, settings);
    result.status = s.status;
    result.value = -s.objective;  // primal maximization was negated
    if (s.status == SdpStatus::kOptimal && s.x.size() != 0) {
      const int n = a.N + (criterion.kind == CriterionKind::kDistOverDist ? 1 : 2);
      Eigen::MatrixXd G(n, n);
      int idx = 0;
      for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
          G(i, j) = G(j, i) = s.x(idx);
          ++idx;
        }
      }
      result.gram = G;
    }
    return result;
  }
  const SdpProblem p = build_dual_relaxed(a, criterion);
  const SdpSolution s = solve(p, settings);
  result.status = s.status;
  result.value = s.objective;
  if (s.status == SdpStatus::kOptimal) {
    result.certificate = certificate_from_vars(a.params, a.N, criterion, s.x);
  }
  return result;
}

Eigen::MatrixXd gram_factor(const Eigen::MatrixXd& gram) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  Eigen::VectorXd ev = es.eigenvalues();
  for (int i = 0; i < ev.size(); ++i) ev(i) = ev(i) > 1e-10 ? std::sqrt(ev(i)) : 0.0;
  return es.eigenvectors() * ev.asDiagonal();
}

}  // namespace itm
