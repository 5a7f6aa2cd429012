#include "itm/sdp.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace itm {

namespace {

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& M) {
  return 0.5 * (M + M.transpose());
}

// Largest step t in [0, cap] keeping S + t D positive definite, via the
// smallest eigenvalue of L^{-1} D L^{-T} for S = L L^T.
double max_psd_step(const Eigen::LLT<Eigen::MatrixXd>& chol, const Eigen::MatrixXd& D,
                    double cap) {
  const Eigen::MatrixXd Linv_D =
      chol.matrixL().solve(Eigen::MatrixXd(chol.matrixL().solve(D).transpose()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(Linv_D), Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  if (lo >= 0.0) return cap;
  return std::min(cap, -1.0 / lo);
}

struct Reduced {
  // min cr'v s.t. Cb + sum_j v_j Ab_j >= 0 per block; x = x0 + Nv.
  Eigen::VectorXd x0;
  Eigen::MatrixXd Nbasis;  // n_vars x m
  Eigen::VectorXd cr;
  std::vector<Eigen::MatrixXd> C;                 // per block
  std::vector<std::vector<Eigen::MatrixXd>> A;    // per block, per reduced var
  bool eq_consistent = true;
};

Reduced reduce(const SdpProblem& p) {
  Reduced r;
  const int n = p.n_vars;
  if (p.eq_lhs.rows() == 0) {
    r.x0 = Eigen::VectorXd::Zero(n);
    r.Nbasis = Eigen::MatrixXd::Identity(n, n);
  } else {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(p.eq_lhs);
    r.x0 = cod.solve(p.eq_rhs);
    if ((p.eq_lhs * r.x0 - p.eq_rhs).cwiseAbs().maxCoeff() >
        1e-9 * (1.0 + p.eq_rhs.cwiseAbs().maxCoeff())) {
      r.eq_consistent = false;
      return r;
    }
    // kernel basis from the full SVD (deterministic, orthonormal)
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(p.eq_lhs, Eigen::ComputeFullV);
    const double tol = 1e-12 * std::max(1.0, svd.singularValues().size() > 0
                                                 ? svd.singularValues()(0)
                                                 : 1.0);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i) {
      if (svd.singularValues()(i) > tol) ++rank;
    }
    r.Nbasis = svd.matrixV().rightCols(n - rank);
  }
  const int m = static_cast<int>(r.Nbasis.cols());
  r.cr = r.Nbasis.transpose() * p.objective;
  for (const auto& b : p.blocks) {
    Eigen::MatrixXd Cb = b.C;
    std::vector<Eigen::MatrixXd> Ab(m, Eigen::MatrixXd::Zero(b.dim, b.dim));
    for (const auto& [var, M] : b.terms) {
      Cb += r.x0(var) * M;
      for (int j = 0; j < m; ++j) {
        const double w = r.Nbasis(var, j);
        if (w != 0.0) Ab[j] += w * M;
      }
    }
    r.C.push_back(std::move(Cb));
    r.A.push_back(std::move(Ab));
  }
  return r;
}

}  // namespace

SdpProblem::SdpProblem(int vars)
    : n_vars(vars),
      objective(Eigen::VectorXd::Zero(vars)),
      eq_lhs(0, vars),
      eq_rhs(0) {}

SdpBlock& SdpProblem::add_block(int dim) {
  blocks.push_back(SdpBlock{dim, Eigen::MatrixXd::Zero(dim, dim), {}});
  return blocks.back();
}

void SdpProblem::add_term(SdpBlock& block, int var, const Eigen::MatrixXd& coeff) {
  if (var < 0 || var >= n_vars) throw std::invalid_argument("add_term: variable out of range");
  for (auto& [v, M] : block.terms) {
    if (v == var) {
      M += symmetrized(coeff);
      return;
    }
  }
  block.terms.emplace_back(var, symmetrized(coeff));
}

void SdpProblem::add_lower_bound(int var, double lb) {
  auto& b = add_block(1);
  b.C(0, 0) = -lb;
  add_term(b, var, Eigen::MatrixXd::Ones(1, 1));
}

void SdpProblem::add_linear_le(const Eigen::VectorXd& a, double bnd) {
  auto& b = add_block(1);
  b.C(0, 0) = bnd;
  for (int i = 0; i < n_vars; ++i) {
    if (a(i) != 0.0) add_term(b, i, -a(i) * Eigen::MatrixXd::Ones(1, 1));
  }
}

void SdpProblem::add_equality(const Eigen::VectorXd& a, double b) {
  eq_lhs.conservativeResize(eq_lhs.rows() + 1, Eigen::NoChange);
  eq_lhs.row(eq_lhs.rows() - 1) = a.transpose();
  eq_rhs.conservativeResize(eq_rhs.size() + 1);
  eq_rhs(eq_rhs.size() - 1) = b;
}

double min_eigenvalue(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols()) throw std::invalid_argument("min_eigenvalue: not square");
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("min_eigenvalue: not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

SdpSolution solve(const SdpProblem& problem, const SdpSettings& settings) {
  SdpSolution sol;
  const Reduced red = reduce(problem);
  if (!red.eq_consistent) {
    sol.status = SdpStatus::kInfeasible;
    return sol;
  }
  const int m = static_cast<int>(red.Nbasis.cols());
  const int nb = static_cast<int>(red.C.size());

  auto finalize = [&](const Eigen::VectorXd& v, const std::vector<Eigen::MatrixXd>& X,
                      double gap) {
    sol.x = red.x0 + red.Nbasis * v;
    sol.objective = problem.objective.dot(sol.x);
    sol.duality_gap = gap;
    double min_eig = std::numeric_limits<double>::infinity();
    for (const auto& b : problem.blocks) {
      Eigen::MatrixXd M = b.C;
      for (const auto& [var, coeff] : b.terms) M += sol.x(var) * coeff;
      if (b.dim == 1) {
        min_eig = std::min(min_eig, M(0, 0));
      } else {
        min_eig = std::min(min_eig, min_eigenvalue(M));
      }
    }
    if (nb == 0) min_eig = 0.0;
    sol.lmi_min_eig = min_eig;
    sol.eq_residual = problem.eq_lhs.rows() == 0
                          ? 0.0
                          : (problem.eq_lhs * sol.x - problem.eq_rhs).cwiseAbs().maxCoeff();
    sol.dual_blocks = X;
  };

  // no free variables left: feasibility of the fixed point decides everything
  if (m == 0) {
    finalize(Eigen::VectorXd::Zero(0), {}, 0.0);
    sol.status = (sol.lmi_min_eig >= -settings.feas_tol) ? SdpStatus::kOptimal
                                                         : SdpStatus::kInfeasible;
    sol.dual_objective = sol.objective;
    return sol;
  }

  // scale per block for the initial iterates
  double data_norm = 1.0;
  for (int b = 0; b < nb; ++b) {
    data_norm = std::max(data_norm, red.C[b].cwiseAbs().maxCoeff());
    for (const auto& A : red.A[b]) data_norm = std::max(data_norm, A.cwiseAbs().maxCoeff());
  }
  const double obj_norm = std::max(1.0, red.cr.cwiseAbs().maxCoeff());

  Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
  std::vector<Eigen::MatrixXd> X, Z;
  int total_dim = 0;
  for (int b = 0; b < nb; ++b) {
    const int d = static_cast<int>(red.C[b].rows());
    X.push_back(obj_norm * Eigen::MatrixXd::Identity(d, d));
    Z.push_back(data_norm * Eigen::MatrixXd::Identity(d, d));
    total_dim += d;
  }

  std::vector<Eigen::MatrixXd> D(nb), Zinv(nb), Rc(nb), dX(nb), dZ(nb), dXc(nb), dZc(nb);
  std::vector<Eigen::LLT<Eigen::MatrixXd>> cholZ(nb), cholX(nb);

  const double divergence_cap = 1e14 * (1.0 + data_norm + obj_norm);
  double best_gap = std::numeric_limits<double>::infinity();

  for (int it = 1; it <= settings.max_iter; ++it) {
    // residuals
    Eigen::VectorXd rp = red.cr;  // cr_j - <A_j, X>
    double mu_bar = 0.0;
    for (int b = 0; b < nb; ++b) {
      D[b] = red.C[b] - Z[b];
      for (int j = 0; j < m; ++j) {
        if (red.A[b][j].size() > 0) D[b] += v(j) * red.A[b][j];
      }
      for (int j = 0; j < m; ++j) rp(j) -= (red.A[b][j].cwiseProduct(X[b])).sum();
      mu_bar += (X[b].cwiseProduct(Z[b])).sum();
    }
    mu_bar /= total_dim;

    double primal_obj = 0.0;  // the max side: -<C, X>
    for (int b = 0; b < nb; ++b) primal_obj -= (red.C[b].cwiseProduct(X[b])).sum();
    const double dual_obj = red.cr.dot(v);
    const double gap = std::abs(dual_obj - primal_obj) /
                       (1.0 + std::abs(dual_obj) + std::abs(primal_obj));
    const double rp_norm = rp.cwiseAbs().maxCoeff() / (1.0 + obj_norm);
    double rd_norm = 0.0;
    for (int b = 0; b < nb; ++b) {
      rd_norm = std::max(rd_norm, D[b].cwiseAbs().maxCoeff());
    }
    rd_norm /= (1.0 + data_norm);

    sol.iterations = it;
    sol.dual_objective = primal_obj;
    if (settings.verbose) {
      std::fprintf(stderr, "sdp it %3d: obj % .12e gap %.3e rp %.3e rd %.3e mu %.3e\n", it,
                   dual_obj, gap, rp_norm, rd_norm, mu_bar);
    }
    if (rp_norm <= settings.feas_tol && rd_norm <= settings.feas_tol &&
        gap <= settings.gap_tol) {
      finalize(v, X, gap);
      sol.status = SdpStatus::kOptimal;
      // do not certify a point whose own LMI is meaningfully negative
      if (sol.lmi_min_eig < -1e2 * settings.feas_tol * (1.0 + data_norm)) {
        sol.status = SdpStatus::kMaxIter;
      }
      return sol;
    }
    best_gap = std::min(best_gap, gap);
    if (v.cwiseAbs().maxCoeff() > divergence_cap) {
      finalize(v, X, gap);
      sol.status = rd_norm <= 1e3 * settings.feas_tol ? SdpStatus::kUnbounded
                                                      : SdpStatus::kInfeasible;
      return sol;
    }

    // factorizations; clip to the PD cone when roundoff turns an iterate
    // indefinite near convergence
    auto factor_pd = [](Eigen::LLT<Eigen::MatrixXd>& chol, Eigen::MatrixXd& M) {
      chol.compute(M);
      if (chol.info() == Eigen::Success) return true;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
      const double top = std::max(es.eigenvalues().maxCoeff(), 1e-30);
      const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(1e-14 * top);
      M = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
      chol.compute(M);
      return chol.info() == Eigen::Success;
    };
    bool ok = true;
    for (int b = 0; b < nb; ++b) {
      if (!factor_pd(cholZ[b], Z[b]) || !factor_pd(cholX[b], X[b])) ok = false;
      if (ok) {
        const int d = static_cast<int>(Z[b].rows());
        Zinv[b] = cholZ[b].solve(Eigen::MatrixXd::Identity(d, d));
      }
    }
    if (!ok) {
      if (settings.verbose) std::fprintf(stderr, "sdp: iterate factorization failed\n");
      break;
    }

    // Schur complement M_jk = sum_b tr(A_j X A_k Zinv), symmetrized
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
    std::vector<std::vector<Eigen::MatrixXd>> XA(nb), AZinv(nb);
    for (int b = 0; b < nb; ++b) {
      XA[b].resize(m);
      AZinv[b].resize(m);
      for (int j = 0; j < m; ++j) {
        XA[b][j] = X[b] * red.A[b][j];
        AZinv[b][j] = red.A[b][j] * Zinv[b];
      }
      for (int j = 0; j < m; ++j) {
        // tr(A_j X A_k Zinv) = <X A_j, A_k Zinv> since (A_j X)' = X A_j
        for (int k = j; k < m; ++k) {
          const double t = (XA[b][j].cwiseProduct(AZinv[b][k])).sum();
          M(j, k) += t;
        }
      }
    }
    for (int j = 0; j < m; ++j) {
      for (int k = j + 1; k < m; ++k) M(k, j) = M(j, k);
    }

    if (!M.allFinite()) {
      if (settings.verbose) std::fprintf(stderr, "sdp: schur matrix not finite\n");
      break;
    }
    // roundoff can make the (theoretically PD) Schur matrix indefinite near
    // convergence; retry with growing diagonal regularization, which the
    // refinement step mostly cancels
    Eigen::LDLT<Eigen::MatrixXd> Mfact(M);
    double reg = 1e-14 * std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
    for (int attempt = 0; Mfact.info() != Eigen::Success && attempt < 12; ++attempt) {
      Mfact.compute(M + reg * Eigen::MatrixXd::Identity(m, m));
      reg *= 100.0;
    }
    if (Mfact.info() != Eigen::Success) {
      if (settings.verbose) std::fprintf(stderr, "sdp: schur factorization failed\n");
      break;
    }

    auto solve_direction = [&](const std::vector<Eigen::MatrixXd>& Rcb,
                               std::vector<Eigen::MatrixXd>& dXo,
                               std::vector<Eigen::MatrixXd>& dZo) {
      Eigen::VectorXd rhs = -rp;
      for (int b = 0; b < nb; ++b) {
        const Eigen::MatrixXd T = (Rcb[b] - X[b] * D[b]) * Zinv[b];
        for (int j = 0; j < m; ++j) rhs(j) += (red.A[b][j].cwiseProduct(T)).sum();
      }
      Eigen::VectorXd dv = Mfact.solve(rhs);
      // one step of iterative refinement on the Schur system
      dv += Mfact.solve(rhs - M * dv);
      for (int b = 0; b < nb; ++b) {
        dZo[b] = D[b];
        for (int j = 0; j < m; ++j) {
          if (red.A[b][j].size() > 0) dZo[b] += dv(j) * red.A[b][j];
        }
        dXo[b] = symmetrized((Rcb[b] - X[b] * dZo[b]) * Zinv[b]);
      }
      return dv;
    };

    // predictor
    for (int b = 0; b < nb; ++b) Rc[b] = -X[b] * Z[b];
    Eigen::VectorXd dv = solve_direction(Rc, dX, dZ);
    double ap = 1.0, ad = 1.0;
    for (int b = 0; b < nb; ++b) {
      ap = std::min(ap, max_psd_step(cholX[b], dX[b], 1.0));
      ad = std::min(ad, max_psd_step(cholZ[b], dZ[b], 1.0));
    }
    double mu_aff = 0.0;
    for (int b = 0; b < nb; ++b) {
      mu_aff += ((X[b] + 0.98 * ap * dX[b]).cwiseProduct(Z[b] + 0.98 * ad * dZ[b])).sum();
    }
    mu_aff = std::max(mu_aff / total_dim, 0.0);
    const double sigma = std::pow(std::min(1.0, mu_aff / mu_bar), 3.0);

    // corrector
    for (int b = 0; b < nb; ++b) {
      Rc[b] = sigma * mu_bar * Eigen::MatrixXd::Identity(X[b].rows(), X[b].cols()) -
              X[b] * Z[b] - dX[b] * dZ[b];
    }
    dv = solve_direction(Rc, dXc, dZc);
    ap = 1.0;
    ad = 1.0;
    for (int b = 0; b < nb; ++b) {
      ap = std::min(ap, max_psd_step(cholX[b], dXc[b], 1.0 / 0.98));
      ad = std::min(ad, max_psd_step(cholZ[b], dZc[b], 1.0 / 0.98));
    }
    ap = std::min(1.0, 0.98 * ap);
    ad = std::min(1.0, 0.98 * ad);

    v += ad * dv;
    for (int b = 0; b < nb; ++b) {
      X[b] = symmetrized(X[b] + ap * dXc[b]);
      Z[b] = symmetrized(Z[b] + ad * dZc[b]);
    }
  }

  finalize(v, X, best_gap);
  sol.status = SdpStatus::kMaxIter;
  return sol;
}

nlohmann::json sdp_problem_to_json(const SdpProblem& p) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : p.blocks) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [var, M] : b.terms) {
      std::vector<double> flat(M.data(), M.data() + M.size());
      terms.push_back({{"var", var}, {"matrix", flat}});
    }
    std::vector<double> cflat(b.C.data(), b.C.data() + b.C.size());
    blocks.push_back({{"dim", b.dim}, {"C", cflat}, {"terms", terms}});
  }
  std::vector<double> eflat(p.eq_lhs.data(), p.eq_lhs.data() + p.eq_lhs.size());
  return nlohmann::json{
      {"n_vars", p.n_vars},
      {"objective", std::vector<double>(p.objective.data(), p.objective.data() + p.n_vars)},
      {"blocks", blocks},
      {"eq_rows", p.eq_lhs.rows()},
      {"eq_lhs_colmajor", eflat},
      {"eq_rhs", std::vector<double>(p.eq_rhs.data(), p.eq_rhs.data() + p.eq_rhs.size())}};
}

SdpProblem sdp_problem_from_json(const nlohmann::json& j) {
  SdpProblem p(j.at("n_vars").get<int>());
  const auto obj = j.at("objective").get<std::vector<double>>();
  for (int i = 0; i < p.n_vars; ++i) p.objective(i) = obj[i];
  for (const auto& jb : j.at("blocks")) {
    const int d = jb.at("dim").get<int>();
    auto& b = p.add_block(d);
    const auto cflat = jb.at("C").get<std::vector<double>>();
    b.C = Eigen::Map<const Eigen::MatrixXd>(cflat.data(), d, d);
    for (const auto& jt : jb.at("terms")) {
      const auto mflat = jt.at("matrix").get<std::vector<double>>();
      p.add_term(b, jt.at("var").get<int>(), Eigen::Map<const Eigen::MatrixXd>(mflat.data(), d, d));
    }
  }
  const int rows = j.at("eq_rows").get<int>();
  if (rows > 0) {
    const auto eflat = j.at("eq_lhs_colmajor").get<std::vector<double>>();
    const auto erhs = j.at("eq_rhs").get<std::vector<double>>();
    p.eq_lhs = Eigen::Map<const Eigen::MatrixXd>(eflat.data(), rows, p.n_vars);
    p.eq_rhs = Eigen::Map<const Eigen::VectorXd>(erhs.data(), rows);
  }
  return p;
}

}  // namespace itm
