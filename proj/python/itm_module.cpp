#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "itm/certificates.hpp"
#include "itm/design.hpp"
#include "itm/methods.hpp"
#include "itm/oracles.hpp"
#include "itm/pep.hpp"
#include "itm/schedules.hpp"

namespace py = pybind11;
using namespace itm;

namespace {

using Rows = std::vector<std::vector<double>>;

FixedStepMethod make_method(const Rows& rows, double mu, double L, const std::string& form) {
  return FixedStepMethod(ClassParams(mu, L),
                         form == "h" ? CoeffForm::kH : CoeffForm::kAlpha, rows);
}

Criterion make_criterion(const std::string& crit, double cw, double cf) {
  return crit == "dist" ? Criterion::distance() : Criterion::function_value(cw, cf);
}

py::dict certificate_dict(const DualCertificate& c) {
  py::dict d;
  d["tau"] = c.tau;
  d["lambda_star"] = c.lambda_star;
  d["lambda_chain"] = c.lambda_chain;
  if (c.criterion == CriterionKind::kDistOverDist) d["lambda_last"] = c.lambda_last;
  d["criterion"] = c.criterion == CriterionKind::kDistOverDist ? "dist" : "func";
  return d;
}

py::dict trace_dict(const Trace& t) {
  py::dict d;
  py::list evals;
  for (const auto& p : t.evals) {
    py::dict e;
    e["x"] = p.x;
    e["grad"] = p.grad;
    e["f"] = p.fval;
    evals.append(e);
  }
  d["evals"] = evals;
  d["output"] = t.output;
  d["x_seq"] = t.x_seq;
  d["y_seq"] = t.y_seq;
  d["z_seq"] = t.z_seq;
  return d;
}

}  // namespace

PYBIND11_MODULE(_itm, m) {
  m.doc() = "optimal gradient methods: schedules, runs, certification, PEP bounds, design";

  py::class_<Schedule>(m, "Schedule")
      .def_readonly("N", &Schedule::N)
      .def_readonly("A", &Schedule::A)
      .def_readonly("log_A", &Schedule::log_A)
      .def_readonly("beta", &Schedule::beta)
      .def_readonly("delta", &Schedule::delta)
      .def_property_readonly("mu", [](const Schedule& s) { return s.params.mu; })
      .def_property_readonly("L", [](const Schedule& s) { return s.params.L; });

  m.def(
      "build_schedule",
      [](double mu, double L, int N) { return build_schedule(ClassParams(mu, L), N); },
      py::arg("mu"), py::arg("L"), py::arg("N"));

  m.def(
      "lower_bound_sequence",
      [](double q, int N) { return lower_bound_sequence(q, N).lambda; }, py::arg("q"),
      py::arg("N"));

  m.def("ogm_theta_sequence", &ogm_theta_sequence, py::arg("N"));

  m.def(
      "tmm_limit_params",
      [](double q) {
        const TmmLimits lim = tmm_limit_params(q);
        return py::make_tuple(lim.beta_inf, lim.delta_inf, lim.rate);
      },
      py::arg("q"));

  py::class_<FirstOrderOracle>(m, "QuadraticOracle")
      .def(py::init([](const Eigen::MatrixXd& H, const Eigen::VectorXd& x_star, double f_star,
                       double mu, double L) {
             return quadratic_oracle(H, x_star, f_star, ClassParams(mu, L));
           }),
           py::arg("H"), py::arg("x_star"), py::arg("f_star"), py::arg("mu"), py::arg("L"))
      .def("__call__",
           [](const FirstOrderOracle& o, const Eigen::VectorXd& x) { return o(x); })
      .def_property_readonly("dim", &FirstOrderOracle::dim);

  m.def(
      "run_item",
      [](const FirstOrderOracle& oracle, const Eigen::VectorXd& x0, int N) {
        return trace_dict(run_item(oracle, x0, build_schedule(oracle.params(), N)));
      },
      py::arg("oracle"), py::arg("x0"), py::arg("N"));

  m.def(
      "run_fixed_step",
      [](const Rows& h, double mu, double L, const FirstOrderOracle& oracle,
         const Eigen::VectorXd& x0) {
        return trace_dict(run_fixed_step(make_method(h, mu, L, "h"), oracle, x0));
      },
      py::arg("h"), py::arg("mu"), py::arg("L"), py::arg("oracle"), py::arg("x0"));

  m.def(
      "item_h",
      [](double mu, double L, int N) {
        return extract_h(item_runner(N), N, ClassParams(mu, L)).rows;
      },
      py::arg("mu"), py::arg("L"), py::arg("N"),
      "h-form coefficients of the exact method, read off a synthetic run");

  m.def(
      "alpha_from_h",
      [](const Rows& rows, double mu, double L) {
        return alpha_from_h(make_method(rows, mu, L, "h")).rows;
      },
      py::arg("rows"), py::arg("mu"), py::arg("L"));

  m.def(
      "h_from_alpha",
      [](const Rows& rows, double mu, double L) {
        return h_from_alpha(make_method(rows, mu, L, "alpha")).rows;
      },
      py::arg("rows"), py::arg("mu"), py::arg("L"));

  m.def(
      "potential_check",
      [](const FirstOrderOracle& oracle, const Eigen::VectorXd& x0, int N) {
        const Schedule s = build_schedule(oracle.params(), N);
        const PotentialReport rep = potential_decrease_check(run_item(oracle, x0, s), s, oracle);
        py::dict d;
        d["nonincreasing"] = rep.nonincreasing;
        d["worst_margin"] = rep.worst_margin;
        py::list phis;
        for (const auto& st : rep.states) phis.append(st.phi);
        d["phi"] = phis;
        return d;
      },
      py::arg("oracle"), py::arg("x0"), py::arg("N"));

  m.def(
      "item_dual_certificate",
      [](double mu, double L, int N) {
        return certificate_dict(item_dual_certificate(ClassParams(mu, L), N));
      },
      py::arg("mu"), py::arg("L"), py::arg("N"));

  m.def(
      "verify_item_certificate",
      [](double mu, double L, int N) {
        const ClassParams params(mu, L);
        const FixedStepMethod alpha = alpha_from_h(extract_h(item_runner(N), N, params));
        const CertificateReport rep =
            verify_dual_certificate(item_dual_certificate(params, N), alpha);
        py::dict d;
        d["feasible"] = rep.feasible;
        d["k_residual"] = rep.k_residual;
        d["lmi_min_eig"] = rep.lmi_min_eig;
        d["certified_value"] = rep.certified_value;
        return d;
      },
      py::arg("mu"), py::arg("L"), py::arg("N"));

  m.def(
      "worst_case_bound",
      [](const Rows& rows, double mu, double L, const std::string& form,
         const std::string& crit, double cw, double cf, const std::string& mode) {
        const WorstCaseResult r =
            worst_case_bound(make_method(rows, mu, L, form), make_criterion(crit, cw, cf),
                             mode == "full" ? PepMode::kFull : PepMode::kRelaxed);
        py::dict d;
        d["value"] = r.value;
        d["optimal"] = r.status == SdpStatus::kOptimal;
        if (r.certificate) d["certificate"] = certificate_dict(*r.certificate);
        return d;
      },
      py::arg("rows"), py::arg("mu"), py::arg("L"), py::arg("form") = "h",
      py::arg("crit") = "dist", py::arg("cw") = 1.0, py::arg("cf") = 0.0,
      py::arg("mode") = "relaxed");

  auto design_dict = [](const DesignResult& r) {
    py::dict d;
    d["tau"] = r.tau;
    d["h"] = r.method_h.rows;
    d["alpha"] = r.method_alpha.rows;
    d["certificate"] = certificate_dict(r.certificate);
    return d;
  };

  m.def(
      "design_distance",
      [design_dict](double mu, double L, int N) {
        return design_dict(design_distance(ClassParams(mu, L), N));
      },
      py::arg("mu"), py::arg("L"), py::arg("N"));

  m.def(
      "design_function_value",
      [design_dict](double mu, double L, int N, double cw, double cf) {
        return design_dict(design_function_value(ClassParams(mu, L), N, cw, cf));
      },
      py::arg("mu"), py::arg("L"), py::arg("N"), py::arg("cw"), py::arg("cf"));
}
