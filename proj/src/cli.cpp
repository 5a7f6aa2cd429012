#include "itm/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "itm/certificates.hpp"
#include "itm/design.hpp"
#include "itm/methods.hpp"
#include "itm/oracles.hpp"
#include "itm/pep.hpp"
#include "itm/schedules.hpp"

namespace itm {

namespace {

using nlohmann::json;

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << "\n";
  } else {
    std::ofstream f(out_path);
    if (!f) throw std::runtime_error("cannot open output file: " + out_path);
    f << text;
  }
}

int fail_with(const std::string& kind, const std::string& message) {
  std::cout << json{{"error", kind}, {"message", message}}.dump() << "\n";
  return 1;
}

std::string format_h_table(const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) os << (i ? "  " : "") << std::setw(8) << row[i];
    os << "\n";
  }
  return os.str();
}

FirstOrderOracle make_oracle(const std::string& spec, const ClassParams& params, int dim) {
  if (spec == "fmu" || spec == "fL") {
    const double curvature = spec == "fmu" ? params.mu : params.L;
    Eigen::MatrixXd H = curvature * Eigen::MatrixXd::Identity(dim, dim);
    return quadratic_oracle(H, Eigen::VectorXd::Zero(dim), 0.0, params);
  }
  std::ifstream f(spec);
  if (!f) throw std::runtime_error("cannot open oracle file: " + spec);
  json j;
  f >> j;
  return quadratic_oracle_from_json(j, params);
}

Criterion parse_criterion(const std::string& crit, double cw, double cf) {
  if (crit == "dist") return Criterion::distance();
  if (crit == "func") return Criterion::function_value(cw, cf);
  throw CLI::ValidationError("--crit must be dist or func");
}

json design_entry(const DesignResult& r, double cw, double cf) {
  return json{{"cw", cw}, {"cf", cf}, {"N", r.method_h.N}, {"tau", r.tau},
              {"h", r.method_h.rows}};
}

int cmd_schedule(double mu, double L, int N, const std::string& format,
                 const std::string& out) {
  ClassParams params(mu, L);
  const Schedule s = build_schedule(params, N);
  std::optional<LowerBoundSequence> lb;
  if (params.q > 0.0) lb = lower_bound_sequence(params.q, N);
  if (format == "csv") {
    std::ostringstream os;
    os.precision(17);
    os << "k,A,beta,delta" << (lb ? ",lambda" : "") << "\n";
    for (int k = 0; k <= N; ++k) {
      os << k << "," << s.A[k] << ",";
      if (k < N) os << s.beta[k];
      os << ",";
      if (k < N) os << s.delta[k];
      if (lb) os << "," << lb->lambda[k];
      os << "\n";
    }
    write_output(os.str(), out);
  } else {
    json j = schedule_to_json(s);
    if (lb) j["lambda"] = lb->lambda;
    write_output(j.dump(2), out);
  }
  return 0;
}

int cmd_run(double mu, double L, int N, const std::string& oracle_spec, int dim,
            const std::string& method_path, const std::string& format, const std::string& out) {
  ClassParams params(mu, L);
  FirstOrderOracle oracle = make_oracle(oracle_spec, params, dim);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Ones(oracle.dim());
  Trace trace;
  Schedule schedule = build_schedule(params, N);
  if (method_path.empty()) {
    trace = run_item(oracle, x0, schedule);
  } else {
    std::ifstream f(method_path);
    if (!f) throw std::runtime_error("cannot open method file: " + method_path);
    json j;
    f >> j;
    FixedStepMethod m = method_from_json(j);
    if (m.form == CoeffForm::kAlpha) m = h_from_alpha(m);
    trace = run_fixed_step(m, oracle, x0);
  }
  if (format == "json") {
    json j;
    j["evals"] = json::array();
    for (const auto& p : trace.evals) {
      j["evals"].push_back({{"f", p.fval},
                            {"x", std::vector<double>(p.x.data(), p.x.data() + p.x.size())}});
    }
    j["output"] =
        std::vector<double>(trace.output.data(), trace.output.data() + trace.output.size());
    write_output(j.dump(2), out);
  } else {
    write_output(trace_to_csv(trace, oracle, method_path.empty() ? &schedule : nullptr), out);
  }
  return 0;
}

int cmd_certify(double mu, double L, int N, const std::string& oracle_spec, int dim,
                const std::string& out) {
  ClassParams params(mu, L);
  FirstOrderOracle oracle = make_oracle(oracle_spec, params, dim);
  const Schedule schedule = build_schedule(params, N);
  const Trace trace = run_item(oracle, Eigen::VectorXd::Ones(oracle.dim()), schedule);
  const PotentialReport report = potential_decrease_check(trace, schedule, oracle);
  json steps = json::array();
  for (const auto& st : report.states) {
    steps.push_back({{"k", st.k},
                     {"A", st.A_k},
                     {"psi_prev", st.psi_prev},
                     {"dist_sq", st.dist_sq},
                     {"phi", st.phi}});
  }
  json j{{"nonincreasing", report.nonincreasing},
         {"first_violation", report.first_violation},
         {"worst_margin", report.worst_margin},
         {"steps", steps}};
  write_output(j.dump(2), out);
  return report.nonincreasing ? 0 : 1;
}

int cmd_worst_case(const std::string& method_path, const std::string& crit, double cw, double cf,
                   const std::string& mode, const std::string& out, bool dump_sdp) {
  std::ifstream f(method_path);
  if (!f) throw std::runtime_error("cannot open method file: " + method_path);
  json jm;
  f >> jm;
  const FixedStepMethod method = method_from_json(jm);
  const Criterion criterion = parse_criterion(crit, cw, cf);
  const PepMode pep_mode = mode == "full" ? PepMode::kFull : PepMode::kRelaxed;
  if (dump_sdp) {
    const SdpProblem p = pep_mode == PepMode::kFull ? build_full_pep(method, criterion)
                                                    : build_dual_relaxed(method, criterion);
    std::cout << sdp_problem_to_json(p).dump() << "\n";
  }
  const WorstCaseResult r = worst_case_bound(method, criterion, pep_mode);
  json j{{"value", r.value},
         {"mode", mode},
         {"status", r.status == SdpStatus::kOptimal ? "optimal" : "not_optimal"}};
  if (r.certificate) j["certificate"] = certificate_to_json(*r.certificate);
  write_output(j.dump(2), out);
  return r.status == SdpStatus::kOptimal ? 0 : 1;
}

int cmd_design(double mu, double L, int N, const std::string& crit, double cw, double cf,
               const std::string& out, const std::string& cert_out) {
  ClassParams params(mu, L);
  const Criterion criterion = parse_criterion(crit, cw, cf);
  const DesignResult r = criterion.kind == CriterionKind::kDistOverDist
                             ? design_distance(params, N)
                             : design_function_value(params, N, cw, cf);
  std::cout << "worst-case bound: " << std::setprecision(10) << r.tau << "\n";
  std::cout << format_h_table(r.method_h.rows);
  if (!out.empty()) {
    std::ofstream mf(out);
    mf << method_to_json(r.method_h).dump(2);
  }
  if (!cert_out.empty()) {
    std::ofstream cf_file(cert_out);
    cf_file << certificate_to_json(r.certificate).dump(2);
  }
  return 0;
}

int cmd_tables(double mu, double L, int n_max, const std::string& golden_path, double tol,
               bool write_golden) {
  ClassParams params(mu, L);
  json entries = json::array();
  for (const auto& [cw, cf] : {std::pair<double, double>{1.0, 0.0}, {0.0, 1.0}}) {
    for (int N = 1; N <= n_max; ++N) {
      const DesignResult r = design_function_value(params, N, cw, cf);
      entries.push_back(design_entry(r, cw, cf));
      std::cout << "criterion (cw=" << cw << ", cf=" << cf << "), N=" << N
                << ": bound " << std::setprecision(10) << r.tau << "\n"
                << format_h_table(r.method_h.rows);
    }
  }
  json block{{"mu", mu}, {"L", L}, {"entries", entries}};
  if (write_golden) {
    std::ofstream f(golden_path);
    if (!f) throw std::runtime_error("cannot open golden file for writing: " + golden_path);
    f << block.dump(2);
    std::cout << "golden file written: " << golden_path << "\n";
    return 0;
  }
  std::ifstream f(golden_path);
  if (!f) throw std::runtime_error("cannot open golden file: " + golden_path);
  json golden;
  f >> golden;
  double worst = 0.0;
  const auto& gold_entries = golden.at("entries");
  if (gold_entries.size() != entries.size()) {
    return fail_with("tables_mismatch", "golden file has a different number of entries");
  }
  for (size_t i = 0; i < entries.size(); ++i) {
    worst = std::max(worst, std::abs(entries[i].at("tau").get<double>() -
                                     gold_entries[i].at("tau").get<double>()));
    const auto h = entries[i].at("h").get<std::vector<std::vector<double>>>();
    const auto hg = gold_entries[i].at("h").get<std::vector<std::vector<double>>>();
    for (size_t r = 0; r < h.size(); ++r) {
      for (size_t c = 0; c < h[r].size(); ++c) {
        worst = std::max(worst, std::abs(h[r][c] - hg[r][c]));
      }
    }
  }
  std::cout << "max deviation from golden: " << worst << " (tolerance " << tol << ")\n";
  if (worst > tol) return fail_with("tables_mismatch", "regenerated tables deviate from golden");
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"optimal first-order methods: schedules, runs, certification, design"};
  app.require_subcommand(1);

  double mu = 0.1, L = 1.0, cw = 1.0, cf = 0.0, tol = 5e-4;
  int N = 1, dim = 1, n_max = 5;
  std::string out, format = "json", oracle_spec = "fmu", method_path, crit = "dist";
  std::string mode = "relaxed", cert_out, golden_path = "data/appendix_e_golden.json";
  bool dump_sdp = false, write_golden = false;

  auto add_class_flags = [&](CLI::App* cmd, bool with_n = true) {
    cmd->add_option("--mu", mu, "strong convexity modulus")->capture_default_str();
    cmd->add_option("--L", L, "smoothness modulus")->capture_default_str();
    if (with_n) cmd->add_option("--N", N, "horizon")->check(CLI::PositiveNumber);
    cmd->add_option("--out", out, "output file (default stdout)");
    cmd->add_option("--format", format, "json|csv")
        ->check(CLI::IsMember({"json", "csv"}));
  };

  auto* sched = app.add_subcommand("schedule", "print A_k, beta_k, delta_k (and lambda_k)");
  add_class_flags(sched);

  auto* run = app.add_subcommand("run", "run ITEM or a method file on an oracle");
  add_class_flags(run);
  run->add_option("--oracle", oracle_spec, "fmu | fL | quadratic json path")
      ->capture_default_str();
  run->add_option("--dim", dim, "dimension for fmu/fL oracles")->capture_default_str();
  run->add_option("--method", method_path, "method json; omit to run ITEM");

  auto* certify = app.add_subcommand("certify", "per-step potential report for an ITEM run");
  add_class_flags(certify);
  certify->add_option("--oracle", oracle_spec, "fmu | fL | quadratic json path")
      ->capture_default_str();
  certify->add_option("--dim", dim, "dimension for fmu/fL oracles")->capture_default_str();

  auto* wc = app.add_subcommand("worst-case", "PEP bound for a method file");
  wc->add_option("--method", method_path, "method json path")->required();
  wc->add_option("--crit", crit, "dist|func")->check(CLI::IsMember({"dist", "func"}));
  wc->add_option("--cw", cw, "denominator weight of |w0-w*|^2");
  wc->add_option("--cf", cf, "denominator weight of f(w0)-f*");
  wc->add_option("--mode", mode, "full|relaxed")->check(CLI::IsMember({"full", "relaxed"}));
  wc->add_option("--out", out, "output file (default stdout)");
  wc->add_flag("--dump-sdp", dump_sdp, "also print the SDP debug format");

  auto* design = app.add_subcommand("design", "synthesize an optimized method");
  add_class_flags(design);
  design->add_option("--crit", crit, "dist|func")->check(CLI::IsMember({"dist", "func"}));
  design->add_option("--cw", cw, "denominator weight of |w0-w*|^2");
  design->add_option("--cf", cf, "denominator weight of f(w0)-f*");
  design->add_option("--cert-out", cert_out, "sidecar certificate json path");

  auto* tables = app.add_subcommand("tables", "regenerate the optimized-step tables and diff");
  tables->add_option("--mu", mu, "strong convexity modulus")->capture_default_str();
  tables->add_option("--L", L, "smoothness modulus")->capture_default_str();
  tables->add_option("--n-max", n_max, "largest horizon")->capture_default_str();
  tables->add_option("--golden", golden_path, "golden file path")->capture_default_str();
  tables->add_option("--tol", tol, "entrywise tolerance")->capture_default_str();
  tables->add_flag("--write-golden", write_golden, "write the golden file instead of diffing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0) {
      std::cout << json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
    }
    return app.exit(e);
  }

  try {
    if (sched->parsed()) return cmd_schedule(mu, L, N, format, out);
    if (run->parsed()) return cmd_run(mu, L, N, oracle_spec, dim, method_path, format, out);
    if (certify->parsed()) return cmd_certify(mu, L, N, oracle_spec, dim, out);
    if (wc->parsed()) return cmd_worst_case(method_path, crit, cw, cf, mode, out, dump_sdp);
    if (design->parsed()) return cmd_design(mu, L, N, crit, cw, cf, out, cert_out);
    if (tables->parsed()) return cmd_tables(mu, L, n_max, golden_path, tol, write_golden);
  } catch (const std::exception& e) {
    return fail_with("runtime", e.what());
  }
  return fail_with("usage", "no subcommand");
}

}  // namespace itm
