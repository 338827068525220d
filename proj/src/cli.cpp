#include "pcsplit/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pcsplit/log.hpp"
#include "pcsplit/problem_io.hpp"

namespace pcsplit {

namespace {

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string csv_safe(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

const char* kSummaryHeader =
    "scheme,status,iterations,primal_res,dual_res,comp_res,total_progress_G,reason";

std::string summary_row(const RunConfig& cfg, const SolveResult& res) {
  std::ostringstream os;
  os << scheme_name(cfg.scheme) << ',' << (res.converged ? "converged" : "maxiter") << ','
     << res.iterations << ',' << fmt_double(res.residuals.primal) << ','
     << fmt_double(res.residuals.dual) << ',' << fmt_double(res.residuals.comp) << ','
     << fmt_double(res.total_progress_G) << ',';
  return os.str();
}

std::string rejected_row(const RunConfig& cfg, const std::string& reason) {
  std::ostringstream os;
  os << scheme_name(cfg.scheme) << ",rejected,,,,,," << csv_safe(reason);
  return os.str();
}

std::vector<std::string> certificate_failures(const ConvergenceCertificate& cert) {
  std::vector<std::string> reasons;
  if (cert.hm_residual > kResidualRelTol) reasons.push_back("HM = Q residual too large");
  if (!cert.h_cert.is_spd) reasons.push_back("H not SPD");
  if (!cert.g_cert.is_spd) reasons.push_back("G not SPD");
  if (!cert.qtq_cert.is_spd) reasons.push_back("Q^T+Q not SPD");
  return reasons;
}

}  // namespace

int cmd_solve(const std::string& problem_file, RunConfig cfg) {
  try {
    const ProblemInstance p = load_problem(problem_file);
    std::filesystem::create_directories(cfg.out_dir);

    std::ofstream trace_out;
    TraceSink sink;
    if (cfg.monitor) {
      const std::string trace_path =
          (std::filesystem::path(cfg.out_dir) / "trace.csv").string();
      trace_out.open(trace_path);
      if (!trace_out) throw Error("cannot write " + trace_path);
      trace_out << "k,primal_res,dual_res,pred_norm,dist_sq_H,progress_sq_G,slack\n";
      trace_out.flush();
      sink = [&trace_out](const TraceRow& row) {
        trace_out << row.k << ',' << fmt_double(row.primal_res) << ','
                  << fmt_double(row.dual_res) << ',' << fmt_double(row.pred_norm) << ','
                  << fmt_double(row.dist_sq_H) << ',' << fmt_double(row.progress_sq_G) << ','
                  << fmt_double(row.slack) << '\n';
        trace_out.flush();
      };
    }

    const SolveResult res = run_solve(p, cfg, sink);

    const std::string sol_path =
        (std::filesystem::path(cfg.out_dir) / "solution.json").string();
    write_solution_json(sol_path, p, cfg, res);
    log::info("solution written to " + sol_path);

    std::cout << kSummaryHeader << "\n" << summary_row(cfg, res) << "\n";
    return res.converged ? 0 : 2;
  } catch (const Error& e) {
    log::error(e.what());
    return 1;
  }
}

int cmd_certify(const std::string& problem_file, RunConfig cfg) {
  try {
    const ProblemInstance p = load_problem(problem_file);
    check_config(cfg, /*certify_probe=*/true);
    const ValidationReport report = validate_problem(p, requirements_for(cfg.scheme));
    for (const std::string& w : report.warnings) log::info(w);
    if (!report.ok) {
      std::ostringstream os;
      os << "problem rejected for " << scheme_name(cfg.scheme) << ":";
      for (const std::string& e : report.errors) os << "\n  " << e;
      throw Error(os.str());
    }

    const CorrectionPlan plan = runtime_plan(p, cfg, PlanMode::Permissive);
    const ConvergenceCertificate& cert = plan.certificate;

    auto dims = [](const Matrix& A) {
      return std::to_string(A.rows()) + "x" + std::to_string(A.cols());
    };
    std::cout << "scheme: " << scheme_name(cfg.scheme) << "\n"
              << "Q: " << dims(plan.Q) << "  D: " << dims(plan.D) << "  G: " << dims(plan.G)
              << "  M: " << dims(plan.M) << "  H: " << dims(plan.H) << "\n"
              << "hm_residual: " << fmt_double(cert.hm_residual) << "\n"
              << "H min_eig: " << fmt_double(cert.h_cert.min_eig) << "\n"
              << "G min_eig: " << fmt_double(cert.g_cert.min_eig) << "\n"
              << "Q^T+Q min_eig: " << fmt_double(cert.qtq_cert.min_eig) << "\n";
    if (cert.ok) {
      std::cout << "certificate: ok\n";
      return 0;
    }
    std::cout << "certificate: FAILED (";
    const std::vector<std::string> reasons = certificate_failures(cert);
    for (size_t i = 0; i < reasons.size(); ++i) {
      if (i) std::cout << "; ";
      std::cout << reasons[i];
    }
    std::cout << ")\n";
    return 1;
  } catch (const Error& e) {
    log::error(e.what());
    return 1;
  }
}

int cmd_compare(const std::string& problem_file, const std::vector<RunConfig>& configs) {
  try {
    const ProblemInstance p = load_problem(problem_file);
    std::cout << kSummaryHeader << "\n";
    for (const RunConfig& cfg : configs) {
      try {
        const SolveResult res = run_solve(p, cfg);
        std::cout << summary_row(cfg, res) << "\n";
      } catch (const Error& e) {
        std::cout << rejected_row(cfg, e.what()) << "\n";
      }
    }
    return 0;
  } catch (const Error& e) {
    log::error(e.what());
    return 1;
  }
}

namespace {

struct CliOptions {
  std::string file;
  std::string scheme;
  RunConfig cfg;
};

void add_common_options(CLI::App* sub, CliOptions* opt) {
  sub->add_option("problem", opt->file, "problem JSON file")->required();
  sub->add_option("--scheme", opt->scheme,
                  "scprsm | gs3-alg1 | gs3-alg2 | gs3-alg3 | multi-pd | multi-dp | "
                  "custom-split (default: inferred from the problem)");
  sub->add_option("--beta", opt->cfg.beta, "penalty parameter (> 0)");
  sub->add_option("--mu", opt->cfg.mu, "two-block damping, in (0,1)");
  sub->add_option("--nu", opt->cfg.nu, "preset split weight, in (0,1)");
  sub->add_option("--alpha", opt->cfg.alpha, "custom blend weight, in (0,1]");
  sub->add_option("--tol", opt->cfg.tol, "stopping tolerance");
  sub->add_option("--max-iters", opt->cfg.max_iters, "iteration cap");
  sub->add_option("--seed", opt->cfg.seed, "recorded in outputs");
  sub->add_flag("--monitor", opt->cfg.monitor, "track the contraction inequality and write trace.csv");
  sub->add_flag("--force", opt->cfg.force, "run even when the plan fails certification");
  sub->add_option("--out", opt->cfg.out_dir, "output directory");
}

bool resolve_scheme(const std::string& name, const std::string& file, RunConfig* cfg) {
  if (name.empty()) {
    const ProblemInstance p = load_problem(file);
    cfg->scheme = infer_scheme(p);
    log::info("scheme not given; using " + scheme_name(cfg->scheme));
    return true;
  }
  const std::optional<Scheme> s = scheme_from_name(name);
  if (!s) {
    log::error("unknown scheme: " + name);
    return false;
  }
  cfg->scheme = *s;
  return true;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Default scheme list for compare: everything whose shape requirements the
// instance can meet, including ones validation will reject with a reason.
std::vector<Scheme> default_compare_schemes(const ProblemInstance& p) {
  std::vector<Scheme> out;
  if (p.block_count() == 2 && p.sense == ConstraintSense::Equality) out.push_back(Scheme::ScPrsm);
  if (p.block_count() == 3 && p.sense == ConstraintSense::Equality) {
    out.push_back(Scheme::Gs3Alg1);
    out.push_back(Scheme::Gs3Alg2);
    out.push_back(Scheme::Gs3Alg3);
  }
  out.push_back(Scheme::MultiPD);
  out.push_back(Scheme::MultiDP);
  return out;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"prediction-correction splitting solver"};
  app.require_subcommand(1);

  CliOptions solve_opt, certify_opt, compare_opt, trace_opt;
  CLI::App* solve = app.add_subcommand("solve", "run a scheme to convergence");
  add_common_options(solve, &solve_opt);
  CLI::App* certify = app.add_subcommand("certify", "build and check the correction plan");
  add_common_options(certify, &certify_opt);
  CLI::App* compare = app.add_subcommand("compare", "run several schemes, print a CSV table");
  add_common_options(compare, &compare_opt);
  CLI::App* trace = app.add_subcommand("trace", "solve with monitoring forced on");
  add_common_options(trace, &trace_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (solve->parsed() || trace->parsed()) {
      CliOptions& opt = solve->parsed() ? solve_opt : trace_opt;
      if (trace->parsed()) opt.cfg.monitor = true;
      if (!resolve_scheme(opt.scheme, opt.file, &opt.cfg)) return 1;
      return cmd_solve(opt.file, opt.cfg);
    }
    if (certify->parsed()) {
      if (!resolve_scheme(certify_opt.scheme, certify_opt.file, &certify_opt.cfg)) return 1;
      return cmd_certify(certify_opt.file, certify_opt.cfg);
    }
    // compare: --scheme may carry a comma-separated list.
    std::vector<RunConfig> configs;
    if (compare_opt.scheme.empty()) {
      const ProblemInstance p = load_problem(compare_opt.file);
      for (Scheme s : default_compare_schemes(p)) {
        RunConfig cfg = compare_opt.cfg;
        cfg.scheme = s;
        configs.push_back(cfg);
      }
    } else {
      for (const std::string& name : split_list(compare_opt.scheme)) {
        const std::optional<Scheme> s = scheme_from_name(name);
        if (!s) {
          log::error("unknown scheme: " + name);
          return 1;
        }
        RunConfig cfg = compare_opt.cfg;
        cfg.scheme = *s;
        configs.push_back(cfg);
      }
    }
    return cmd_compare(compare_opt.file, configs);
  } catch (const Error& e) {
    log::error(e.what());
    return 1;
  }
}

}  // namespace pcsplit
