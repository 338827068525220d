#pragma once

#include <functional>
#include <string>

#include "pcsplit/certifier.hpp"
#include "pcsplit/correction.hpp"
#include "pcsplit/predictors.hpp"

namespace pcsplit {

struct RunConfig {
  Scheme scheme = Scheme::MultiPD;
  double beta = 1.0;
  double mu = 0.5;     // two-block damping
  double nu = 0.9;     // preset split weight
  double alpha = 0.5;  // custom blend weight
  double tol = 1e-8;
  long max_iters = 5000;
  long seed = 0;  // recorded in outputs; every run is deterministic
  bool monitor = false;
  bool force = false;
  std::string out_dir = ".";
};

// Parameter-range checks.  Certification probes may sit on the closed
// boundary (mu = 1, alpha = 1) so that rejected configurations still
// reach the certifier and report why they fail.
void check_config(const RunConfig& cfg, bool certify_probe);

// Pick a scheme from the instance shape when the user gives none.
Scheme infer_scheme(const ProblemInstance& p);

// Sweep order of the generic correction run: the custom split follows
// the constraint sense, the dedicated schemes their own order.
SweepOrder sweep_order_for(const ProblemInstance& p, const RunConfig& cfg);

// The plan the solve loop actually applies, in runtime coordinates:
// (y, lambda) for the two-block scheme, stacked images for the
// three-block scheme, scaled coordinates for the multi-block sweeps.
CorrectionPlan runtime_plan(const ProblemInstance& p, const RunConfig& cfg, PlanMode mode);

// Runtime coordinates of an iterate, matching runtime_plan.
Vector state_coords(const IterateState& st, const ProblemInstance& p, Scheme scheme, double beta);
// Runtime coordinates of an arbitrary stacked point (x_blocks, lambda).
Vector point_coords(const ProblemInstance& p, Scheme scheme, double beta,
                    const std::vector<Vector>& x_blocks, const Vector& lambda);

struct TraceRow {
  long k = 0;
  double primal_res = 0.0;
  double dual_res = 0.0;
  double pred_norm = 0.0;
  double dist_sq_H = 0.0;
  double progress_sq_G = 0.0;
  double slack = 0.0;
};

struct SolveResult {
  bool converged = false;
  long iterations = 0;
  std::vector<Vector> x_blocks;
  Vector lambda;
  KktResidual residuals;
  double final_pred_norm = 0.0;
  double total_progress_G = 0.0;
  std::vector<TraceRow> trace;              // monitor runs only
  std::vector<ContractionRecord> records;   // monitor runs only
};

// Called once per iteration on monitor runs, before the next prediction,
// so a trace file stays parseable even if the run is cut short.
using TraceSink = std::function<void(const TraceRow&)>;

// Full predict-correct loop.  Stops when both the prediction step norm
// (infinity norm) and the primal residual fall strictly below tol, or at
// max_iters; tol = 0 therefore never stops early, which is the intended
// setting for pure monitoring runs.  Throws Error on validation failures
// and on uncertified plans unless cfg.force is set.
SolveResult run_solve(const ProblemInstance& p, const RunConfig& cfg,
                      const TraceSink& sink = nullptr);

}  // namespace pcsplit
