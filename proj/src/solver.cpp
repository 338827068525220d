#include "pcsplit/solver.hpp"

#include <cmath>
#include <sstream>

#include "pcsplit/log.hpp"

namespace pcsplit {

void check_config(const RunConfig& cfg, bool certify_probe) {
  if (!(cfg.beta > 0.0)) throw Error("beta must be positive");
  if (!(cfg.tol >= 0.0)) throw Error("tol must be nonnegative");
  if (cfg.max_iters < 1) throw Error("max-iters must be positive");
  if (cfg.scheme == Scheme::ScPrsm) {
    const double upper_ok = certify_probe ? (cfg.mu <= 1.0) : (cfg.mu < 1.0);
    if (!(cfg.mu > 0.0 && upper_ok)) throw Error("mu must lie in (0,1)");
  }
  if (cfg.scheme == Scheme::Gs3Alg1 || cfg.scheme == Scheme::Gs3Alg2 ||
      cfg.scheme == Scheme::MultiPD || cfg.scheme == Scheme::MultiDP) {
    if (!(cfg.nu > 0.0 && cfg.nu < 1.0)) throw Error("nu must lie in (0,1)");
  }
  if (cfg.scheme == Scheme::CustomSplit) {
    // The closed upper boundary is deliberate: alpha = 1 zeroes G, and the
    // refusal should come from the certifier with the G verdict, not from
    // an argument range check.
    if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw Error("alpha must lie in (0,1]");
  }
}

Scheme infer_scheme(const ProblemInstance& p) {
  if (p.sense == ConstraintSense::Inequality) return Scheme::MultiDP;
  switch (p.block_count()) {
    case 2:
      return Scheme::ScPrsm;
    case 3:
      return Scheme::Gs3Alg1;
    default:
      return Scheme::MultiPD;
  }
}

SweepOrder sweep_order_for(const ProblemInstance& p, const RunConfig& cfg) {
  switch (cfg.scheme) {
    case Scheme::MultiPD:
      return SweepOrder::PD;
    case Scheme::MultiDP:
      return SweepOrder::DP;
    case Scheme::CustomSplit:
      return p.sense == ConstraintSense::Inequality ? SweepOrder::DP : SweepOrder::PD;
    default:
      throw Error("sweep_order_for: scheme has no multi-block sweep");
  }
}

CorrectionPlan runtime_plan(const ProblemInstance& p, const RunConfig& cfg, PlanMode mode) {
  switch (cfg.scheme) {
    case Scheme::ScPrsm: {
      const ScprsmMatrices mats = scprsm_matrices(p, cfg.beta, cfg.mu);
      CorrectionPlan plan;
      plan.Q = mats.Q;
      plan.M = mats.M;
      plan.H = mats.H;
      plan.G = mats.G;
      plan.D = mats.M.transpose() * mats.Q;
      plan.Delta = plan.D;
      plan.certificate = certify(plan.Q, plan.M, plan.H, plan.G);
      if (mode == PlanMode::Strict && !plan.certificate.ok) {
        throw Error("two-block plan failed certification");
      }
      return plan;
    }
    case Scheme::Gs3Alg1:
    case Scheme::Gs3Alg2:
    case Scheme::Gs3Alg3: {
      const Matrix Q = gs3_q_image(p.m(), cfg.beta);
      return build_plan(Q, gs3_preset_split_image(cfg.scheme, p.m(), cfg.beta, cfg.nu), mode);
    }
    case Scheme::MultiPD:
    case Scheme::MultiDP: {
      const SweepOrder order = sweep_order_for(p, cfg);
      const Matrix Q = multiblock_script_q(p.block_count(), p.m(), order);
      SplitChoice choice =
          split_from_d(multiblock_script_d(p.block_count(), p.m(), cfg.nu, order));
      choice.strategy = SplitStrategy::Preset;
      choice.preset = order == SweepOrder::PD ? PresetName::MultiPD : PresetName::MultiDP;
      return build_plan(Q, choice, mode);
    }
    case Scheme::CustomSplit: {
      const SweepOrder order = sweep_order_for(p, cfg);
      const Matrix Q = multiblock_script_q(p.block_count(), p.m(), order);
      return build_plan(Q, split_alpha_blend(cfg.alpha), mode);
    }
  }
  throw Error("runtime_plan: unknown scheme");
}

Vector state_coords(const IterateState& st, const ProblemInstance& p, Scheme scheme,
                    double beta) {
  switch (scheme) {
    case Scheme::ScPrsm: {
      const Vector& y = st.x_blocks[1];
      if (y.size() != p.block_dim(1)) throw Error("state_coords: y block not materialized");
      Vector v(y.size() + p.m());
      v << y, st.lambda;
      return v;
    }
    case Scheme::Gs3Alg1:
    case Scheme::Gs3Alg2:
    case Scheme::Gs3Alg3: {
      Vector v(3 * p.m());
      v << st.cached_images[1], st.cached_images[2], st.lambda;
      return v;
    }
    default:
      return multiblock_pack(st.cached_images, st.lambda, beta);
  }
}

Vector point_coords(const ProblemInstance& p, Scheme scheme, double beta,
                    const std::vector<Vector>& x_blocks, const Vector& lambda) {
  if (static_cast<int>(x_blocks.size()) != p.block_count()) {
    throw Error("point_coords: wrong number of blocks");
  }
  switch (scheme) {
    case Scheme::ScPrsm: {
      Vector v(p.block_dim(1) + p.m());
      v << x_blocks[1], lambda;
      return v;
    }
    case Scheme::Gs3Alg1:
    case Scheme::Gs3Alg2:
    case Scheme::Gs3Alg3: {
      Vector v(3 * p.m());
      v << p.blocks[1].A * x_blocks[1], p.blocks[2].A * x_blocks[2], lambda;
      return v;
    }
    default: {
      std::vector<Vector> images(p.block_count());
      for (int i = 0; i < p.block_count(); ++i) images[i] = p.blocks[i].A * x_blocks[i];
      return multiblock_pack(images, lambda, beta);
    }
  }
}

namespace {

bool is_gs3(Scheme s) {
  return s == Scheme::Gs3Alg1 || s == Scheme::Gs3Alg2 || s == Scheme::Gs3Alg3;
}

PredictionOutput predict(const IterateState& st, const ProblemInstance& p, const RunConfig& cfg,
                         SweepOrder order) {
  switch (cfg.scheme) {
    case Scheme::ScPrsm:
      return predict_scprsm(st, p, cfg.beta, cfg.mu);
    case Scheme::Gs3Alg1:
    case Scheme::Gs3Alg2:
    case Scheme::Gs3Alg3:
      return predict_gs3(st, p, cfg.beta);
    default:
      return predict_multiblock(st, p, cfg.beta, order);
  }
}

Vector apply_correction(const CorrectionPlan& plan, const ProblemInstance& p,
                        const RunConfig& cfg, SweepOrder order, const Vector& v,
                        const Vector& v_tilde) {
  switch (cfg.scheme) {
    case Scheme::ScPrsm:
    case Scheme::CustomSplit:
      return correct_dense(plan, v, v_tilde);
    case Scheme::Gs3Alg1:
    case Scheme::Gs3Alg2:
    case Scheme::Gs3Alg3:
      return correct_gs3_structured(v, v_tilde, cfg.scheme, cfg.nu, cfg.beta);
    default:
      return correct_multiblock(v, v_tilde, order, cfg.nu, p.block_count(), p.m());
  }
}

// Scatter the corrected runtime coordinates back into the iterate.  Block
// variables whose coordinates were corrected in image space become
// unmaterialized; the prediction is kept where it stays authoritative.
void apply_state(IterateState* st, const ProblemInstance& p, const RunConfig& cfg,
                 const PredictionOutput& pred, const Vector& v_next) {
  const int m = p.m();
  switch (cfg.scheme) {
    case Scheme::ScPrsm: {
      const int n2 = p.block_dim(1);
      st->x_blocks[0] = pred.x_tilde[0];
      st->cached_images[0] = pred.images_tilde[0];
      st->x_blocks[1] = v_next.head(n2);
      st->cached_images[1] = p.blocks[1].A * st->x_blocks[1];
      st->lambda = v_next.tail(m);
      return;
    }
    case Scheme::Gs3Alg1:
    case Scheme::Gs3Alg2:
    case Scheme::Gs3Alg3: {
      st->x_blocks[0] = pred.x_tilde[0];
      st->cached_images[0] = pred.images_tilde[0];
      st->x_blocks[1] = Vector();
      st->x_blocks[2] = Vector();
      st->cached_images[1] = v_next.segment(0, m);
      st->cached_images[2] = v_next.segment(m, m);
      st->lambda = v_next.tail(m);
      return;
    }
    default: {
      const double rb = std::sqrt(cfg.beta);
      for (int i = 0; i < p.block_count(); ++i) {
        st->x_blocks[i] = Vector();
        st->cached_images[i] = v_next.segment(i * m, m) / rb;
      }
      st->lambda = rb * v_next.tail(m);
      return;
    }
  }
}

// Reported solution: the corrected iterate, with image-space blocks
// pulled back through their coupling matrices once at the end.
std::vector<Vector> report_blocks(const IterateState& st, const ProblemInstance& p,
                                  Scheme scheme) {
  std::vector<Vector> blocks(p.block_count());
  for (int i = 0; i < p.block_count(); ++i) {
    if (st.x_blocks[i].size() == p.block_dim(i)) {
      blocks[i] = st.x_blocks[i];
    } else {
      blocks[i] = least_squares_recover(p.blocks[i].A, st.cached_images[i]);
    }
  }
  (void)scheme;
  return blocks;
}

}  // namespace

SolveResult run_solve(const ProblemInstance& p, const RunConfig& cfg, const TraceSink& sink) {
  check_config(cfg, /*certify_probe=*/false);
  const ValidationReport report = validate_problem(p, requirements_for(cfg.scheme));
  for (const std::string& w : report.warnings) log::info(w);
  if (!report.ok) {
    std::ostringstream os;
    os << "problem rejected for " << scheme_name(cfg.scheme) << ":";
    for (const std::string& e : report.errors) os << "\n  " << e;
    throw Error(os.str());
  }

  const SweepOrder order =
      (cfg.scheme == Scheme::MultiPD || cfg.scheme == Scheme::MultiDP ||
       cfg.scheme == Scheme::CustomSplit)
          ? sweep_order_for(p, cfg)
          : SweepOrder::PD;

  const CorrectionPlan plan = runtime_plan(p, cfg, PlanMode::Permissive);
  if (!plan.certificate.ok && !cfg.force) {
    std::ostringstream os;
    os << "plan failed certification (hm_residual " << plan.certificate.hm_residual
       << ", H min_eig " << plan.certificate.h_cert.min_eig << ", G min_eig "
       << plan.certificate.g_cert.min_eig << "); pass --force to run it anyway";
    throw Error(os.str());
  }
  if (!plan.certificate.ok) {
    log::info("running an uncertified plan under --force; contraction is not guaranteed");
  }

  Vector v_star;
  if (cfg.monitor) {
    const OracleSolution oracle = reference_solution(p);
    log::debug("monitor reference obtained via " + oracle.strategy);
    v_star = point_coords(p, cfg.scheme, cfg.beta, oracle.x_blocks, oracle.lambda);
  }

  IterateState st = initial_state(p, cfg.scheme);
  SolveResult result;

  for (long k = 0; k < cfg.max_iters; ++k) {
    const PredictionOutput pred = predict(st, p, cfg, order);
    const KktResidual kkt = kkt_residual(p, pred.x_tilde, pred.lambda_tilde);
    const Vector v_k = state_coords(st, p, cfg.scheme, cfg.beta);
    const Vector& v_tilde = pred.v_tilde_coords;
    const Vector step = v_k - v_tilde;
    const double pred_norm = step.lpNorm<Eigen::Infinity>();
    const double progress = step.dot(plan.G * step);

    const Vector v_next = apply_correction(plan, p, cfg, order, v_k, v_tilde);
    result.total_progress_G += progress;
    result.final_pred_norm = pred_norm;

    if (cfg.monitor) {
      const ContractionRecord rec = monitor_step(plan, v_k, v_next, v_tilde, v_star, k);
      if (rec.violation) {
        std::ostringstream os;
        os << "contraction violated at iteration " << k << " (slack " << rec.slack << ")";
        log::error(os.str());
      }
      result.records.push_back(rec);
      TraceRow row{k, kkt.primal, kkt.dual, pred_norm, rec.dist_sq_H, rec.progress_sq_G,
                   rec.slack};
      result.trace.push_back(row);
      if (sink) sink(row);
    }

    apply_state(&st, p, cfg, pred, v_next);
    result.iterations = k + 1;
    // Strict comparison so that tol = 0 runs the full budget: monitoring
    // runs want every iteration recorded, even after the iterate has
    // landed on an exact fixed point.
    if (pred_norm < cfg.tol && kkt.primal < cfg.tol) {
      result.converged = true;
      break;
    }
  }

  result.x_blocks = report_blocks(st, p, cfg.scheme);
  result.lambda = st.lambda;
  result.residuals = kkt_residual(p, result.x_blocks, result.lambda);
  return result;
}

}  // namespace pcsplit
