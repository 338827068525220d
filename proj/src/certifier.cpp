#include "pcsplit/certifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pcsplit/correction.hpp"
#include "pcsplit/log.hpp"
#include "pcsplit/solver.hpp"

namespace pcsplit {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kOracleTol = 1e-10;       // required quality of a reference solution
constexpr double kSlackRelTol = 1e-8;      // contraction slack allowance
constexpr long kOracleIterCap = 1000000;   // long-run fallback budget
}  // namespace

ConvergenceCertificate certify(const Matrix& Q, const Matrix& M, const Matrix& H,
                               const Matrix& G) {
  const Eigen::Index n = Q.rows();
  if (Q.cols() != n || M.rows() != n || M.cols() != n || H.rows() != n || H.cols() != n ||
      G.rows() != n || G.cols() != n) {
    throw Error("certify: matrices must be square and of equal size");
  }
  ConvergenceCertificate cert;
  const double qn = Q.norm();
  cert.hm_residual = qn > 0.0 ? (H * M - Q).norm() / qn : (H * M).norm();
  cert.h_cert = spd_check(H);
  cert.g_cert = spd_check(G);
  cert.qtq_cert = spd_check(Q.transpose() + Q);
  cert.ok = cert.hm_residual <= kResidualRelTol && cert.h_cert.is_spd && cert.g_cert.is_spd &&
            cert.qtq_cert.is_spd;
  return cert;
}

ContractionRecord monitor_step(const CorrectionPlan& plan, const Vector& v, const Vector& v_next,
                               const Vector& v_tilde, const Vector& v_star, long k) {
  const Eigen::Index n = plan.H.rows();
  if (v.size() != n || v_next.size() != n || v_tilde.size() != n) {
    throw Error("monitor_step: point has wrong dimension");
  }
  if (v_star.size() != n) {
    throw Error("monitor_step: reference point has wrong dimension");
  }
  ContractionRecord rec;
  rec.k = k;
  const Vector d = v - v_star;
  const Vector dn = v_next - v_star;
  const Vector step = v - v_tilde;
  rec.dist_sq_H = d.dot(plan.H * d);
  rec.dist_sq_H_next = dn.dot(plan.H * dn);
  rec.progress_sq_G = step.dot(plan.G * step);
  rec.slack = rec.dist_sq_H - rec.dist_sq_H_next - rec.progress_sq_G;
  rec.violation = rec.slack < -kSlackRelTol * std::max(1.0, rec.dist_sq_H);
  return rec;
}

namespace {

// Direct stationarity solve for the all-smooth equality case:
//   [ P_blk  -A^T ] [x]   [-q]
//   [ A       0   ] [l] = [ b ].
bool closed_form_candidate(const ProblemInstance& p, OracleSolution* out) {
  if (p.sense != ConstraintSense::Equality) return false;
  for (const Block& blk : p.blocks) {
    if (blk.set.kind != BlockSet::Kind::Free) return false;
    if (blk.theta.kind != BlockFunction::Kind::Quadratic &&
        blk.theta.kind != BlockFunction::Kind::Zero) {
      return false;
    }
  }
  const int n = p.total_dim();
  const int m = p.m();
  Matrix K = Matrix::Zero(n + m, n + m);
  Vector rhs(n + m);
  for (int i = 0; i < p.block_count(); ++i) {
    const int off = p.block_offset(i);
    const int ni = p.block_dim(i);
    if (p.blocks[i].theta.kind == BlockFunction::Kind::Quadratic) {
      K.block(off, off, ni, ni) = p.blocks[i].theta.P;
      rhs.segment(off, ni) = -p.blocks[i].theta.q;
    } else {
      rhs.segment(off, ni).setZero();
    }
    K.block(off, n, ni, m) = -p.blocks[i].A.transpose();
    K.block(n, off, m, ni) = p.blocks[i].A;
  }
  rhs.tail(m) = p.rhs;
  Vector sol;
  try {
    sol = dense_solve(K, rhs);
  } catch (const Error&) {
    return false;  // singular stationarity system, try something else
  }
  out->x_blocks.resize(p.block_count());
  for (int i = 0; i < p.block_count(); ++i) {
    out->x_blocks[i] = sol.segment(p.block_offset(i), p.block_dim(i));
  }
  out->lambda = sol.tail(m);
  out->quality = kkt_residual(p, out->x_blocks, out->lambda);
  out->strategy = "closed-form";
  return true;
}

// Active-set enumeration for tiny instances: every coordinate is assigned
// a mode (free, pinned at zero with an l1 subgradient sign, or pinned at
// a bound) and every >= row is active or inactive; each assignment yields
// a square linear system whose solution is scored by its optimality
// residuals.
enum class CoordMode { Free, Pos, Neg, AtZero, AtLo, AtHi };

struct CoordInfo {
  int block = 0;
  int local = 0;
  double l1_weight = 0.0;
  double lo = -kInf;
  double hi = kInf;
  std::vector<CoordMode> modes;
};

bool enumeration_candidate(const ProblemInstance& p, OracleSolution* out) {
  const int n = p.total_dim();
  const int m = p.m();
  if (n > 3) return false;

  std::vector<CoordInfo> coords;
  coords.reserve(n);
  for (int i = 0; i < p.block_count(); ++i) {
    const Block& blk = p.blocks[i];
    for (int j = 0; j < p.block_dim(i); ++j) {
      CoordInfo ci;
      ci.block = i;
      ci.local = j;
      if (blk.theta.kind == BlockFunction::Kind::BoxIndicator) {
        ci.lo = blk.theta.lo(j);
        ci.hi = blk.theta.hi(j);
      }
      if (blk.set.kind == BlockSet::Kind::Box) {
        ci.lo = std::max(ci.lo, blk.set.lo(j));
        ci.hi = std::min(ci.hi, blk.set.hi(j));
      }
      if (blk.theta.kind == BlockFunction::Kind::L1 && blk.theta.weight > 0.0) {
        ci.l1_weight = blk.theta.weight;
        ci.modes = {CoordMode::AtZero, CoordMode::Pos, CoordMode::Neg};
      } else {
        ci.modes = {CoordMode::Free};
      }
      if (std::isfinite(ci.lo)) ci.modes.push_back(CoordMode::AtLo);
      if (std::isfinite(ci.hi)) ci.modes.push_back(CoordMode::AtHi);
      coords.push_back(std::move(ci));
    }
  }

  const int row_choices = p.sense == ConstraintSense::Inequality ? 2 : 1;
  double combos = 1.0;
  for (const CoordInfo& ci : coords) combos *= static_cast<double>(ci.modes.size());
  for (int r = 0; r < m; ++r) combos *= row_choices;
  if (combos > 2e5) return false;

  // Stacked constraint matrix, for assembling candidate systems.
  Matrix A(m, n);
  for (int i = 0; i < p.block_count(); ++i) {
    A.block(0, p.block_offset(i), m, p.block_dim(i)) = p.blocks[i].A;
  }
  // Stacked quadratic data.
  Matrix Pfull = Matrix::Zero(n, n);
  Vector qfull = Vector::Zero(n);
  for (int i = 0; i < p.block_count(); ++i) {
    if (p.blocks[i].theta.kind == BlockFunction::Kind::Quadratic) {
      const int off = p.block_offset(i);
      const int ni = p.block_dim(i);
      Pfull.block(off, off, ni, ni) = p.blocks[i].theta.P;
      qfull.segment(off, ni) = p.blocks[i].theta.q;
    }
  }

  std::vector<int> mode_pick(n, 0);
  std::vector<int> row_pick(m, 0);  // 0 = active, 1 = inactive
  double best_total = kInf;

  auto evaluate_assignment = [&]() {
    std::vector<int> unknown;  // coordinate indices solved for
    Vector xfix = Vector::Zero(n);
    std::vector<double> sign(n, 0.0);
    for (int c = 0; c < n; ++c) {
      switch (coords[c].modes[static_cast<size_t>(mode_pick[c])]) {
        case CoordMode::Free:
          unknown.push_back(c);
          break;
        case CoordMode::Pos:
          unknown.push_back(c);
          sign[c] = 1.0;
          break;
        case CoordMode::Neg:
          unknown.push_back(c);
          sign[c] = -1.0;
          break;
        case CoordMode::AtZero:
          xfix(c) = 0.0;
          break;
        case CoordMode::AtLo:
          xfix(c) = coords[c].lo;
          break;
        case CoordMode::AtHi:
          xfix(c) = coords[c].hi;
          break;
      }
    }
    std::vector<int> active;
    for (int r = 0; r < m; ++r) {
      if (p.sense == ConstraintSense::Equality || row_pick[r] == 0) active.push_back(r);
    }

    const int nu = static_cast<int>(unknown.size());
    const int na = static_cast<int>(active.size());
    Matrix S = Matrix::Zero(nu + na, nu + na);
    Vector rhs = Vector::Zero(nu + na);
    // Stationarity rows for the unknown coordinates.
    for (int a = 0; a < nu; ++a) {
      const int u = unknown[a];
      for (int b = 0; b < nu; ++b) S(a, b) = Pfull(u, unknown[b]);
      double cst = qfull(u) + sign[u] * coords[u].l1_weight;
      for (int c = 0; c < n; ++c) {
        if (std::find(unknown.begin(), unknown.end(), c) == unknown.end()) {
          cst += Pfull(u, c) * xfix(c);
        }
      }
      for (int b = 0; b < na; ++b) S(a, nu + b) = -A(active[b], u);
      rhs(a) = -cst;
    }
    // Active constraint rows.
    for (int b = 0; b < na; ++b) {
      const int r = active[b];
      double cst = -p.rhs(r);
      for (int c = 0; c < n; ++c) {
        if (std::find(unknown.begin(), unknown.end(), c) == unknown.end()) {
          cst += A(r, c) * xfix(c);
        }
      }
      for (int a = 0; a < nu; ++a) S(nu + b, a) = A(r, unknown[a]);
      rhs(nu + b) = -cst;
    }

    Vector sol = Vector::Zero(nu + na);
    if (nu + na > 0) {
      sol = S.colPivHouseholderQr().solve(rhs);
      if (!sol.allFinite()) return;
    }

    Vector x = xfix;
    for (int a = 0; a < nu; ++a) x(unknown[a]) = sol(a);
    Vector lambda = Vector::Zero(m);
    for (int b = 0; b < na; ++b) lambda(active[b]) = sol(nu + b);

    std::vector<Vector> xb(p.block_count());
    for (int i = 0; i < p.block_count(); ++i) {
      xb[i] = x.segment(p.block_offset(i), p.block_dim(i));
    }
    const KktResidual quality = kkt_residual(p, xb, lambda);
    if (quality.total() < best_total) {
      best_total = quality.total();
      out->x_blocks = std::move(xb);
      out->lambda = std::move(lambda);
      out->quality = quality;
    }
  };

  // Walk the whole assignment product with an odometer.
  while (true) {
    evaluate_assignment();
    int pos = 0;
    for (; pos < n; ++pos) {
      if (++mode_pick[pos] < static_cast<int>(coords[pos].modes.size())) break;
      mode_pick[pos] = 0;
    }
    if (pos < n) continue;
    int r = 0;
    for (; r < m; ++r) {
      if (++row_pick[r] < row_choices) break;
      row_pick[r] = 0;
    }
    if (r == m) break;
  }

  if (best_total > kOracleTol) return false;
  out->strategy = "enumeration";
  return true;
}

bool long_run_candidate(const ProblemInstance& p, OracleSolution* out, std::string* note) {
  RunConfig cfg;
  if (p.sense == ConstraintSense::Inequality) {
    cfg.scheme = Scheme::MultiDP;
  } else if (p.block_count() == 3) {
    cfg.scheme = Scheme::Gs3Alg3;
  } else {
    cfg.scheme = Scheme::MultiPD;
  }
  cfg.beta = 1.0;
  cfg.nu = 0.9;
  cfg.tol = 1e-12;
  cfg.max_iters = kOracleIterCap;
  cfg.monitor = false;
  SolveResult result;
  try {
    result = run_solve(p, cfg);
  } catch (const Error& e) {
    *note = e.what();
    return false;
  }
  out->x_blocks = result.x_blocks;
  out->lambda = result.lambda;
  out->quality = kkt_residual(p, out->x_blocks, out->lambda);
  out->strategy = "long-run";
  if (out->quality.total() > kOracleTol) {
    std::ostringstream os;
    os << "long run reached optimality residual " << out->quality.total() << " after "
       << result.iterations << " iterations";
    *note = os.str();
    return false;
  }
  return true;
}

}  // namespace

OracleSolution reference_solution(const ProblemInstance& p) {
  p.check_invariants();
  OracleSolution out;

  if (closed_form_candidate(p, &out) && out.quality.total() <= kOracleTol) {
    log::debug("reference solution via direct stationarity solve, residual " +
               std::to_string(out.quality.total()));
    return out;
  }
  if (enumeration_candidate(p, &out)) {
    log::debug("reference solution via active-set enumeration, residual " +
               std::to_string(out.quality.total()));
    return out;
  }
  std::string note;
  if (long_run_candidate(p, &out, &note)) {
    log::debug("reference solution via long certified run, residual " +
               std::to_string(out.quality.total()));
    return out;
  }
  std::ostringstream os;
  os << "no reference solution of quality " << kOracleTol << " found";
  if (!note.empty()) os << " (" << note << ")";
  throw Error(os.str());
}

}  // namespace pcsplit
