#include "pcsplit/problem.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <sstream>

#include "pcsplit/subproblem.hpp"

namespace pcsplit {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

BlockFunction BlockFunction::quadratic(Matrix P, Vector q) {
  BlockFunction f;
  f.kind = Kind::Quadratic;
  f.P = std::move(P);
  f.q = std::move(q);
  return f;
}

BlockFunction BlockFunction::l1(double weight) {
  BlockFunction f;
  f.kind = Kind::L1;
  f.weight = weight;
  return f;
}

BlockFunction BlockFunction::zero() { return BlockFunction{}; }

BlockFunction BlockFunction::box_indicator(Vector lo, Vector hi) {
  BlockFunction f;
  f.kind = Kind::BoxIndicator;
  f.lo = std::move(lo);
  f.hi = std::move(hi);
  return f;
}

int ProblemInstance::total_dim() const {
  int n = 0;
  for (const Block& blk : blocks) n += static_cast<int>(blk.A.cols());
  return n;
}

int ProblemInstance::block_offset(int i) const {
  int off = 0;
  for (int j = 0; j < i; ++j) off += block_dim(j);
  return off;
}

void ProblemInstance::check_invariants() const {
  if (rhs.size() == 0) throw Error("problem: right-hand side is empty");
  if (blocks.empty()) throw Error("problem: no blocks");
  for (int i = 0; i < block_count(); ++i) {
    const Block& blk = blocks[i];
    std::ostringstream tag;
    tag << "block " << i << ": ";
    const int n = static_cast<int>(blk.A.cols());
    if (n < 1) throw Error(tag.str() + "coupling matrix has no columns");
    if (blk.A.rows() != rhs.size()) {
      throw Error(tag.str() + "coupling matrix row count does not match the right-hand side");
    }
    const BlockFunction& f = blk.theta;
    switch (f.kind) {
      case BlockFunction::Kind::Quadratic: {
        if (f.P.rows() != n || f.P.cols() != n || f.q.size() != n) {
          throw Error(tag.str() + "quadratic term has inconsistent dimensions");
        }
        const double fro = f.P.norm();
        if (fro > 0.0 && (f.P - f.P.transpose()).norm() > 1e-10 * fro) {
          throw Error(tag.str() + "quadratic matrix is not symmetric");
        }
        Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (f.P + f.P.transpose()),
                                                  Eigen::EigenvaluesOnly);
        if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, fro)) {
          throw Error(tag.str() + "quadratic matrix is not positive semidefinite");
        }
        break;
      }
      case BlockFunction::Kind::L1:
        if (f.weight < 0.0) throw Error(tag.str() + "l1 weight must be nonnegative");
        break;
      case BlockFunction::Kind::Zero:
        break;
      case BlockFunction::Kind::BoxIndicator:
        if (f.lo.size() != n || f.hi.size() != n) {
          throw Error(tag.str() + "box indicator bounds have wrong length");
        }
        if ((f.lo.array() > f.hi.array()).any()) {
          throw Error(tag.str() + "box indicator has lo > hi");
        }
        break;
    }
    if (blk.set.kind == BlockSet::Kind::Box) {
      if (blk.set.lo.size() != n || blk.set.hi.size() != n) {
        throw Error(tag.str() + "box set bounds have wrong length");
      }
      if ((blk.set.lo.array() > blk.set.hi.array()).any()) {
        throw Error(tag.str() + "box set has lo > hi");
      }
    }
  }
}

double evaluate_theta(const BlockFunction& theta, const Vector& x) {
  switch (theta.kind) {
    case BlockFunction::Kind::Quadratic:
      return 0.5 * x.dot(theta.P * x) + theta.q.dot(x);
    case BlockFunction::Kind::L1:
      return theta.weight * x.lpNorm<1>();
    case BlockFunction::Kind::Zero:
      return 0.0;
    case BlockFunction::Kind::BoxIndicator:
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        if (x(j) < theta.lo(j) - kActiveTol || x(j) > theta.hi(j) + kActiveTol) return kInf;
      }
      return 0.0;
  }
  return 0.0;
}

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::ScPrsm: return "scprsm";
    case Scheme::Gs3Alg1: return "gs3-alg1";
    case Scheme::Gs3Alg2: return "gs3-alg2";
    case Scheme::Gs3Alg3: return "gs3-alg3";
    case Scheme::MultiPD: return "multi-pd";
    case Scheme::MultiDP: return "multi-dp";
    case Scheme::CustomSplit: return "custom-split";
  }
  return "unknown";
}

std::optional<Scheme> scheme_from_name(const std::string& name) {
  for (Scheme s : {Scheme::ScPrsm, Scheme::Gs3Alg1, Scheme::Gs3Alg2, Scheme::Gs3Alg3,
                   Scheme::MultiPD, Scheme::MultiDP, Scheme::CustomSplit}) {
    if (scheme_name(s) == name) return s;
  }
  return std::nullopt;
}

PredictorRequirements requirements_for(Scheme s) {
  PredictorRequirements req;
  req.scheme = s;
  switch (s) {
    case Scheme::ScPrsm:
      req.min_blocks = req.max_blocks = 2;
      break;
    case Scheme::Gs3Alg1:
    case Scheme::Gs3Alg2:
    case Scheme::Gs3Alg3:
      req.min_blocks = req.max_blocks = 3;
      break;
    case Scheme::MultiPD:
      req.min_blocks = 2;
      req.max_blocks = -1;
      break;
    case Scheme::MultiDP:
    case Scheme::CustomSplit:
      req.min_blocks = 2;
      req.max_blocks = -1;
      req.equality_only = false;
      break;
  }
  return req;
}

ValidationReport validate_problem(const ProblemInstance& p, const PredictorRequirements& req) {
  ValidationReport rep;
  try {
    p.check_invariants();
  } catch (const Error& e) {
    rep.ok = false;
    rep.errors.emplace_back(e.what());
    return rep;
  }

  const int pc = p.block_count();
  if (pc < req.min_blocks || (req.max_blocks > 0 && pc > req.max_blocks)) {
    std::ostringstream os;
    os << scheme_name(req.scheme) << " needs ";
    if (req.max_blocks == req.min_blocks) {
      os << "exactly " << req.min_blocks;
    } else {
      os << "at least " << req.min_blocks;
    }
    os << " blocks, got " << pc;
    rep.ok = false;
    rep.errors.push_back(os.str());
  }
  if ((req.scheme == Scheme::MultiPD || req.scheme == Scheme::MultiDP) && pc == 2) {
    rep.warnings.emplace_back(
        "two blocks: the dedicated two-block scheme usually converges faster");
  }

  if (p.sense == ConstraintSense::Inequality && req.equality_only) {
    rep.ok = false;
    rep.errors.push_back(scheme_name(req.scheme) +
                         " handles equality constraints only; use multi-dp for >= constraints");
  }
  if (p.sense == ConstraintSense::Inequality && req.scheme == Scheme::MultiPD) {
    // Covered by equality_only, kept for clarity of the report.
  }

  // Which blocks must have full column rank depends on the scheme: the
  // corrected coordinates of the two- and three-block schemes skip the
  // first block, the multi-block sweeps scale every block.
  rep.block_rank_ok.resize(pc, true);
  for (int i = 0; i < pc; ++i) {
    rep.block_rank_ok[i] = full_column_rank(p.blocks[i].A);
    bool required = true;
    if (req.scheme == Scheme::ScPrsm) required = (i == 1);
    if (req.scheme == Scheme::Gs3Alg1 || req.scheme == Scheme::Gs3Alg2 ||
        req.scheme == Scheme::Gs3Alg3) {
      required = (i == 1 || i == 2);
    }
    if (required && !rep.block_rank_ok[i]) {
      std::ostringstream os;
      os << "block " << i << ": coupling matrix must have full column rank for "
         << scheme_name(req.scheme);
      rep.ok = false;
      rep.errors.push_back(os.str());
    }
  }

  rep.block_class.resize(pc, SolvabilityClass::Unsupported);
  for (int i = 0; i < pc; ++i) {
    rep.block_class[i] = classify_block(p.blocks[i].theta, p.blocks[i].A, p.blocks[i].set);
    if (rep.block_class[i] == SolvabilityClass::Unsupported) {
      std::ostringstream os;
      os << "block " << i << ": no exact subproblem solver for this objective/set/matrix "
         << "combination";
      rep.ok = false;
      rep.errors.push_back(os.str());
    }
  }
  return rep;
}

ViDescription vi_description(const ProblemInstance& p) {
  p.check_invariants();
  return ViDescription{p};
}

Vector evaluate_F(const ViDescription& vi, const Vector& w) {
  const ProblemInstance& p = vi.problem;
  if (w.size() != vi.dim()) throw Error("evaluate_F: point has wrong dimension");
  const int n = p.total_dim();
  const Vector lambda = w.tail(p.m());
  Vector out(vi.dim());
  Vector residual = -p.rhs;
  for (int i = 0; i < p.block_count(); ++i) {
    const int off = p.block_offset(i);
    const int ni = p.block_dim(i);
    out.segment(off, ni) = -p.blocks[i].A.transpose() * lambda;
    residual += p.blocks[i].A * w.segment(off, ni);
  }
  out.tail(p.m()) = residual;
  (void)n;
  return out;
}

namespace {

// Effective bounds for one coordinate: intersection of the indicator box
// (when theta is a BoxIndicator) and the block set box.
void effective_bounds(const Block& blk, int j, double* lo, double* hi) {
  *lo = -kInf;
  *hi = kInf;
  if (blk.theta.kind == BlockFunction::Kind::BoxIndicator) {
    *lo = std::max(*lo, blk.theta.lo(j));
    *hi = std::min(*hi, blk.theta.hi(j));
  }
  if (blk.set.kind == BlockSet::Kind::Box) {
    *lo = std::max(*lo, blk.set.lo(j));
    *hi = std::min(*hi, blk.set.hi(j));
  }
}

}  // namespace

KktResidual kkt_residual(const ProblemInstance& p, const std::vector<Vector>& x_blocks,
                         const Vector& lambda) {
  if (static_cast<int>(x_blocks.size()) != p.block_count()) {
    throw Error("kkt_residual: wrong number of blocks");
  }
  if (lambda.size() != p.m()) throw Error("kkt_residual: multiplier has wrong length");

  KktResidual res;

  Vector r = -p.rhs;
  for (int i = 0; i < p.block_count(); ++i) {
    if (x_blocks[i].size() != p.block_dim(i)) {
      throw Error("kkt_residual: block has wrong length");
    }
    r += p.blocks[i].A * x_blocks[i];
  }
  if (p.sense == ConstraintSense::Equality) {
    res.primal = r.norm();
    res.comp = 0.0;
  } else {
    res.primal = r.cwiseMin(0.0).norm();
    res.comp = std::abs(lambda.dot(r)) + lambda.cwiseMin(0.0).norm();
  }

  // Stationarity: for each coordinate, the distance of zero from
  // grad_smooth - A^T lambda + d(nonsmooth) + N_box, measured per
  // coordinate and accumulated in the 2-norm.
  double dual_sq = 0.0;
  for (int i = 0; i < p.block_count(); ++i) {
    const Block& blk = p.blocks[i];
    const Vector& x = x_blocks[i];
    Vector base = -blk.A.transpose() * lambda;
    if (blk.theta.kind == BlockFunction::Kind::Quadratic) {
      base += blk.theta.P * x + blk.theta.q;
    }
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      double lo, hi;
      effective_bounds(blk, static_cast<int>(j), &lo, &hi);
      if (x(j) < lo - kActiveTol || x(j) > hi + kActiveTol) {
        // Outside its own box: charge the violation as a stationarity
        // defect so infeasible candidate points never score well.
        const double viol = std::max(lo - x(j), x(j) - hi);
        dual_sq += viol * viol;
        continue;
      }
      double g = base(j);
      double ilo = 0.0, ihi = 0.0;  // interval of admissible subgradients around -g
      if (blk.theta.kind == BlockFunction::Kind::L1 && blk.theta.weight > 0.0) {
        if (x(j) > kActiveTol) {
          g += blk.theta.weight;
        } else if (x(j) < -kActiveTol) {
          g -= blk.theta.weight;
        } else {
          ilo -= blk.theta.weight;
          ihi += blk.theta.weight;
        }
      }
      if (x(j) <= lo + kActiveTol) ilo = -kInf;  // normal cone at the lower face
      if (x(j) >= hi - kActiveTol) ihi = kInf;   // normal cone at the upper face
      const double target = -g;
      double d = 0.0;
      if (target < ilo) d = ilo - target;
      if (target > ihi) d = target - ihi;
      dual_sq += d * d;
    }
  }
  res.dual = std::sqrt(dual_sq);
  return res;
}

KktResidual kkt_residual(const ProblemInstance& p, const Vector& w) {
  if (w.size() != p.total_dim() + p.m()) throw Error("kkt_residual: point has wrong dimension");
  std::vector<Vector> xs(p.block_count());
  for (int i = 0; i < p.block_count(); ++i) {
    xs[i] = w.segment(p.block_offset(i), p.block_dim(i));
  }
  return kkt_residual(p, xs, w.tail(p.m()));
}

}  // namespace pcsplit
