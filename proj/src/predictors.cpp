#include "pcsplit/predictors.hpp"

#include <cmath>
#include <sstream>

#include "pcsplit/log.hpp"

namespace pcsplit {

IterateState initial_state(const ProblemInstance& p, Scheme scheme) {
  IterateState st;
  st.scheme_tag = scheme;
  st.x_blocks.resize(p.block_count());
  st.cached_images.resize(p.block_count());
  for (int i = 0; i < p.block_count(); ++i) {
    st.x_blocks[i] = Vector::Zero(p.block_dim(i));
    st.cached_images[i] = Vector::Zero(p.m());
  }
  st.lambda = Vector::Zero(p.m());
  return st;
}

namespace {

void check_state(const IterateState& state, const ProblemInstance& p) {
  if (static_cast<int>(state.cached_images.size()) != p.block_count() ||
      state.lambda.size() != p.m()) {
    throw Error("predictor: iterate does not match the problem dimensions");
  }
  for (const Vector& img : state.cached_images) {
    if (img.size() != p.m()) throw Error("predictor: cached image has wrong length");
  }
}

SubproblemSpec block_spec(const Block& blk, double beta, Vector linear, Vector shift) {
  SubproblemSpec spec;
  spec.theta = blk.theta;
  spec.A = blk.A;
  spec.beta = beta;
  spec.linear = std::move(linear);
  spec.shift = std::move(shift);
  spec.set = blk.set;
  return spec;
}

}  // namespace

PredictionOutput predict_scprsm(const IterateState& state, const ProblemInstance& p, double beta,
                                double mu) {
  check_state(state, p);
  if (p.block_count() != 2) throw Error("scprsm predictor needs exactly two blocks");
  if (p.sense != ConstraintSense::Equality) {
    throw Error("scprsm predictor handles equality constraints only");
  }
  if (!(beta > 0.0)) throw Error("beta must be positive");
  if (!(mu > 0.0 && mu < 1.0)) throw Error("mu must lie in (0,1)");

  const Block& bx = p.blocks[0];
  const Block& by = p.blocks[1];
  const Vector& By_k = state.cached_images[1];
  const Vector& lam_k = state.lambda;

  PredictionOutput out;
  out.x_tilde.resize(2);
  out.images_tilde.resize(2);

  // x sweep against the old y image.
  out.x_tilde[0] = solve_subproblem(
      block_spec(bx, beta, -bx.A.transpose() * lam_k, By_k - p.rhs));
  out.images_tilde[0] = bx.A * out.x_tilde[0];

  // Half multiplier step, then the y sweep against it.
  const Vector r1 = out.images_tilde[0] + By_k - p.rhs;
  out.lambda_half = lam_k - mu * beta * r1;
  out.x_tilde[1] = solve_subproblem(
      block_spec(by, beta, -by.A.transpose() * out.lambda_half, out.images_tilde[0] - p.rhs));
  out.images_tilde[1] = by.A * out.x_tilde[1];

  // Full-length multiplier prediction, still against the old y image.
  out.lambda_tilde = lam_k - beta * r1;

  out.v_tilde_coords.resize(out.x_tilde[1].size() + p.m());
  out.v_tilde_coords << out.x_tilde[1], out.lambda_tilde;
  return out;
}

ScprsmMatrices scprsm_matrices(const ProblemInstance& p, double beta, double mu) {
  if (p.block_count() != 2) throw Error("scprsm matrices need exactly two blocks");
  if (!(beta > 0.0)) throw Error("beta must be positive");
  const Matrix& B = p.blocks[1].A;
  if (!full_column_rank(B)) {
    throw Error("scprsm matrices: second coupling matrix must have full column rank");
  }
  const int n2 = static_cast<int>(B.cols());
  const int m = p.m();
  const Matrix BtB = B.transpose() * B;
  const Matrix Im = Matrix::Identity(m, m);

  ScprsmMatrices out;
  out.Q = Matrix::Zero(n2 + m, n2 + m);
  out.Q.topLeftCorner(n2, n2) = beta * BtB;
  out.Q.topRightCorner(n2, m) = -mu * B.transpose();
  out.Q.bottomLeftCorner(m, n2) = -B;
  out.Q.bottomRightCorner(m, m) = (1.0 / beta) * Im;

  out.M = Matrix::Zero(n2 + m, n2 + m);
  out.M.topLeftCorner(n2, n2).setIdentity();
  out.M.bottomLeftCorner(m, n2) = -mu * beta * B;
  out.M.bottomRightCorner(m, m) = 2.0 * mu * Im;

  out.H = Matrix::Zero(n2 + m, n2 + m);
  out.H.topLeftCorner(n2, n2) = 0.5 * (2.0 - mu) * beta * BtB;
  out.H.topRightCorner(n2, m) = -0.5 * B.transpose();
  out.H.bottomLeftCorner(m, n2) = -0.5 * B;
  out.H.bottomRightCorner(m, m) = (0.5 / (mu * beta)) * Im;

  out.G = Matrix::Zero(n2 + m, n2 + m);
  out.G.topLeftCorner(n2, n2) = (1.0 - mu) * beta * BtB;
  out.G.topRightCorner(n2, m) = -(1.0 - mu) * B.transpose();
  out.G.bottomLeftCorner(m, n2) = -(1.0 - mu) * B;
  out.G.bottomRightCorner(m, m) = (1.0 - mu) * (2.0 / beta) * Im;
  return out;
}

PredictionOutput predict_gs3(const IterateState& state, const ProblemInstance& p, double beta) {
  check_state(state, p);
  if (p.block_count() != 3) throw Error("three-block predictor needs exactly three blocks");
  if (p.sense != ConstraintSense::Equality) {
    throw Error("three-block predictor handles equality constraints only");
  }
  if (!(beta > 0.0)) throw Error("beta must be positive");

  const Vector& By_k = state.cached_images[1];
  const Vector& Cz_k = state.cached_images[2];
  const Vector& lam_k = state.lambda;

  PredictionOutput out;
  out.x_tilde.resize(3);
  out.images_tilde.resize(3);

  // Forward sweep; each solve sees the newest images to its left and the
  // old images to its right, all against the same old multiplier.
  const Block& b0 = p.blocks[0];
  out.x_tilde[0] = solve_subproblem(
      block_spec(b0, beta, -b0.A.transpose() * lam_k, By_k + Cz_k - p.rhs));
  out.images_tilde[0] = b0.A * out.x_tilde[0];

  const Block& b1 = p.blocks[1];
  out.x_tilde[1] = solve_subproblem(
      block_spec(b1, beta, -b1.A.transpose() * lam_k, out.images_tilde[0] + Cz_k - p.rhs));
  out.images_tilde[1] = b1.A * out.x_tilde[1];

  const Block& b2 = p.blocks[2];
  out.x_tilde[2] = solve_subproblem(
      block_spec(b2, beta, -b2.A.transpose() * lam_k, out.images_tilde[0] + out.images_tilde[1] - p.rhs));
  out.images_tilde[2] = b2.A * out.x_tilde[2];

  // Multiplier prediction from the OLD second and third images, which is
  // what makes the prediction matrix block triangular.
  out.lambda_tilde = lam_k - beta * (out.images_tilde[0] + By_k + Cz_k - p.rhs);

  const int m = p.m();
  out.v_tilde_coords.resize(3 * m);
  out.v_tilde_coords << out.images_tilde[1], out.images_tilde[2], out.lambda_tilde;
  return out;
}

Matrix gs3_q_image(int m, double beta) {
  if (m < 1) throw Error("gs3_q_image: m must be positive");
  if (!(beta > 0.0)) throw Error("beta must be positive");
  const Matrix Im = Matrix::Identity(m, m);
  Matrix Q = Matrix::Zero(3 * m, 3 * m);
  Q.block(0, 0, m, m) = beta * Im;
  Q.block(m, 0, m, m) = beta * Im;
  Q.block(m, m, m, m) = beta * Im;
  Q.block(2 * m, 0, m, m) = -Im;
  Q.block(2 * m, m, m, m) = -Im;
  Q.block(2 * m, 2 * m, m, m) = (1.0 / beta) * Im;
  return Q;
}

Matrix gs3_q_dense(const ProblemInstance& p, double beta) {
  if (p.block_count() != 3) throw Error("gs3_q_dense needs exactly three blocks");
  if (!(beta > 0.0)) throw Error("beta must be positive");
  const Matrix& B = p.blocks[1].A;
  const Matrix& C = p.blocks[2].A;
  const int ny = static_cast<int>(B.cols());
  const int nz = static_cast<int>(C.cols());
  const int m = p.m();
  Matrix Q = Matrix::Zero(ny + nz + m, ny + nz + m);
  Q.block(0, 0, ny, ny) = beta * B.transpose() * B;
  Q.block(ny, 0, nz, ny) = beta * C.transpose() * B;
  Q.block(ny, ny, nz, nz) = beta * C.transpose() * C;
  Q.block(ny + nz, 0, m, ny) = -B;
  Q.block(ny + nz, ny, m, nz) = -C;
  Q.block(ny + nz, ny + nz, m, m) = (1.0 / beta) * Matrix::Identity(m, m);
  return Q;
}

Vector multiblock_pack(const std::vector<Vector>& images, const Vector& lambda, double beta) {
  const int pc = static_cast<int>(images.size());
  const int m = static_cast<int>(lambda.size());
  const double rb = std::sqrt(beta);
  Vector xi((pc + 1) * m);
  for (int i = 0; i < pc; ++i) {
    if (images[i].size() != m) throw Error("multiblock_pack: image has wrong length");
    xi.segment(i * m, m) = rb * images[i];
  }
  xi.tail(m) = lambda / rb;
  return xi;
}

PredictionOutput predict_multiblock(const IterateState& state, const ProblemInstance& p,
                                    double beta, SweepOrder order) {
  check_state(state, p);
  const int pc = p.block_count();
  if (pc < 2) throw Error("multi-block predictor needs at least two blocks");
  if (pc == 2) {
    log::debug("multi-block sweep on a two-block instance; the dedicated two-block scheme "
               "usually converges faster");
  }
  if (!(beta > 0.0)) throw Error("beta must be positive");
  if (p.sense == ConstraintSense::Inequality && order != SweepOrder::DP) {
    throw Error(">= constraints need the multiplier-first sweep (multi-dp)");
  }

  const Vector& lam_k = state.lambda;
  Vector image_sum_k = -p.rhs;
  for (int i = 0; i < pc; ++i) image_sum_k += state.cached_images[i];

  PredictionOutput out;
  out.x_tilde.resize(pc);
  out.images_tilde.resize(pc);

  // The multiplier every block solve prices against: old for the
  // primal-first order, freshly predicted for the multiplier-first order.
  Vector lam_used = lam_k;
  if (order == SweepOrder::DP) {
    out.lambda_tilde = project_lambda(lam_k - beta * image_sum_k, lambda_cone(p.sense));
    lam_used = out.lambda_tilde;
  }

  // Gauss-Seidel over the blocks: block i sees the predicted images of
  // the blocks before it and the old images of itself and the rest.
  Vector shift_new = Vector::Zero(p.m());  // sum over j < i of (zeta~_j - zeta_j)
  for (int i = 0; i < pc; ++i) {
    const Block& blk = p.blocks[i];
    const Vector shift = shift_new - state.cached_images[i];
    out.x_tilde[i] =
        solve_subproblem(block_spec(blk, beta, -blk.A.transpose() * lam_used, shift));
    out.images_tilde[i] = blk.A * out.x_tilde[i];
    shift_new += out.images_tilde[i] - state.cached_images[i];
  }

  if (order == SweepOrder::PD) {
    Vector image_sum_tilde = -p.rhs;
    for (int i = 0; i < pc; ++i) image_sum_tilde += out.images_tilde[i];
    out.lambda_tilde = project_lambda(lam_k - beta * image_sum_tilde, lambda_cone(p.sense));
  }

  out.v_tilde_coords = multiblock_pack(out.images_tilde, out.lambda_tilde, beta);
  return out;
}

Matrix multiblock_script_q(int p, int m, SweepOrder order) {
  if (p < 2 || m < 1) throw Error("multiblock_script_q: need p >= 2 and m >= 1");
  const int dim = (p + 1) * m;
  Matrix Q = Matrix::Zero(dim, dim);
  Q.topLeftCorner(p * m, p * m) = BlockLowerOnes{p, m}.materialize();
  Q.bottomRightCorner(m, m).setIdentity();
  if (order == SweepOrder::PD) {
    for (int i = 0; i < p; ++i) Q.block(i * m, p * m, m, m).setIdentity();
  } else {
    Q.block(p * m, 0, m, p * m) = -build_E(p, m);
  }
  return Q;
}

PredictionMatrix q_multiblock(const ProblemInstance& p, double beta, SweepOrder order) {
  const int pc = p.block_count();
  if (pc < 2) throw Error("q_multiblock needs at least two blocks");
  if (!(beta > 0.0)) throw Error("beta must be positive");
  for (int i = 0; i < pc; ++i) {
    if (!full_column_rank(p.blocks[i].A)) {
      std::ostringstream os;
      os << "q_multiblock: block " << i << " coupling matrix must have full column rank";
      throw Error(os.str());
    }
  }
  const int n = p.total_dim();
  const int m = p.m();
  const double rb = std::sqrt(beta);

  PredictionMatrix out;
  out.structure = order == SweepOrder::PD ? Scheme::MultiPD : Scheme::MultiDP;
  out.script_Q = multiblock_script_q(pc, m, order);

  out.P = Matrix::Zero((pc + 1) * m, n + m);
  for (int i = 0; i < pc; ++i) {
    out.P.block(i * m, p.block_offset(i), m, p.block_dim(i)) = rb * p.blocks[i].A;
  }
  out.P.bottomRightCorner(m, m) = (1.0 / rb) * Matrix::Identity(m, m);

  out.Q = out.P.transpose() * out.script_Q * out.P;
  return out;
}

}  // namespace pcsplit
