#include "pcsplit/correction.hpp"

#include <cmath>
#include <sstream>

namespace pcsplit {

SplitChoice split_from_d(Matrix D) {
  SplitChoice c;
  c.strategy = SplitStrategy::FromD;
  c.part = std::move(D);
  return c;
}

SplitChoice split_from_g(Matrix G) {
  SplitChoice c;
  c.strategy = SplitStrategy::FromG;
  c.part = std::move(G);
  return c;
}

SplitChoice split_alpha_blend(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw Error("alpha must lie in (0,1]");
  }
  SplitChoice c;
  c.strategy = SplitStrategy::AlphaBlend;
  c.alpha = alpha;
  return c;
}

std::pair<Matrix, Matrix> split(const Matrix& Q, const SplitChoice& choice, PlanMode mode) {
  if (Q.rows() != Q.cols() || Q.rows() == 0) throw Error("split: Q must be square");
  const Matrix sum = Q.transpose() + Q;
  const SpdCertificate sum_cert = spd_check(sum);
  if (mode == PlanMode::Strict && !sum_cert.is_spd) {
    std::ostringstream os;
    os << "split: Q^T + Q is not positive definite (min eigenvalue " << sum_cert.min_eig << ")";
    throw Error(os.str());
  }

  Matrix D, G;
  switch (choice.strategy) {
    case SplitStrategy::FromD:
    case SplitStrategy::Preset:
      if (choice.part.rows() != Q.rows() || choice.part.cols() != Q.cols()) {
        throw Error("split: D has wrong dimensions");
      }
      D = choice.part;
      G = sum - D;
      break;
    case SplitStrategy::FromG:
      if (choice.part.rows() != Q.rows() || choice.part.cols() != Q.cols()) {
        throw Error("split: G has wrong dimensions");
      }
      G = choice.part;
      D = sum - G;
      break;
    case SplitStrategy::AlphaBlend:
      if (!(choice.alpha > 0.0 && choice.alpha <= 1.0)) {
        throw Error("alpha must lie in (0,1]");
      }
      D = choice.alpha * sum;
      G = sum - D;
      break;
  }

  if (mode == PlanMode::Strict) {
    const SpdCertificate d_cert = spd_check(D);
    if (!d_cert.is_spd) {
      std::ostringstream os;
      os << "split: D is not symmetric positive definite (min eigenvalue " << d_cert.min_eig
         << ", symmetry defect " << d_cert.symmetry_defect << ")";
      throw Error(os.str());
    }
    const SpdCertificate g_cert = spd_check(G);
    if (!g_cert.is_spd) {
      std::ostringstream os;
      os << "split: G is not symmetric positive definite (min eigenvalue " << g_cert.min_eig
         << ", symmetry defect " << g_cert.symmetry_defect << ")";
      throw Error(os.str());
    }
  }
  return {std::move(D), std::move(G)};
}

CorrectionPlan build_plan(const Matrix& Q, const SplitChoice& choice, PlanMode mode) {
  CorrectionPlan plan;
  plan.Q = Q;
  auto [D, G] = split(Q, choice, mode);
  plan.D = std::move(D);
  plan.G = std::move(G);
  plan.Delta = plan.D;

  // M = Q^{-T} D and H = Q D^{-1} Q^T.  Even a permissive plan needs an
  // invertible D; a split that zeroes D out has no correction step at all.
  plan.M = dense_solve(Matrix(Q.transpose()), plan.D);
  plan.H = Q * dense_solve(plan.D, Matrix(Q.transpose()));
  plan.certificate = certify(plan.Q, plan.M, plan.H, plan.G);
  return plan;
}

Vector correct_dense(const CorrectionPlan& plan, const Vector& v, const Vector& v_tilde) {
  if (v.size() != plan.Q.rows() || v_tilde.size() != plan.Q.rows()) {
    throw Error("correct_dense: point has wrong dimension");
  }
  const Vector rhs = plan.Delta * (v_tilde - v);
  return v + dense_solve(Matrix(plan.Q.transpose()), rhs);
}

namespace {

void require_nu(double nu) {
  if (!(nu > 0.0 && nu < 1.0)) throw Error("nu must lie in (0,1)");
}

// Image-coordinate D of the three built-in three-block splits, as the
// 3x3 stencil applied blockwise (each entry scales an m x m identity).
void gs3_stencil(Scheme scheme, double nu, double beta, double S[3][3]) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) S[i][j] = 0.0;
  switch (scheme) {
    case Scheme::Gs3Alg1:
      require_nu(nu);
      S[0][0] = nu * beta;
      S[1][1] = nu * beta;
      S[2][2] = 1.0 / beta;
      break;
    case Scheme::Gs3Alg2:
      // D = (Q^T + Q) - G with the block-diagonal G of Alg1's D shape.
      require_nu(nu);
      S[0][0] = (2.0 - nu) * beta;
      S[0][1] = beta;
      S[0][2] = -1.0;
      S[1][0] = beta;
      S[1][1] = (2.0 - nu) * beta;
      S[1][2] = -1.0;
      S[2][0] = -1.0;
      S[2][1] = -1.0;
      S[2][2] = 1.0 / beta;
      break;
    case Scheme::Gs3Alg3:
      // D = (Q^T + Q) / 2.
      S[0][0] = beta;
      S[0][1] = 0.5 * beta;
      S[0][2] = -0.5;
      S[1][0] = 0.5 * beta;
      S[1][1] = beta;
      S[1][2] = -0.5;
      S[2][0] = -0.5;
      S[2][1] = -0.5;
      S[2][2] = 1.0 / beta;
      break;
    default:
      throw Error("not a three-block scheme");
  }
}

Matrix stencil_to_matrix(const double S[3][3], int m) {
  Matrix D = Matrix::Zero(3 * m, 3 * m);
  const Matrix Im = Matrix::Identity(m, m);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (S[i][j] != 0.0) D.block(i * m, j * m, m, m) = S[i][j] * Im;
  return D;
}

}  // namespace

SplitChoice gs3_preset_split_image(Scheme scheme, int m, double beta, double nu) {
  if (m < 1) throw Error("gs3_preset_split_image: m must be positive");
  if (!(beta > 0.0)) throw Error("beta must be positive");
  double S[3][3];
  gs3_stencil(scheme, nu, beta, S);
  if (scheme == Scheme::Gs3Alg3) return split_alpha_blend(0.5);
  SplitChoice c = split_from_d(stencil_to_matrix(S, m));
  c.strategy = SplitStrategy::Preset;
  c.preset = scheme == Scheme::Gs3Alg1 ? PresetName::Alg1 : PresetName::Alg2;
  return c;
}

SplitChoice gs3_preset_split_dense(const ProblemInstance& p, Scheme scheme, double beta,
                                   double nu) {
  if (p.block_count() != 3) throw Error("gs3_preset_split_dense needs exactly three blocks");
  if (!(beta > 0.0)) throw Error("beta must be positive");
  if (scheme == Scheme::Gs3Alg3) return split_alpha_blend(0.5);
  require_nu(nu);
  const Matrix& B = p.blocks[1].A;
  const Matrix& C = p.blocks[2].A;
  const int ny = static_cast<int>(B.cols());
  const int nz = static_cast<int>(C.cols());
  const int m = p.m();
  // The block-diagonal factor in (y, z, lambda) coordinates; what was an
  // identity block in image coordinates becomes the matching Gram matrix.
  Matrix blockdiag = Matrix::Zero(ny + nz + m, ny + nz + m);
  blockdiag.block(0, 0, ny, ny) = nu * beta * B.transpose() * B;
  blockdiag.block(ny, ny, nz, nz) = nu * beta * C.transpose() * C;
  blockdiag.block(ny + nz, ny + nz, m, m) = (1.0 / beta) * Matrix::Identity(m, m);
  SplitChoice c = scheme == Scheme::Gs3Alg1 ? split_from_d(std::move(blockdiag))
                                            : split_from_g(std::move(blockdiag));
  c.strategy = SplitStrategy::Preset;
  c.preset = scheme == Scheme::Gs3Alg1 ? PresetName::Alg1 : PresetName::Alg2;
  return c;
}

Vector correct_gs3_structured(const Vector& images, const Vector& images_tilde, Scheme scheme,
                              double nu, double beta) {
  if (images.size() != images_tilde.size() || images.size() % 3 != 0 || images.size() == 0) {
    throw Error("correct_gs3_structured: expected stacked (B y, C z, lambda) coordinates");
  }
  if (!(beta > 0.0)) throw Error("beta must be positive");
  const int m = static_cast<int>(images.size()) / 3;

  double S[3][3];
  gs3_stencil(scheme, nu, beta, S);

  // r = D (eta~ - eta), blockwise through the stencil.
  Vector diff[3], r[3];
  for (int i = 0; i < 3; ++i) diff[i] = images_tilde.segment(i * m, m) - images.segment(i * m, m);
  for (int i = 0; i < 3; ++i) {
    r[i] = Vector::Zero(m);
    for (int j = 0; j < 3; ++j)
      if (S[i][j] != 0.0) r[i] += S[i][j] * diff[j];
  }

  // Back substitution through Q^T, which is upper triangular with blocks
  // (beta I, beta I, -I / 0, beta I, -I / 0, 0, I/beta).
  Vector step(3 * m);
  step.tail(m) = beta * r[2];
  step.segment(m, m) = (r[1] + step.tail(m)) / beta;
  step.head(m) = (r[0] + step.tail(m)) / beta - step.segment(m, m);

  return images + step;
}

Matrix multiblock_script_d(int p, int m, double nu, SweepOrder order) {
  if (p < 2 || m < 1) throw Error("multiblock_script_d: need p >= 2 and m >= 1");
  require_nu(nu);
  const int dim = (p + 1) * m;
  Matrix D = Matrix::Zero(dim, dim);
  if (order == SweepOrder::PD) {
    D.topLeftCorner(p * m, p * m) = nu * Matrix::Identity(p * m, p * m);
    D.bottomRightCorner(m, m).setIdentity();
    return D;
  }
  const Matrix E = build_E(p, m);
  D.topLeftCorner(p * m, p * m) =
      nu * Matrix::Identity(p * m, p * m) + E.transpose() * E;
  D.topRightCorner(p * m, m) = -E.transpose();
  D.bottomLeftCorner(m, p * m) = -E;
  D.bottomRightCorner(m, m).setIdentity();
  return D;
}

Matrix multiblock_m_closed_form(int p, int m, double nu, SweepOrder order) {
  if (p < 2 || m < 1) throw Error("multiblock_m_closed_form: need p >= 2 and m >= 1");
  require_nu(nu);
  const int dim = (p + 1) * m;
  const Matrix Linvt = build_L_inv_T(p, m);
  Matrix M = Matrix::Zero(dim, dim);
  M.topLeftCorner(p * m, p * m) = nu * Linvt;
  M.bottomRightCorner(m, m).setIdentity();
  if (order == SweepOrder::PD) {
    // E L^{-T} picks out the first block row, so the multiplier row is
    // -nu times the first block difference.
    M.block(p * m, 0, m, m) = -nu * Matrix::Identity(m, m);
  } else {
    M.block(p * m, 0, m, p * m) = -build_E(p, m);
  }
  return M;
}

Vector correct_multiblock(const Vector& xi, const Vector& xi_tilde, SweepOrder order, double nu,
                          int p, int m) {
  if (p < 2 || m < 1) throw Error("correct_multiblock: need p >= 2 and m >= 1");
  require_nu(nu);
  const int dim = (p + 1) * m;
  if (xi.size() != dim || xi_tilde.size() != dim) {
    throw Error("correct_multiblock: point has wrong dimension");
  }

  // v_next = v - M (v - v_tilde) with the closed-form M: the primal rows
  // apply nu L^{-T} (first differences), the multiplier row depends on
  // the sweep order.
  Vector next(dim);
  for (int i = 0; i < p; ++i) {
    const Vector di = xi.segment(i * m, m) - xi_tilde.segment(i * m, m);
    Vector step = di;
    if (i + 1 < p) step -= xi.segment((i + 1) * m, m) - xi_tilde.segment((i + 1) * m, m);
    next.segment(i * m, m) = xi.segment(i * m, m) - nu * step;
  }
  if (order == SweepOrder::PD) {
    const Vector d0 = xi.head(m) - xi_tilde.head(m);
    next.tail(m) = xi_tilde.tail(m) + nu * d0;
  } else {
    Vector acc = Vector::Zero(m);
    for (int i = 0; i < p; ++i) acc += xi.segment(i * m, m) - xi_tilde.segment(i * m, m);
    next.tail(m) = xi_tilde.tail(m) + acc;
  }
  return next;
}

}  // namespace pcsplit
