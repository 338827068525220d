#include "pcsplit/matrix_core.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace pcsplit {

SpdCertificate spd_check(const Matrix& S) {
  SpdCertificate cert;
  if (S.rows() != S.cols() || S.rows() == 0) {
    throw Error("spd_check requires a nonempty square matrix");
  }
  const double fro = S.norm();
  cert.symmetry_defect = fro > 0.0 ? (S - S.transpose()).norm() / fro : 0.0;

  const Matrix sym = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    throw Error("spd_check: eigenvalue iteration failed to converge");
  }
  cert.min_eig = eig.eigenvalues().minCoeff();
  // Spectral norm of the symmetrized part; for the near-symmetric inputs
  // this check sees it matches ||S||_2 to working precision.
  const double two_norm =
      std::max(std::abs(eig.eigenvalues().minCoeff()), std::abs(eig.eigenvalues().maxCoeff()));
  cert.is_spd = cert.symmetry_defect <= kSpdRelTol && two_norm > 0.0 &&
                cert.min_eig > kSpdRelTol * two_norm;
  return cert;
}

Matrix BlockLowerOnes::materialize() const {
  if (p < 1 || m < 1) throw Error("BlockLowerOnes: p and m must be positive");
  Matrix L = Matrix::Zero(p * m, p * m);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j <= i; ++j) {
      L.block(i * m, j * m, m, m).setIdentity();
    }
  }
  return L;
}

Matrix build_E(int p, int m) {
  if (p < 1 || m < 1) throw Error("build_E: p and m must be positive");
  Matrix E = Matrix::Zero(m, p * m);
  for (int j = 0; j < p; ++j) E.block(0, j * m, m, m).setIdentity();
  return E;
}

Matrix build_L_inv_T(int p, int m) {
  if (p < 1 || m < 1) throw Error("build_L_inv_T: p and m must be positive");
  Matrix U = Matrix::Zero(p * m, p * m);
  for (int i = 0; i < p; ++i) {
    U.block(i * m, i * m, m, m).setIdentity();
    if (i + 1 < p) U.block(i * m, (i + 1) * m, m, m) = -Matrix::Identity(m, m);
  }
  return U;
}

namespace {

Eigen::FullPivLU<Matrix> checked_lu(const Matrix& A) {
  if (A.rows() != A.cols() || A.rows() == 0) {
    throw Error("dense_solve requires a nonempty square matrix");
  }
  Eigen::FullPivLU<Matrix> lu(A);
  const Matrix& LU = lu.matrixLU();
  double min_pivot = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < LU.rows(); ++i) {
    min_pivot = std::min(min_pivot, std::abs(LU(i, i)));
  }
  const double cutoff = kPivotRelTol * A.norm();
  if (!(min_pivot > cutoff)) {
    std::ostringstream os;
    os << "dense_solve: matrix is numerically singular (smallest pivot " << min_pivot
       << ", cutoff " << cutoff << ")";
    throw Error(os.str());
  }
  return lu;
}

}  // namespace

Vector dense_solve(const Matrix& A, const Vector& rhs) {
  if (rhs.size() != A.rows()) throw Error("dense_solve: right-hand side has wrong length");
  return checked_lu(A).solve(rhs);
}

Matrix dense_solve(const Matrix& A, const Matrix& rhs) {
  if (rhs.rows() != A.rows()) throw Error("dense_solve: right-hand side has wrong row count");
  return checked_lu(A).solve(rhs);
}

Vector least_squares_recover(const Matrix& A, const Vector& y) {
  if (A.rows() == 0 || A.cols() == 0) throw Error("least_squares_recover: empty matrix");
  if (y.size() != A.rows()) throw Error("least_squares_recover: image has wrong length");
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(sv.size() - 1) <= kRankRelTol * sv(0)) {
    throw Error("least_squares_recover: matrix is rank deficient");
  }
  return svd.solve(y);
}

bool full_column_rank(const Matrix& A) {
  if (A.rows() == 0 || A.cols() == 0) return false;
  if (A.rows() < A.cols()) return false;
  Eigen::JacobiSVD<Matrix> svd(A);
  const auto& sv = svd.singularValues();
  return sv(0) > 0.0 && sv(sv.size() - 1) > kRankRelTol * sv(0);
}

}  // namespace pcsplit
