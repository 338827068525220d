#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace pcsplit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Every recoverable failure in the library is reported through this type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numeric policy, shared by every module.  These are deliberate choices,
// not knobs: tests pin behaviour against them.
inline constexpr double kSpdRelTol = 1e-10;    // eigenvalue and symmetry cutoff for SPD verdicts
inline constexpr double kResidualRelTol = 1e-10;  // relative factor-product residual in certificates
inline constexpr double kRankRelTol = 1e-8;    // full-column-rank cutoff on singular values
inline constexpr double kPivotRelTol = 1e-12;  // smallest acceptable pivot in dense solves
inline constexpr double kOrthoColTol = 1e-10;  // tolerance for detecting A^T A = c I
inline constexpr double kActiveTol = 1e-8;     // activation threshold in optimality residuals

// Outcome of an SPD probe.  The verdict is scale relative: a matrix passes
// when its symmetry defect ||S - S^T||_F / ||S||_F stays below kSpdRelTol
// and the smallest eigenvalue of the symmetrized part exceeds
// kSpdRelTol * ||S||_2.  The zero matrix fails.
struct SpdCertificate {
  bool is_spd = false;
  double min_eig = 0.0;
  double symmetry_defect = 0.0;
};

SpdCertificate spd_check(const Matrix& S);

// Block lower triangle of p x p identity blocks, each m x m.  Written L
// below; its companion E = [I I ... I] stacks p identities in a row.
// Both show up whenever a sweep over blocks is expressed in matrix form.
struct BlockLowerOnes {
  int p = 1;
  int m = 1;
  Matrix materialize() const;
};

Matrix build_E(int p, int m);
// Inverse transpose of BlockLowerOnes: upper bidiagonal with +I on the
// diagonal and -I on the first superdiagonal.
Matrix build_L_inv_T(int p, int m);

// Solve A x = rhs by full-pivot LU.  Throws when the smallest pivot falls
// below kPivotRelTol * ||A||_F; the message reports that pivot.
Vector dense_solve(const Matrix& A, const Vector& rhs);
// Same factorization applied to a block of right-hand sides.
Matrix dense_solve(const Matrix& A, const Matrix& rhs);

// Minimum-norm recovery of x from y ~ A x for a tall full-column-rank A.
// Throws when A is rank deficient at the kRankRelTol cutoff.
Vector least_squares_recover(const Matrix& A, const Vector& y);

bool full_column_rank(const Matrix& A);

}  // namespace pcsplit
