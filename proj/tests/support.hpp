#pragma once

// Shared helpers for the test binaries: fixture paths, deterministic
// random instances, and a brute-force eigenvalue oracle that does not go
// through the library's own SPD machinery.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pcsplit/problem.hpp"

namespace testsupport {

using pcsplit::Matrix;
using pcsplit::Vector;

inline std::string fixture(const std::string& name) {
  return std::string(PCSPLIT_FIXTURE_DIR) + "/" + name;
}

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double unif(std::mt19937_64& g, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(g);
}

inline int unif_int(std::mt19937_64& g, int lo, int hi) {
  std::uniform_int_distribution<int> d(lo, hi);
  return d(g);
}

inline Matrix random_matrix(std::mt19937_64& g, int rows, int cols, double lo = -1.0,
                            double hi = 1.0) {
  Matrix A(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) A(i, j) = unif(g, lo, hi);
  return A;
}

inline Vector random_vector(std::mt19937_64& g, int n, double lo = -1.0, double hi = 1.0) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = unif(g, lo, hi);
  return v;
}

// Tall matrix with orthonormal columns: thin Q factor of a random matrix.
inline Matrix random_orthonormal(std::mt19937_64& g, int rows, int cols) {
  Matrix A = random_matrix(g, rows, cols);
  Eigen::HouseholderQR<Matrix> qr(A);
  Matrix Q = qr.householderQ() * Matrix::Identity(rows, cols);
  return Q;
}

// Full-column-rank matrix with singular values well away from zero:
// orthonormal columns rescaled by factors in [0.5, 1.5], then mixed by a
// random rotation on the right.
inline Matrix random_full_rank(std::mt19937_64& g, int rows, int cols) {
  Matrix Q = random_orthonormal(g, rows, cols);
  for (int j = 0; j < cols; ++j) Q.col(j) *= unif(g, 0.5, 1.5);
  Matrix R = random_orthonormal(g, cols, cols);
  return Q * R.transpose();
}

// Random symmetric positive definite matrix: V diag(d) V^T with
// eigenvalues in [0.5, 2].
inline Matrix random_spd(std::mt19937_64& g, int n) {
  Matrix V = random_orthonormal(g, n, n);
  Vector d = random_vector(g, n, 0.5, 2.0);
  return V * d.asDiagonal() * V.transpose();
}

// minimize 1/2 x^2 + 1/2 y^2  subject to  x + y = 1; solution (1/2, 1/2),
// multiplier 1/2.
inline pcsplit::ProblemInstance make_qp2() {
  pcsplit::ProblemInstance p;
  p.rhs = Vector::Constant(1, 1.0);
  for (int i = 0; i < 2; ++i) {
    pcsplit::Block blk;
    blk.theta = pcsplit::BlockFunction::quadratic(Matrix::Identity(1, 1), Vector::Zero(1));
    blk.A = Matrix::Identity(1, 1);
    p.blocks.push_back(blk);
  }
  return p;
}

// minimize 1/2 (x^2 + y^2 + z^2)  subject to  x + y + z = 3; solution
// (1, 1, 1), multiplier 1.
inline pcsplit::ProblemInstance make_qp3() {
  pcsplit::ProblemInstance p;
  p.rhs = Vector::Constant(1, 3.0);
  for (int i = 0; i < 3; ++i) {
    pcsplit::Block blk;
    blk.theta = pcsplit::BlockFunction::quadratic(Matrix::Identity(1, 1), Vector::Zero(1));
    blk.A = Matrix::Identity(1, 1);
    p.blocks.push_back(blk);
  }
  return p;
}

// Random strictly convex quadratic program with p blocks coupled through
// m rows.  Block widths are drawn in [1, min(max_width, m)] so every
// coupling matrix can have full column rank.
inline pcsplit::ProblemInstance random_qp(std::mt19937_64& g, int p, int m, bool orthonormal,
                                          int max_width = 4) {
  pcsplit::ProblemInstance prob;
  prob.rhs = random_vector(g, m);
  for (int i = 0; i < p; ++i) {
    const int ni = unif_int(g, 1, std::min(max_width, m));
    pcsplit::Block blk;
    blk.theta = pcsplit::BlockFunction::quadratic(random_spd(g, ni), random_vector(g, ni));
    blk.A = orthonormal ? random_orthonormal(g, m, ni) : random_full_rank(g, m, ni);
    prob.blocks.push_back(blk);
  }
  return prob;
}

// Eigenvalues of a symmetric 2x2 or 3x3 matrix straight from the
// characteristic polynomial, sorted ascending.  Independent of Eigen's
// iterative eigensolver: the 2x2 case is the quadratic formula, the 3x3
// case the trigonometric solution of the depressed cubic.
inline std::vector<double> charpoly_eigs(const Matrix& S) {
  if (S.rows() == 2) {
    const double a = S(0, 0), b = S(0, 1), c = S(1, 1);
    const double mid = 0.5 * (a + c);
    const double rad = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
    return {mid - rad, mid + rad};
  }
  const double q = S.trace() / 3.0;
  const Matrix B = S - q * Matrix::Identity(3, 3);
  const double p2 = (B * B).trace() / 6.0;
  if (p2 <= 0.0) return {q, q, q};
  const double pp = std::sqrt(p2);
  double r = B.determinant() / (2.0 * pp * pp * pp);
  r = std::max(-1.0, std::min(1.0, r));
  const double phi = std::acos(r) / 3.0;
  std::vector<double> eigs = {q + 2.0 * pp * std::cos(phi + 2.0 * M_PI / 3.0),
                              q + 2.0 * pp * std::cos(phi + 4.0 * M_PI / 3.0),
                              q + 2.0 * pp * std::cos(phi)};
  std::sort(eigs.begin(), eigs.end());
  return eigs;
}

}  // namespace testsupport
