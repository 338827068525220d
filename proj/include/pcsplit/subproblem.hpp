#pragma once

#include "pcsplit/problem.hpp"

namespace pcsplit {

// One augmented block subproblem, always of the shape
//   minimize_x  theta(x) + linear^T x + (beta/2) ||A x + shift||^2
//   subject to  x in set.
// Every predictor reduces its per-block work to this form.
struct SubproblemSpec {
  BlockFunction theta;
  Matrix A;
  double beta = 1.0;
  Vector linear;
  Vector shift;
  BlockSet set;
};

// Exact solvability:
//   QuadraticExact  quadratic theta on a free block, any A: a linear solve
//   ProxExact       separable theta (l1, zero, box indicator) or a box set,
//                   with A^T A = c I for some c > 0: shrinkage/projection
//   Unsupported     everything else (notably quadratic theta on a box)
SolvabilityClass classify_block(const BlockFunction& theta, const Matrix& A, const BlockSet& set);
SolvabilityClass classify(const SubproblemSpec& spec);

// Returns c > 0 with A^T A = c I within kOrthoColTol, or 0 when A has no
// such structure.
double orthogonal_column_scale(const Matrix& A);

// Exact minimizer of the subproblem; throws on Unsupported shapes and
// singular quadratic systems.
Vector solve_subproblem(const SubproblemSpec& spec);

enum class LambdaCone { Full, NonNegative };

LambdaCone lambda_cone(ConstraintSense sense);
Vector project_lambda(const Vector& lambda, LambdaCone cone);

}  // namespace pcsplit
