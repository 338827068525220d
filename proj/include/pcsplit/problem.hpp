#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pcsplit/matrix_core.hpp"

namespace pcsplit {

// Separable objective terms.  Each block function theta_i acts on its own
// variable x_i and must stay closed, proper and convex:
//   Quadratic     0.5 x^T P x + q^T x with P symmetric positive semidefinite
//   L1            weight * ||x||_1 with weight >= 0
//   Zero          identically zero
//   BoxIndicator  0 on [lo, hi], +inf outside
struct BlockFunction {
  enum class Kind { Quadratic, L1, Zero, BoxIndicator };

  Kind kind = Kind::Zero;
  Matrix P;       // Quadratic
  Vector q;       // Quadratic
  double weight = 0.0;  // L1
  Vector lo, hi;  // BoxIndicator

  static BlockFunction quadratic(Matrix P, Vector q);
  static BlockFunction l1(double weight);
  static BlockFunction zero();
  static BlockFunction box_indicator(Vector lo, Vector hi);
};

// Feasible set for one block variable, on top of the objective term.
struct BlockSet {
  enum class Kind { Free, Box };
  Kind kind = Kind::Free;
  Vector lo, hi;  // Box only
};

enum class ConstraintSense { Equality, Inequality };  // A x = b, or A x >= b

struct Block {
  BlockFunction theta;
  Matrix A;  // m x n_i coupling matrix
  BlockSet set;
};

// Linearly constrained separable convex program:
//   minimize  sum_i theta_i(x_i)
//   subject   sum_i A_i x_i = b  (or >= b),  x_i in X_i.
struct ProblemInstance {
  std::vector<Block> blocks;
  Vector rhs;
  ConstraintSense sense = ConstraintSense::Equality;

  int m() const { return static_cast<int>(rhs.size()); }
  int block_count() const { return static_cast<int>(blocks.size()); }
  int block_dim(int i) const { return static_cast<int>(blocks[i].A.cols()); }
  int total_dim() const;
  // Offset of block i inside the stacked primal vector.
  int block_offset(int i) const;

  // Dimensional sanity; throws on malformed instances.
  void check_invariants() const;
};

double evaluate_theta(const BlockFunction& theta, const Vector& x);

// Splitting schemes.  The first six are the built-in update rules; the
// last runs the generic corrected sweep with a user-chosen blend split.
enum class Scheme {
  ScPrsm,
  Gs3Alg1,
  Gs3Alg2,
  Gs3Alg3,
  MultiPD,
  MultiDP,
  CustomSplit,
};

std::string scheme_name(Scheme s);
std::optional<Scheme> scheme_from_name(const std::string& name);

// How solvable one block subproblem is; see subproblem.hpp for the exact
// classification rule.
enum class SolvabilityClass { QuadraticExact, ProxExact, Unsupported };

// What a scheme needs from the instance before it may run.
struct PredictorRequirements {
  Scheme scheme = Scheme::MultiPD;
  int min_blocks = 2;
  int max_blocks = -1;          // -1: unbounded
  bool all_blocks_full_rank = true;
  bool equality_only = true;
};

PredictorRequirements requirements_for(Scheme s);

struct ValidationReport {
  bool ok = true;
  std::vector<bool> block_rank_ok;
  std::vector<SolvabilityClass> block_class;
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
};

ValidationReport validate_problem(const ProblemInstance& p, const PredictorRequirements& req);

// Variational reformulation.  With w = (x_1, ..., x_p, lambda) the
// monotone operator is
//   F(w) = (-A_1^T lambda, ..., -A_p^T lambda, sum_i A_i x_i - b),
// affine with a skew-symmetric linear part, and lambda ranges over the
// whole space (equality) or the nonnegative orthant (inequality).
struct ViDescription {
  ProblemInstance problem;
  int dim() const { return problem.total_dim() + problem.m(); }
};

ViDescription vi_description(const ProblemInstance& p);
Vector evaluate_F(const ViDescription& vi, const Vector& w);

// First-order optimality residuals at a stacked point w = (x, lambda).
// primal measures constraint violation, dual the distance of zero from
// the subdifferential of the Lagrangian in x, comp the complementarity
// defect (zero identically for equality constraints).
struct KktResidual {
  double primal = 0.0;
  double dual = 0.0;
  double comp = 0.0;
  double total() const { return std::max(primal, std::max(dual, comp)); }
};

KktResidual kkt_residual(const ProblemInstance& p, const std::vector<Vector>& x_blocks,
                         const Vector& lambda);
// Same, on a stacked point w = (x_1, ..., x_p, lambda).
KktResidual kkt_residual(const ProblemInstance& p, const Vector& w);

}  // namespace pcsplit
