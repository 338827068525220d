#include "pcsplit/subproblem.hpp"

#include <cmath>

namespace pcsplit {

double orthogonal_column_scale(const Matrix& A) {
  const Matrix gram = A.transpose() * A;
  const double c = gram.trace() / static_cast<double>(gram.rows());
  if (!(c > 0.0)) return 0.0;
  const Matrix defect = gram - c * Matrix::Identity(gram.rows(), gram.cols());
  return defect.norm() <= kOrthoColTol * c ? c : 0.0;
}

SolvabilityClass classify_block(const BlockFunction& theta, const Matrix& A, const BlockSet& set) {
  if (theta.kind == BlockFunction::Kind::Quadratic) {
    // The quadratic normal equations are exact only on a free block; a
    // box would need an iterative active-set method, which this library
    // does not pretend to provide.
    return set.kind == BlockSet::Kind::Free ? SolvabilityClass::QuadraticExact
                                            : SolvabilityClass::Unsupported;
  }
  const bool separable = theta.kind == BlockFunction::Kind::L1 ||
                         theta.kind == BlockFunction::Kind::Zero ||
                         theta.kind == BlockFunction::Kind::BoxIndicator ||
                         set.kind == BlockSet::Kind::Box;
  if (!separable) return SolvabilityClass::Unsupported;
  return orthogonal_column_scale(A) > 0.0 ? SolvabilityClass::ProxExact
                                          : SolvabilityClass::Unsupported;
}

SolvabilityClass classify(const SubproblemSpec& spec) {
  return classify_block(spec.theta, spec.A, spec.set);
}

namespace {

Vector clamp(const Vector& x, const Vector& lo, const Vector& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

Vector soft_threshold(const Vector& x, double t) {
  Vector y(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (x(j) > t) {
      y(j) = x(j) - t;
    } else if (x(j) < -t) {
      y(j) = x(j) + t;
    } else {
      y(j) = 0.0;
    }
  }
  return y;
}

}  // namespace

Vector solve_subproblem(const SubproblemSpec& spec) {
  const int n = static_cast<int>(spec.A.cols());
  if (spec.linear.size() != n) throw Error("solve_subproblem: linear term has wrong length");
  if (spec.shift.size() != spec.A.rows()) {
    throw Error("solve_subproblem: shift has wrong length");
  }
  if (!(spec.beta > 0.0)) throw Error("solve_subproblem: beta must be positive");

  const SolvabilityClass cls = classify(spec);
  if (cls == SolvabilityClass::QuadraticExact) {
    const Matrix K = spec.theta.P + spec.beta * spec.A.transpose() * spec.A;
    const Vector rhs = -(spec.theta.q + spec.linear + spec.beta * spec.A.transpose() * spec.shift);
    return dense_solve(K, rhs);
  }
  if (cls != SolvabilityClass::ProxExact) {
    throw Error("solve_subproblem: no exact solver for this subproblem");
  }

  // With A^T A = c I the smooth part collapses to (beta c / 2) ||x - xhat||^2
  // plus a constant, so the minimizer is a proximal step at xhat.
  const double c = orthogonal_column_scale(spec.A);
  const double scale = spec.beta * c;
  const Vector xhat = -(spec.linear + spec.beta * spec.A.transpose() * spec.shift) / scale;

  Vector x = xhat;
  if (spec.theta.kind == BlockFunction::Kind::L1 && spec.theta.weight > 0.0) {
    x = soft_threshold(x, spec.theta.weight / scale);
  } else if (spec.theta.kind == BlockFunction::Kind::BoxIndicator) {
    x = clamp(x, spec.theta.lo, spec.theta.hi);
  }
  if (spec.set.kind == BlockSet::Kind::Box) {
    // Clamping after shrinkage is exact here: each coordinate objective is
    // convex in one variable, so its constrained minimizer is the projection
    // of the unconstrained one onto the interval.
    x = clamp(x, spec.set.lo, spec.set.hi);
  }
  return x;
}

LambdaCone lambda_cone(ConstraintSense sense) {
  return sense == ConstraintSense::Equality ? LambdaCone::Full : LambdaCone::NonNegative;
}

Vector project_lambda(const Vector& lambda, LambdaCone cone) {
  if (cone == LambdaCone::Full) return lambda;
  return lambda.cwiseMax(0.0);
}

}  // namespace pcsplit
