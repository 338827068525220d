#pragma once

#include "pcsplit/problem.hpp"

namespace pcsplit {

// Convergence conditions for a corrected splitting step: with
// H = Q M^{-1} the requirements are H M = Q exactly, H symmetric positive
// definite, and G = Q^T + Q - M^T H M symmetric positive definite.  The
// certificate records scale-relative evidence for each piece.
struct ConvergenceCertificate {
  double hm_residual = 0.0;  // ||H M - Q||_F / ||Q||_F
  SpdCertificate h_cert;
  SpdCertificate g_cert;
  SpdCertificate qtq_cert;  // Q^T + Q, the sum the split distributes
  bool ok = false;
};

ConvergenceCertificate certify(const Matrix& Q, const Matrix& M, const Matrix& H,
                               const Matrix& G);

// One monitored step of the contraction inequality
//   ||v_next - v*||_H^2 <= ||v - v*||_H^2 - ||v - v_tilde||_G^2.
// slack is the left-over margin; a negative slack beyond round-off marks
// a violation.
struct ContractionRecord {
  long k = 0;
  double dist_sq_H = 0.0;
  double dist_sq_H_next = 0.0;
  double progress_sq_G = 0.0;
  double slack = 0.0;
  bool violation = false;
};

struct CorrectionPlan;

ContractionRecord monitor_step(const CorrectionPlan& plan, const Vector& v, const Vector& v_next,
                               const Vector& v_tilde, const Vector& v_star, long k);

// Independent reference solution, for monitoring and comparisons.  Three
// strategies, tried in order: a direct solve of the stationarity system
// when every block is smooth and free under an equality constraint, an
// active-set enumeration for tiny instances, and a long certified run.
// Fails loudly when none reaches quality 1e-10.
struct OracleSolution {
  std::vector<Vector> x_blocks;
  Vector lambda;
  KktResidual quality;
  std::string strategy;
};

OracleSolution reference_solution(const ProblemInstance& p);

}  // namespace pcsplit
