#pragma once

#include "pcsplit/certifier.hpp"
#include "pcsplit/predictors.hpp"

namespace pcsplit {

// How to split Q^T + Q = D + G into the correction weight D and the
// progress weight G.
enum class SplitStrategy { FromD, FromG, AlphaBlend, Preset };

enum class PresetName { Alg1, Alg2, Alg3, MultiPD, MultiDP };

struct SplitChoice {
  SplitStrategy strategy = SplitStrategy::AlphaBlend;
  Matrix part;         // D for FromD, G for FromG
  double alpha = 0.5;  // AlphaBlend: D = alpha (Q^T + Q)
  PresetName preset = PresetName::Alg1;  // informational, set by preset builders
};

SplitChoice split_from_d(Matrix D);
SplitChoice split_from_g(Matrix G);
SplitChoice split_alpha_blend(double alpha);

// Strict mode throws when a factor fails its SPD probe; permissive mode
// finishes the plan anyway and lets the certificate carry the verdict, so
// rejected configurations can still be inspected.
enum class PlanMode { Strict, Permissive };

// Split Q^T + Q according to the choice; returns (D, G).
std::pair<Matrix, Matrix> split(const Matrix& Q, const SplitChoice& choice, PlanMode mode);

// A fully assembled correction step: v_next = v - M (v - v_tilde) with
// M = Q^{-T} D, plus the distance weight H = Q D^{-1} Q^T and the
// certificate tying them together.
struct CorrectionPlan {
  Matrix Q;
  Matrix D;
  Matrix G;
  Matrix Delta;  // the matrix applied to (v_tilde - v) before back substitution
  Matrix M;
  Matrix H;
  ConvergenceCertificate certificate;
};

CorrectionPlan build_plan(const Matrix& Q, const SplitChoice& choice,
                          PlanMode mode = PlanMode::Strict);

// Generic corrector: solves Q^T (v_next - v) = D (v_tilde - v).
Vector correct_dense(const CorrectionPlan& plan, const Vector& v, const Vector& v_tilde);

// Built-in splits of the three-block scheme in image coordinates
// (dimension 3m).  Alg1 keeps a block-diagonal D, Alg2 keeps a
// block-diagonal G, Alg3 blends with alpha = 1/2; nu must lie in (0,1)
// for the first two and is ignored by the third.
SplitChoice gs3_preset_split_image(Scheme scheme, int m, double beta, double nu);
// The same splits expressed in (y, z, lambda) coordinates.
SplitChoice gs3_preset_split_dense(const ProblemInstance& p, Scheme scheme, double beta,
                                   double nu);

// Three-block corrector that never materializes a 3m x 3m factorization:
// applies D blockwise, then back-substitutes through the triangular Q.
Vector correct_gs3_structured(const Vector& images, const Vector& images_tilde, Scheme scheme,
                              double nu, double beta);

// Built-in D of the multi-block sweeps in scaled coordinates, and the
// matching plan pieces.
Matrix multiblock_script_d(int p, int m, double nu, SweepOrder order);
// Closed form of M = script_Q^{-T} script_D, assembled from identity
// blocks; used to cross-check the generic solve.
Matrix multiblock_m_closed_form(int p, int m, double nu, SweepOrder order);

// Multi-block corrector in scaled coordinates, all block operations.
Vector correct_multiblock(const Vector& xi, const Vector& xi_tilde, SweepOrder order, double nu,
                          int p, int m);

}  // namespace pcsplit
