#pragma once

#include <vector>

#include "pcsplit/problem.hpp"
#include "pcsplit/subproblem.hpp"

namespace pcsplit {

// Sweep direction of the multi-block predictor: update the primal blocks
// first and the multiplier last (PD), or the multiplier first (DP).
enum class SweepOrder { PD, DP };

// Iterate carried between outer iterations.  Only some block variables
// are materialized: schemes that correct image coordinates keep A_i x_i
// without an x_i that realizes it.  Whenever x_blocks[i] is nonempty,
// cached_images[i] equals blocks[i].A * x_blocks[i] to round-off.
struct IterateState {
  Scheme scheme_tag = Scheme::MultiPD;
  std::vector<Vector> x_blocks;
  std::vector<Vector> cached_images;
  Vector lambda;
};

IterateState initial_state(const ProblemInstance& p, Scheme scheme);

// One predictor sweep.  v_tilde_coords holds the predicted point in the
// coordinates the corrector works in: (y, lambda) for the two-block
// scheme, the constraint-space images (B y, C z, lambda) for the
// three-block scheme, and the scaled coordinates
// (sqrt(beta) A_1 x_1, ..., sqrt(beta) A_p x_p, lambda / sqrt(beta))
// for the multi-block sweeps.
struct PredictionOutput {
  std::vector<Vector> x_tilde;
  std::vector<Vector> images_tilde;
  Vector lambda_tilde;
  Vector v_tilde_coords;
  Vector lambda_half;  // two-block scheme only: the mid-sweep multiplier
};

// Prediction-step matrix in the corrector's coordinates plus, for the
// multi-block sweeps, the scaling map P with Q = P^T script_Q P.
struct PredictionMatrix {
  Matrix Q;
  Matrix P;
  Matrix script_Q;
  Scheme structure = Scheme::MultiPD;
};

// Two-block alternating sweep with a symmetric pair of multiplier
// updates, damped by mu in (0,1).
PredictionOutput predict_scprsm(const IterateState& state, const ProblemInstance& p, double beta,
                                double mu);

struct ScprsmMatrices {
  Matrix Q, M, H, G;
};

// Closed forms of the two-block transfer matrices in (y, lambda)
// coordinates.  Any mu is accepted so that boundary values can be probed;
// the predictor itself insists on mu in (0,1).
ScprsmMatrices scprsm_matrices(const ProblemInstance& p, double beta, double mu);

// Three-block Gauss-Seidel sweep; the multiplier step uses the images of
// the previous iterate, so all three block solves need nothing newer than
// (B y^k, C z^k, lambda^k).
PredictionOutput predict_gs3(const IterateState& state, const ProblemInstance& p, double beta);

// Prediction matrix of the three-block sweep in image coordinates
// (dimension 3m) and in (y, z, lambda) coordinates.
Matrix gs3_q_image(int m, double beta);
Matrix gs3_q_dense(const ProblemInstance& p, double beta);

// p-block Gauss-Seidel sweep in either order.
PredictionOutput predict_multiblock(const IterateState& state, const ProblemInstance& p,
                                    double beta, SweepOrder order);

// Prediction matrix of the multi-block sweep: Q in (x, lambda)
// coordinates, script_Q in the scaled coordinates, P the map between
// them.
PredictionMatrix q_multiblock(const ProblemInstance& p, double beta, SweepOrder order);
// Scaled-coordinate prediction matrix alone, independent of the instance.
Matrix multiblock_script_q(int p, int m, SweepOrder order);

// Pack (images, lambda) into the scaled multi-block coordinates.
Vector multiblock_pack(const std::vector<Vector>& images, const Vector& lambda, double beta);

}  // namespace pcsplit
