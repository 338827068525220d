#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "pcsplit/certifier.hpp"
#include "pcsplit/predictors.hpp"
#include "support.hpp"

using namespace pcsplit;
using namespace testsupport;

namespace {

IterateState make_state(const ProblemInstance& p, Scheme tag, const std::vector<Vector>& xs,
                        const Vector& lambda) {
  IterateState st;
  st.scheme_tag = tag;
  st.x_blocks = xs;
  st.cached_images.resize(p.block_count());
  for (int i = 0; i < p.block_count(); ++i) st.cached_images[i] = p.blocks[i].A * xs[i];
  st.lambda = lambda;
  return st;
}

double theta_sum(const ProblemInstance& p, const std::vector<Vector>& xs) {
  double total = 0.0;
  for (int i = 0; i < p.block_count(); ++i) total += evaluate_theta(p.blocks[i].theta, xs[i]);
  return total;
}

// Corrected-subvector coordinates of an arbitrary feasible point, by
// scheme.  These must match PredictionOutput::v_tilde_coords, so the
// three-block scheme uses constraint-space images, not block variables.
Vector coords_of(const ProblemInstance& p, Scheme scheme, double beta,
                 const std::vector<Vector>& xs, const Vector& lambda) {
  if (scheme == Scheme::ScPrsm) {
    Vector v(xs[1].size() + lambda.size());
    v << xs[1], lambda;
    return v;
  }
  if (scheme == Scheme::Gs3Alg1) {
    Vector v(3 * p.m());
    v << p.blocks[1].A * xs[1], p.blocks[2].A * xs[2], lambda;
    return v;
  }
  std::vector<Vector> images(p.block_count());
  for (int i = 0; i < p.block_count(); ++i) images[i] = p.blocks[i].A * xs[i];
  return multiblock_pack(images, lambda, beta);
}

// Random probe point in Omega with the multiplier kept inside its cone.
void random_probe(std::mt19937_64& g, const ProblemInstance& p,
                  const PredictionOutput& pred, std::vector<Vector>* xs, Vector* lambda) {
  xs->resize(p.block_count());
  for (int i = 0; i < p.block_count(); ++i) {
    Vector x = pred.x_tilde[i] + random_vector(g, p.block_dim(i), -0.5, 0.5);
    const Block& blk = p.blocks[i];
    if (blk.theta.kind == BlockFunction::Kind::BoxIndicator) {
      x = x.cwiseMax(blk.theta.lo).cwiseMin(blk.theta.hi);
    }
    if (blk.set.kind == BlockSet::Kind::Box) {
      x = x.cwiseMax(blk.set.lo).cwiseMin(blk.set.hi);
    }
    (*xs)[i] = x;
  }
  *lambda = pred.lambda_tilde + random_vector(g, p.m(), -0.5, 0.5);
  if (p.sense == ConstraintSense::Inequality) *lambda = lambda->cwiseMax(0.0);
}

// The defining certificate of a prediction: against every feasible probe,
//   theta(u) - theta(u~) + (w - w~)^T F(w~) >= (v - v~)^T Q (v^k - v~),
// up to round-off.
void check_prediction_vi(std::mt19937_64& g, const ProblemInstance& p, Scheme scheme,
                         double beta, const IterateState& state, const PredictionOutput& pred,
                         const Matrix& Q, int probes = 200) {
  const auto vi = vi_description(p);
  Vector w_tilde(vi.dim());
  for (int i = 0; i < p.block_count(); ++i) {
    w_tilde.segment(p.block_offset(i), p.block_dim(i)) = pred.x_tilde[i];
  }
  w_tilde.tail(p.m()) = pred.lambda_tilde;
  const Vector F_tilde = evaluate_F(vi, w_tilde);
  const double theta_tilde = theta_sum(p, pred.x_tilde);

  const Vector v_k = coords_of(p, scheme, beta, state.x_blocks, state.lambda);
  const Vector v_tilde = pred.v_tilde_coords;
  const Vector rhs_vec = Q * (v_k - v_tilde);

  for (int t = 0; t < probes; ++t) {
    std::vector<Vector> xs;
    Vector lambda;
    random_probe(g, p, pred, &xs, &lambda);
    Vector w(vi.dim());
    for (int i = 0; i < p.block_count(); ++i) {
      w.segment(p.block_offset(i), p.block_dim(i)) = xs[i];
    }
    w.tail(p.m()) = lambda;
    const Vector v = coords_of(p, scheme, beta, xs, lambda);
    const double lhs =
        theta_sum(p, xs) - theta_tilde + (w - w_tilde).dot(F_tilde) - (v - v_tilde).dot(rhs_vec);
    INFO("scheme ", scheme_name(scheme), ", probe ", t);
    CHECK(lhs >= -1e-8);
  }
}

}  // namespace

TEST_CASE("two-block prediction sweep on the scalar fixture") {
  const auto p = make_qp2();
  const auto st = initial_state(p, Scheme::ScPrsm);
  const auto out = predict_scprsm(st, p, 1.0, 0.5);
  CHECK(out.x_tilde[0](0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(out.lambda_half(0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(out.x_tilde[1](0) == doctest::Approx(0.375).epsilon(1e-14));
  CHECK(out.lambda_tilde(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(out.v_tilde_coords.size() == 2);
  CHECK(out.v_tilde_coords(0) == doctest::Approx(0.375).epsilon(1e-14));
  CHECK(out.v_tilde_coords(1) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("two-block prediction is stationary at the solution") {
  const auto p = make_qp2();
  const Vector half = Vector::Constant(1, 0.5);
  const auto st = make_state(p, Scheme::ScPrsm, {half, half}, half);
  const auto out = predict_scprsm(st, p, 1.0, 0.5);
  CHECK(std::abs(out.x_tilde[0](0) - 0.5) <= 1e-9);
  CHECK(std::abs(out.x_tilde[1](0) - 0.5) <= 1e-9);
  CHECK(std::abs(out.lambda_tilde(0) - 0.5) <= 1e-9);
  const Vector v_k = coords_of(p, Scheme::ScPrsm, 1.0, st.x_blocks, st.lambda);
  CHECK((v_k - out.v_tilde_coords).norm() <= 1e-9);
}

TEST_CASE("two-block prediction rejects boundary damping") {
  const auto p = make_qp2();
  const auto st = initial_state(p, Scheme::ScPrsm);
  CHECK_THROWS_WITH_AS(predict_scprsm(st, p, 1.0, 1.0), doctest::Contains("(0,1)"), Error);
  CHECK_THROWS_AS(predict_scprsm(st, p, 1.0, 0.0), Error);
  CHECK_THROWS_AS(predict_scprsm(st, p, 0.0, 0.5), Error);
}

TEST_CASE("two-block transfer matrices in the scalar case") {
  const auto mats = scprsm_matrices(make_qp2(), 1.0, 0.5);
  Matrix Q(2, 2), M(2, 2), H(2, 2), G(2, 2);
  Q << 1.0, -0.5, -1.0, 1.0;
  M << 1.0, 0.0, -0.5, 1.0;
  H << 0.75, -0.5, -0.5, 1.0;
  G << 0.5, -0.5, -0.5, 1.0;
  CHECK((mats.Q - Q).norm() <= 1e-14);
  CHECK((mats.M - M).norm() <= 1e-14);
  CHECK((mats.H - H).norm() <= 1e-14);
  CHECK((mats.G - G).norm() <= 1e-14);
  CHECK((mats.H * mats.M - mats.Q).norm() <= 1e-12);
}

TEST_CASE("two-block transfer identities hold for random instances") {
  auto g = rng(51);
  for (int trial = 0; trial < 10; ++trial) {
    ProblemInstance p;
    const int m = unif_int(g, 2, 5);
    p.rhs = random_vector(g, m);
    for (int i = 0; i < 2; ++i) {
      Block blk;
      const int ni = unif_int(g, 1, m);
      blk.theta = BlockFunction::quadratic(random_spd(g, ni), random_vector(g, ni));
      blk.A = random_orthonormal(g, m, ni);
      p.blocks.push_back(blk);
    }
    const double beta = 2.0, mu = 0.3;
    const auto mats = scprsm_matrices(p, beta, mu);
    CHECK((mats.H * mats.M - mats.Q).norm() <= 1e-12 * std::max(1.0, mats.Q.norm()));
    CHECK(spd_check(mats.H).is_spd);
    CHECK(spd_check(mats.G).is_spd);
    CHECK(spd_check(Matrix(mats.Q.transpose() + mats.Q)).is_spd);
  }
}

TEST_CASE("the two-block progress weight vanishes linearly as damping grows") {
  const auto p = make_qp2();
  const auto base = scprsm_matrices(p, 1.0, 0.5);
  const double base_min = spd_check(base.G).min_eig;
  // G carries an exact (1 - mu) factor, so its smallest eigenvalue at
  // mu = 1 - 1e-9 is 2e-9 times the one at mu = 1/2, and at mu = 1 the
  // matrix is identically zero and fails the SPD probe outright.
  const auto near_one = scprsm_matrices(p, 1.0, 1.0 - 1e-9);
  CHECK(spd_check(near_one.G).min_eig ==
        doctest::Approx(2e-9 * base_min).epsilon(1e-6));
  const auto at_one = scprsm_matrices(p, 1.0, 1.0);
  CHECK_FALSE(spd_check(at_one.G).is_spd);
  CHECK(spd_check(at_one.G).min_eig <= 1e-10);
}

TEST_CASE("three-block prediction sweep on the scalar fixture") {
  const auto p = make_qp3();
  const auto st = initial_state(p, Scheme::Gs3Alg1);
  const auto out = predict_gs3(st, p, 1.0);
  CHECK(out.x_tilde[0](0) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(out.x_tilde[1](0) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(out.x_tilde[2](0) == doctest::Approx(0.375).epsilon(1e-14));
  // The multiplier step prices the OLD second and third images.
  CHECK(out.lambda_tilde(0) == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("three-block prediction is stationary at the solution") {
  const auto p = make_qp3();
  const Vector one = Vector::Constant(1, 1.0);
  const auto st = make_state(p, Scheme::Gs3Alg1, {one, one, one}, one);
  const auto out = predict_gs3(st, p, 1.0);
  const Vector v_k = coords_of(p, Scheme::Gs3Alg1, 1.0, st.x_blocks, st.lambda);
  Vector v_tilde(3);
  v_tilde << out.x_tilde[1], out.x_tilde[2], out.lambda_tilde;
  CHECK((v_k - v_tilde).norm() <= 1e-9);
}

TEST_CASE("three-block prediction matrix in image and variable coordinates") {
  Matrix expected(3, 3);
  expected << 1, 0, 0, 1, 1, 0, -1, -1, 1;
  CHECK((gs3_q_image(1, 1.0) - expected).norm() <= 1e-14);
  // With scalar identity couplings the two coordinate systems coincide.
  CHECK((gs3_q_dense(make_qp3(), 1.0) - expected).norm() <= 1e-14);

  const Matrix Q2 = gs3_q_image(2, 0.5);
  CHECK(Q2.rows() == 6);
  CHECK(Q2(0, 0) == doctest::Approx(0.5));
  CHECK(Q2(4, 4) == doctest::Approx(2.0));
  CHECK(spd_check(Matrix(Q2.transpose() + Q2)).is_spd);
}

TEST_CASE("multi-block sweeps on the scalar fixture") {
  const auto p = make_qp3();
  auto st = initial_state(p, Scheme::MultiPD);
  st.lambda = Vector::Constant(1, 1.0);

  const auto pd = predict_multiblock(st, p, 1.0, SweepOrder::PD);
  CHECK(pd.x_tilde[0](0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(pd.x_tilde[1](0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(pd.x_tilde[2](0) == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(pd.lambda_tilde(0) == doctest::Approx(25.0 / 8.0).epsilon(1e-14));

  const auto dp = predict_multiblock(st, p, 1.0, SweepOrder::DP);
  CHECK(dp.lambda_tilde(0) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(dp.x_tilde[0](0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(dp.x_tilde[1](0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(dp.x_tilde[2](0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("multiplier-first sweep projects onto the nonnegative cone") {
  ProblemInstance p;
  p.rhs = Vector::Constant(1, -2.0);
  p.sense = ConstraintSense::Inequality;
  for (int i = 0; i < 2; ++i) {
    Block blk;
    blk.theta = BlockFunction::quadratic(Matrix::Identity(1, 1), Vector::Zero(1));
    blk.A = Matrix::Identity(1, 1);
    p.blocks.push_back(blk);
  }
  const auto st = initial_state(p, Scheme::MultiDP);
  // lambda - beta (sum of images + 2) = -2, so the projection clips to 0.
  const auto out = predict_multiblock(st, p, 1.0, SweepOrder::DP);
  CHECK(out.lambda_tilde(0) == 0.0);
  // The primal-first order refuses inequality senses outright.
  CHECK_THROWS_WITH_AS(predict_multiblock(st, p, 1.0, SweepOrder::PD),
                       doctest::Contains("multi-dp"), Error);
}

TEST_CASE("multi-block prediction matrices for the scalar fixture") {
  const auto p = make_qp3();
  const auto pd = q_multiblock(p, 1.0, SweepOrder::PD);
  Matrix expected(4, 4);
  expected << 1, 0, 0, 1, 1, 1, 0, 1, 1, 1, 1, 1, 0, 0, 0, 1;
  CHECK((pd.Q - expected).norm() <= 1e-12);
  CHECK((pd.script_Q - expected).norm() <= 1e-14);  // P is the identity here

  const auto dp = q_multiblock(p, 1.0, SweepOrder::DP);
  Matrix expected_dp(4, 4);
  expected_dp << 1, 0, 0, 0, 1, 1, 0, 0, 1, 1, 1, 0, -1, -1, -1, 1;
  CHECK((dp.Q - expected_dp).norm() <= 1e-12);
}

TEST_CASE("the scaling map ties the two multi-block coordinate systems together") {
  auto g = rng(52);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_qp(g, unif_int(g, 2, 5), unif_int(g, 2, 6), trial % 2 == 0);
    const double beta = unif(g, 0.3, 3.0);
    for (SweepOrder order : {SweepOrder::PD, SweepOrder::DP}) {
      const auto qm = q_multiblock(p, beta, order);
      CHECK((qm.Q - qm.P.transpose() * qm.script_Q * qm.P).norm() <=
            1e-12 * std::max(1.0, qm.Q.norm()));
      CHECK(spd_check(Matrix(qm.script_Q.transpose() + qm.script_Q)).is_spd);
      CHECK(spd_check(Matrix(qm.Q.transpose() + qm.Q)).is_spd);
    }
  }
}

TEST_CASE("q_multiblock rejects rank-deficient couplings") {
  auto p = make_qp3();
  p.blocks[1].A = Matrix::Zero(1, 1);
  CHECK_THROWS_WITH_AS(q_multiblock(p, 1.0, SweepOrder::PD),
                       doctest::Contains("full column rank"), Error);
}

TEST_CASE("every predictor satisfies the prediction inequality against probes") {
  auto g = rng(53);

  // Two-block, from a random state.
  {
    const auto p = make_qp2();
    const double beta = 1.5, mu = 0.4;
    const auto st = make_state(p, Scheme::ScPrsm,
                               {random_vector(g, 1), random_vector(g, 1)}, random_vector(g, 1));
    const auto out = predict_scprsm(st, p, beta, mu);
    check_prediction_vi(g, p, Scheme::ScPrsm, beta, st, out,
                        scprsm_matrices(p, beta, mu).Q);
  }

  // Three-block, quadratic blocks of width > 1.
  {
    const auto p = random_qp(g, 3, 4, true);
    const double beta = 0.7;
    std::vector<Vector> xs;
    for (int i = 0; i < 3; ++i) xs.push_back(random_vector(g, p.block_dim(i)));
    const auto st = make_state(p, Scheme::Gs3Alg1, xs, random_vector(g, 4));
    const auto out = predict_gs3(st, p, beta);
    check_prediction_vi(g, p, Scheme::Gs3Alg1, beta, st, out, gs3_q_image(p.m(), beta));

    // The dense (y, z, lambda) matrix is the image-space matrix pulled
    // back through the couplings, so the inequality transfers between
    // the two coordinate systems.
    const int ny = static_cast<int>(p.blocks[1].A.cols());
    const int nz = static_cast<int>(p.blocks[2].A.cols());
    Matrix J = Matrix::Zero(3 * p.m(), ny + nz + p.m());
    J.block(0, 0, p.m(), ny) = p.blocks[1].A;
    J.block(p.m(), ny, p.m(), nz) = p.blocks[2].A;
    J.block(2 * p.m(), ny + nz, p.m(), p.m()) = Matrix::Identity(p.m(), p.m());
    const Matrix pulled = J.transpose() * gs3_q_image(p.m(), beta) * J;
    CHECK((pulled - gs3_q_dense(p, beta)).cwiseAbs().maxCoeff() <= 1e-12);
  }

  // Multi-block, both orders, equality sense.
  {
    const auto p = random_qp(g, 4, 5, false);
    const double beta = 2.0;
    std::vector<Vector> xs;
    for (int i = 0; i < 4; ++i) xs.push_back(random_vector(g, p.block_dim(i)));
    const auto st = make_state(p, Scheme::MultiPD, xs, random_vector(g, 5));
    for (SweepOrder order : {SweepOrder::PD, SweepOrder::DP}) {
      const auto out = predict_multiblock(st, p, beta, order);
      check_prediction_vi(g, p, order == SweepOrder::PD ? Scheme::MultiPD : Scheme::MultiDP,
                          beta, st, out, q_multiblock(p, beta, order).script_Q);
    }
  }

  // Multi-block with an l1 block and an inequality sense.
  {
    ProblemInstance p;
    p.rhs = Vector::Constant(2, 1.0);
    p.sense = ConstraintSense::Inequality;
    Block l1;
    l1.theta = BlockFunction::l1(0.4);
    l1.A = Matrix::Identity(2, 2);
    p.blocks.push_back(l1);
    Block quad;
    quad.theta = BlockFunction::quadratic(random_spd(g, 2), random_vector(g, 2));
    quad.A = random_orthonormal(g, 2, 2);
    p.blocks.push_back(quad);
    Block boxed;
    boxed.theta = BlockFunction::box_indicator(Vector::Constant(2, -1.0), Vector::Ones(2));
    boxed.A = random_orthonormal(g, 2, 2);
    p.blocks.push_back(boxed);

    std::vector<Vector> xs = {random_vector(g, 2), random_vector(g, 2),
                              random_vector(g, 2, -1.0, 1.0)};
    Vector lam = random_vector(g, 2).cwiseMax(0.0);
    const auto st = make_state(p, Scheme::MultiDP, xs, lam);
    const auto out = predict_multiblock(st, p, 1.0, SweepOrder::DP);
    check_prediction_vi(g, p, Scheme::MultiDP, 1.0, st, out,
                        q_multiblock(p, 1.0, SweepOrder::DP).script_Q);
  }
}

TEST_CASE("coordinate packing scales images and multiplier oppositely") {
  std::vector<Vector> images = {Vector::Constant(1, 2.0), Vector::Constant(1, 3.0)};
  const Vector lam = Vector::Constant(1, 8.0);
  const Vector xi = multiblock_pack(images, lam, 4.0);
  CHECK(xi(0) == doctest::Approx(4.0));
  CHECK(xi(1) == doctest::Approx(6.0));
  CHECK(xi(2) == doctest::Approx(4.0));
}

TEST_CASE("a two-block instance is accepted by the multi-block sweep") {
  const auto p = make_qp2();
  const auto st = initial_state(p, Scheme::MultiPD);
  CHECK_NOTHROW(predict_multiblock(st, p, 1.0, SweepOrder::PD));
}
