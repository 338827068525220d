#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>

#include "doctest.h"
#include "pcsplit/certifier.hpp"
#include "pcsplit/correction.hpp"
#include "pcsplit/predictors.hpp"
#include "pcsplit/problem_io.hpp"
#include "pcsplit/solver.hpp"
#include "support.hpp"

using namespace pcsplit;
using namespace testsupport;

TEST_CASE("certify accepts the scalar two-block fixture") {
  const auto mats = scprsm_matrices(make_qp2(), 1.0, 0.5);
  const auto cert = certify(mats.Q, mats.M, mats.H, mats.G);
  CHECK(cert.ok);
  CHECK(cert.hm_residual <= 1e-12);
  CHECK(cert.h_cert.is_spd);
  CHECK(cert.g_cert.is_spd);
  CHECK(cert.qtq_cert.is_spd);
}

TEST_CASE("certify rejects the undamped two-block boundary") {
  const auto mats = scprsm_matrices(make_qp2(), 1.0, 1.0);
  const auto cert = certify(mats.Q, mats.M, mats.H, mats.G);
  CHECK_FALSE(cert.ok);
  CHECK_FALSE(cert.g_cert.is_spd);
  CHECK(cert.g_cert.min_eig <= 1e-10);
  CHECK(std::abs(cert.g_cert.min_eig) <= 1e-12);  // G vanishes entirely at the boundary
}

TEST_CASE("certify accepts the proximal-point identity plan") {
  const Matrix I2 = Matrix::Identity(2, 2);
  const auto cert = certify(Matrix(2.0 * I2), I2, Matrix(2.0 * I2), Matrix(2.0 * I2));
  CHECK(cert.ok);
  CHECK(cert.hm_residual == 0.0);
}

TEST_CASE("certify insists on conformable matrices") {
  const Matrix I2 = Matrix::Identity(2, 2);
  const Matrix I3 = Matrix::Identity(3, 3);
  CHECK_THROWS_AS(certify(I2, I2, I3, I2), Error);
}

TEST_CASE("the progress weight shrinks linearly in the damping factor") {
  const auto p = make_qp2();
  const double base = spd_check(scprsm_matrices(p, 1.0, 0.5).G).min_eig / 0.5;
  for (double mu : {0.1, 0.3, 0.7, 0.9}) {
    const double ratio = spd_check(scprsm_matrices(p, 1.0, mu).G).min_eig / (1.0 - mu);
    CHECK(ratio == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("monitor_step is identically zero at the solution") {
  const auto mats = scprsm_matrices(make_qp2(), 1.0, 0.5);
  const auto plan = build_plan(mats.Q, split_from_d(Matrix(mats.M.transpose() * mats.Q)));
  Vector star(2);
  star << 0.5, 0.5;
  const auto rec = monitor_step(plan, star, star, star, star, 7);
  CHECK(rec.k == 7);
  CHECK(rec.dist_sq_H == 0.0);
  CHECK(rec.dist_sq_H_next == 0.0);
  CHECK(rec.progress_sq_G == 0.0);
  CHECK(rec.slack == 0.0);
  CHECK_FALSE(rec.violation);
}

TEST_CASE("monitor_step sees contraction on the first fixture step") {
  const auto mats = scprsm_matrices(make_qp2(), 1.0, 0.5);
  const auto plan = build_plan(mats.Q, split_from_d(Matrix(mats.M.transpose() * mats.Q)));
  const Vector v = Vector::Zero(2);
  Vector v_tilde(2), star(2);
  v_tilde << 0.375, 0.5;
  star << 0.5, 0.5;
  const Vector v_next = correct_dense(plan, v, v_tilde);

  const auto rec = monitor_step(plan, v, v_next, v_tilde, star, 0);
  CHECK(rec.dist_sq_H == doctest::Approx(0.1875).epsilon(1e-12));
  CHECK(rec.dist_sq_H_next < rec.dist_sq_H);
  CHECK(rec.slack >= 0.0);
  CHECK_FALSE(rec.violation);

  // A corrupted correction (step applied with the wrong sign) must land
  // outside the contraction envelope and be flagged.
  const Vector v_bad = v + plan.M * (v - v_tilde);
  const auto bad = monitor_step(plan, v, v_bad, v_tilde, star, 1);
  CHECK(bad.slack < 0.0);
  CHECK(bad.violation);

  CHECK_THROWS_AS(monitor_step(plan, v, v_next, v_tilde, Vector::Zero(3), 0), Error);
}

TEST_CASE("reference_solution solves smooth equality problems in closed form") {
  const auto sol2 = reference_solution(make_qp2());
  CHECK(sol2.strategy == "closed-form");
  CHECK(sol2.x_blocks[0](0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sol2.x_blocks[1](0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sol2.lambda(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sol2.quality.total() <= 1e-10);

  const auto sol3 = reference_solution(make_qp3());
  CHECK(sol3.strategy == "closed-form");
  for (int i = 0; i < 3; ++i) CHECK(sol3.x_blocks[i](0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol3.lambda(0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("reference_solution enumerates sign patterns for tiny l1 problems") {
  // minimize |x| + 1/2 y^2  subject to  x + y = 1: the l1 term pins x at
  // zero and the multiplier sits on the subdifferential boundary.
  ProblemInstance p;
  p.rhs = Vector::Constant(1, 1.0);
  Block bx;
  bx.theta = BlockFunction::l1(1.0);
  bx.A = Matrix::Identity(1, 1);
  p.blocks.push_back(bx);
  Block by;
  by.theta = BlockFunction::quadratic(Matrix::Identity(1, 1), Vector::Zero(1));
  by.A = Matrix::Identity(1, 1);
  p.blocks.push_back(by);

  const auto sol = reference_solution(p);
  CHECK(sol.strategy == "enumeration");
  CHECK(std::abs(sol.x_blocks[0](0)) <= 1e-12);
  CHECK(sol.x_blocks[1](0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sol.lambda(0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sol.quality.total() <= 1e-10);
}

TEST_CASE("reference_solution enumerates active sets for inequalities") {
  const auto p = load_problem(fixture("ineq2.json"));
  const auto sol = reference_solution(p);
  CHECK(sol.strategy == "enumeration");
  CHECK(sol.x_blocks[0](0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sol.x_blocks[1](0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sol.lambda(0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("reference_solution pins the mixed l1 fixture") {
  const auto p = load_problem(fixture("l1qp3.json"));
  const auto sol = reference_solution(p);
  CHECK(sol.strategy == "enumeration");
  CHECK(sol.x_blocks[0](0) == doctest::Approx(7.0 / 30.0).epsilon(1e-9));
  CHECK(sol.x_blocks[1](0) == doctest::Approx(37.0 / 30.0).epsilon(1e-9));
  CHECK(sol.x_blocks[2](0) == doctest::Approx(23.0 / (15.0 * std::sqrt(2.0))).epsilon(1e-9));
  CHECK(sol.lambda(0) == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(sol.lambda(1) == doctest::Approx(37.0 / 30.0).epsilon(1e-9));
  CHECK(sol.quality.total() <= 1e-10);
}

TEST_CASE("reference_solution falls back to a long certified run") {
  // Four primal dimensions with an l1 block: too big to enumerate, not
  // smooth enough for the direct solve.
  auto g = rng(71);
  ProblemInstance p;
  p.rhs = random_vector(g, 3);
  Block b0;
  b0.theta = BlockFunction::l1(0.5);
  b0.A = random_orthonormal(g, 3, 2);
  p.blocks.push_back(b0);
  Block b1;
  b1.theta = BlockFunction::quadratic(random_spd(g, 1), random_vector(g, 1));
  b1.A = random_full_rank(g, 3, 1);
  p.blocks.push_back(b1);
  Block b2;
  b2.theta = BlockFunction::quadratic(random_spd(g, 1), random_vector(g, 1));
  b2.A = random_full_rank(g, 3, 1);
  p.blocks.push_back(b2);

  const auto sol = reference_solution(p);
  CHECK(sol.strategy == "long-run");
  CHECK(sol.quality.total() <= 1e-10);
}

TEST_CASE("reference_solution reports failure loudly") {
  // An l1 block with a skewed coupling matrix has no exact subproblem
  // solver, so even the long-run fallback is rejected.
  ProblemInstance p;
  p.rhs = Vector::Zero(2);
  Block b0;
  b0.theta = BlockFunction::l1(1.0);
  b0.A = Matrix(2, 2);
  b0.A << 1, 1, 0, 1;
  p.blocks.push_back(b0);
  Block b1;
  b1.theta = BlockFunction::quadratic(Matrix::Identity(2, 2), Vector::Zero(2));
  b1.A = Matrix::Identity(2, 2);
  p.blocks.push_back(b1);

  CHECK_THROWS_WITH_AS(reference_solution(p), doctest::Contains("no reference solution"),
                       Error);
}

TEST_CASE("a monitored run keeps the contraction inequality") {
  RunConfig cfg;
  cfg.scheme = Scheme::Gs3Alg1;
  cfg.nu = 0.9;
  cfg.tol = 0.0;  // run the full budget
  cfg.max_iters = 200;
  cfg.monitor = true;
  const auto result = run_solve(make_qp3(), cfg);
  REQUIRE(result.records.size() == 200);
  const double inf = std::numeric_limits<double>::infinity();
  double prev = inf;
  for (const auto& rec : result.records) {
    CHECK_FALSE(rec.violation);
    CHECK(rec.slack >= -1e-8 * std::max(1.0, rec.dist_sq_H));
    if (prev < inf) {
      CHECK(rec.dist_sq_H <= prev + 1e-8 * std::max(1.0, prev));
    }
    prev = rec.dist_sq_H_next;
  }
  // The progress term dies out: mean over the final 100 iterations.
  double tail_mean = 0.0;
  for (size_t i = result.records.size() - 100; i < result.records.size(); ++i) {
    tail_mean += result.records[i].progress_sq_G;
  }
  tail_mean /= 100.0;
  CHECK(tail_mean <= 1e-12);
}
