#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gaqq/glasso.hpp"
#include "gaqq/rng.hpp"
#include "test_support.hpp"

using namespace gaqq;
using namespace gaqq::testsupport;

namespace {

// Direct objective for the 2x2 oracle; +inf outside the PD cone.
double obj2x2(double c11, double c12, double c22, const Matrix& s, double n, double lambda1) {
  const double det = c11 * c22 - c12 * c12;
  if (det <= 0.0 || c11 <= 0.0) return std::numeric_limits<double>::infinity();
  const double trace = c11 * s(0, 0) + 2.0 * c12 * s(0, 1) + c22 * s(1, 1);
  return -n * std::log(det) + trace + 2.0 * lambda1 * std::abs(c12);
}

// Multi-resolution grid minimization over (c11, c12, c22); pure objective
// evaluation, independent of the solver.
Vector glasso_2x2_oracle(const Matrix& s, double n, double lambda1) {
  Vector center(3);
  center << 1.0, 0.0, 1.0;  // (c11, c12, c22)
  double step = 0.25;
  double radius = 4.0;
  Vector best = center;
  while (true) {
    const int half = static_cast<int>(std::ceil(radius / step));
    double best_obj = std::numeric_limits<double>::infinity();
    for (int i = -half; i <= half; ++i) {
      for (int j = -half; j <= half; ++j) {
        for (int k = -half; k <= half; ++k) {
          const double c11 = center[0] + i * step;
          const double c12 = center[1] + j * step;
          const double c22 = center[2] + k * step;
          const double obj = obj2x2(c11, c12, c22, s, n, lambda1);
          if (obj < best_obj) {
            best_obj = obj;
            best << c11, c12, c22;
          }
        }
      }
    }
    if (step <= 1e-6) break;
    center = best;
    radius = 2.0 * step;
    step /= 10.0;
  }
  return best;
}

GlassoProblem random_problem(int p, int n, SplitMix64& rng, double lambda_scale) {
  GlassoProblem gp;
  gp.s_tilde = random_scatter(p, n, rng);
  gp.n = n;
  gp.lambda1 = lambda_scale * rng.next_uniform(0.05, 1.0) * n;
  gp.tol = 1e-8;
  return gp;
}

}  // namespace

TEST_CASE("lambda1 = 0 with SPD scatter gives the exact MLE") {
  SplitMix64 rng(3);
  const int n = 40;
  GlassoProblem gp;
  gp.s_tilde = random_scatter(5, n, rng);
  gp.n = n;
  gp.lambda1 = 0.0;
  const GlassoSolution sol = solve_glasso(gp);
  const Matrix expected = n * inv_spd(gp.s_tilde).mat();
  CHECK(max_abs(Matrix(sol.c_hat.mat() - expected)) <= 1e-8 * (1.0 + max_abs(expected)));
  CHECK(sol.converged);
  // stationarity: -n C^{-1} + S = 0
  CHECK(glasso_kkt_residual(sol.c_hat, gp) <= 1e-8 * (1.0 + max_abs(gp.s_tilde.mat())));
}

TEST_CASE("lambda1 = 0 with singular scatter fails") {
  SplitMix64 rng(5);
  GlassoProblem gp;
  gp.s_tilde = random_scatter(6, 3, rng);
  gp.n = 3;
  gp.lambda1 = 0.0;
  CHECK_THROWS_AS(solve_glasso(gp), NotPositiveDefinite);
}

TEST_CASE("diagonal scatter gives diagonal n/d solution for any lambda1") {
  Vector d(4);
  d << 2.0, 5.0, 1.0, 8.0;
  for (double lambda1 : {0.0, 1.0, 10.0}) {
    GlassoProblem gp;
    gp.s_tilde = SymMatrix::from_diag(d);
    gp.n = 12;
    gp.lambda1 = lambda1;
    const GlassoSolution sol = solve_glasso(gp);
    for (int i = 0; i < 4; ++i) {
      CHECK(sol.c_hat(i, i) == doctest::Approx(12.0 / d[i]).epsilon(1e-10));
      for (int j = 0; j < 4; ++j) {
        if (i != j) CHECK(std::abs(sol.c_hat(i, j)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("2x2 solution matches the direct objective-minimization oracle") {
  Matrix s(2, 2);
  s << 10.0, 6.0, 6.0, 10.0;
  GlassoProblem gp;
  gp.s_tilde = SymMatrix(s);
  gp.n = 10;
  gp.lambda1 = 3.0;
  gp.tol = 1e-10;
  const GlassoSolution sol = solve_glasso(gp);
  const Vector oracle = glasso_2x2_oracle(s, 10.0, 3.0);
  CHECK(std::abs(sol.c_hat(0, 0) - oracle[0]) <= 1e-4);
  CHECK(std::abs(sol.c_hat(0, 1) - oracle[1]) <= 1e-4);
  CHECK(std::abs(sol.c_hat(1, 1) - oracle[2]) <= 1e-4);
}

TEST_CASE("kkt residual flags non-optimal points") {
  SplitMix64 rng(7);
  const int n = 30;
  GlassoProblem gp;
  gp.s_tilde = random_scatter(4, n, rng);
  gp.n = n;
  gp.lambda1 = 0.0;
  const SymMatrix mle(Matrix(n * inv_spd(gp.s_tilde).mat()));
  CHECK(glasso_kkt_residual(mle, gp) <= 1e-8 * (1.0 + max_abs(gp.s_tilde.mat())));
  Matrix perturbed = mle.mat();
  perturbed(0, 1) += 0.1;
  perturbed(1, 0) += 0.1;
  CHECK(glasso_kkt_residual(SymMatrix(perturbed), gp) > 0.01);
}

TEST_CASE("solver output passes its own KKT check on random instances") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    GlassoProblem gp = random_problem(10, 25, rng, 0.3);
    const GlassoSolution sol = solve_glasso(gp);
    CHECK(sol.converged);
    CHECK(glasso_kkt_residual(sol.c_hat, gp) <= 1e-6 * (1.0 + max_abs(gp.s_tilde.mat())));
    CHECK(max_abs(Matrix(sol.c_hat.mat() * sol.sigma_hat.mat() - Matrix::Identity(10, 10))) <=
          1e-6);
  }
}

TEST_CASE("objective is non-increasing across outer sweeps") {
  SplitMix64 rng(13);
  GlassoProblem gp = random_problem(8, 20, rng, 0.3);
  double prev = std::numeric_limits<double>::infinity();
  for (int sweeps = 1; sweeps <= 12; ++sweeps) {
    GlassoProblem limited = gp;
    limited.max_iter = sweeps;
    const GlassoSolution sol = solve_glasso(limited);
    const double obj = glasso_objective(sol.c_hat, gp);
    CHECK(obj <= prev + 1e-8 * (1.0 + std::abs(prev)));
    prev = obj;
  }
}

TEST_CASE("SPD output even when the scatter is singular (n < p)") {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const int p = 12;
    const int n = 5;
    GlassoProblem gp;
    gp.s_tilde = random_scatter(p, n, rng);
    gp.n = n;
    gp.lambda1 = 0.3 * n;
    const GlassoSolution sol = solve_glasso(gp);
    CHECK_NOTHROW(chol_lower_spd(sol.c_hat));
    CHECK(glasso_kkt_residual(sol.c_hat, gp) <= 1e-5 * (1.0 + max_abs(gp.s_tilde.mat())));
  }
}

TEST_CASE("off-diagonal support shrinks as lambda1 grows") {
  SplitMix64 rng(19);
  GlassoProblem gp;
  const int n = 25;
  gp.s_tilde = random_scatter(8, n, rng);
  gp.n = n;
  gp.tol = 1e-8;
  int prev_nonzero = 8 * 8;
  for (double mult : {0.02, 0.1, 0.3, 1.0, 3.0}) {
    gp.lambda1 = mult * n;
    const GlassoSolution sol = solve_glasso(gp);
    int nonzero = 0;
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 8; ++j) {
        if (i != j && std::abs(sol.c_hat(i, j)) > 1e-8) ++nonzero;
      }
    }
    CHECK(nonzero <= prev_nonzero);
    prev_nonzero = nonzero;
  }
}

TEST_CASE("warm start reproduces the cold solution") {
  SplitMix64 rng(23);
  GlassoProblem gp = random_problem(7, 20, rng, 0.3);
  const GlassoSolution cold = solve_glasso(gp);
  const GlassoSolution rewarmed = solve_glasso(gp, &cold);
  CHECK(max_abs(Matrix(cold.c_hat.mat() - rewarmed.c_hat.mat())) <=
        1e-7 * (1.0 + max_abs(cold.c_hat.mat())));
  CHECK(rewarmed.iterations <= cold.iterations);
}

TEST_CASE("input validation") {
  GlassoProblem gp;
  gp.s_tilde = SymMatrix::identity(3);
  gp.n = 0;
  CHECK_THROWS_AS(solve_glasso(gp), InvalidInput);
  gp.n = 5;
  gp.lambda1 = -1.0;
  CHECK_THROWS_AS(solve_glasso(gp), InvalidInput);
  gp.lambda1 = 1.0;
  Vector d(2);
  d << 1.0, -1.0;
  gp.s_tilde = SymMatrix::from_diag(d);
  CHECK_THROWS_AS(solve_glasso(gp), InvalidInput);
}

TEST_CASE("1x1 problem") {
  GlassoProblem gp;
  gp.s_tilde = SymMatrix(Matrix::Constant(1, 1, 4.0));
  gp.n = 8;
  gp.lambda1 = 2.0;
  const GlassoSolution sol = solve_glasso(gp);
  CHECK(sol.c_hat(0, 0) == doctest::Approx(8.0 / 4.0).epsilon(1e-12));
}
