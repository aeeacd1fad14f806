#pragma once

#include "gaqq/lasso.hpp"
#include "gaqq/numerics.hpp"

namespace gaqq {

// min_C  -n ln|C| + tr(C s_tilde) + lambda1 * sum_{i != j} |c_ij|
// where s_tilde is a scatter-scale matrix (summed over n samples, not averaged).
// The diagonal of C is never penalized.
struct GlassoProblem {
  SymMatrix s_tilde;
  long n = 1;
  double lambda1 = 0.0;
  double tol = 1e-6;   // max abs change of the working covariance per sweep
  int max_iter = 500;  // outer column sweeps
};

struct GlassoSolution {
  SymMatrix c_hat;      // SPD precision estimate
  SymMatrix sigma_hat;  // inv(c_hat), cached
  int iterations = 0;
  bool converged = false;
  // Column lasso coefficients from the final sweep, beta_cols(i, j) = beta_i for
  // column j and beta_cols(j, j) = 0. Reusable as a warm start.
  Matrix beta_cols;
};

GlassoSolution solve_glasso(const GlassoProblem& p, const GlassoSolution* warm = nullptr);

// Maximum stationarity violation of c for the problem: with G = -n*inv(c) + s_tilde,
// |G_ii| on the diagonal, |G_ij + lambda1*sign(c_ij)| where c_ij != 0 and
// max(|G_ij| - lambda1, 0) where c_ij == 0. Exact solutions give 0.
double glasso_kkt_residual(const SymMatrix& c, const GlassoProblem& p);

double glasso_objective(const SymMatrix& c, const GlassoProblem& p);

}  // namespace gaqq
