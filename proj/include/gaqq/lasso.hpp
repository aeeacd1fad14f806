#pragma once

#include <optional>

#include "gaqq/numerics.hpp"

namespace gaqq {

// min_beta ||response - design * beta||_2^2 + penalty * |beta|_1
struct LassoProblem {
  Matrix design;                     // m x q
  Vector response;                   // m
  double penalty = 0.0;              // >= 0
  std::optional<Vector> warm_start;  // defaults to zero
  double tol = 1e-8;                 // max abs coordinate change per sweep
  int max_iter = 10000;              // sweep cap
};

struct LassoSolution {
  Vector beta;
  int iterations = 0;    // sweeps performed
  bool converged = false;
  double objective = 0.0;
};

// sign(z) * max(|z| - gamma, 0); ties at |z| == gamma resolve to 0.
double soft_threshold(double z, double gamma);

LassoSolution solve_lasso(const LassoProblem& p);

// Gram form used internally and by the glasso column updates:
//   min_beta  beta' Q beta - 2 b' beta + penalty * |beta|_1   (+ const)
// which matches the design/response form with Q = A'A, b = A'r.
// Coordinates with Q_jj == 0 are pinned to zero.
struct LassoGramResult {
  Vector beta;
  int sweeps = 0;
  bool converged = false;
};

LassoGramResult solve_lasso_gram(const Matrix& q, const Vector& b, double penalty,
                                 const Vector& warm, double tol, int max_iter);

}  // namespace gaqq
