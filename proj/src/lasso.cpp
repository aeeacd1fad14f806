#include "gaqq/lasso.hpp"

#include <cmath>

namespace gaqq {

double soft_threshold(double z, double gamma) {
  const double mag = std::abs(z) - gamma;
  if (mag <= 0.0) return 0.0;
  return z > 0.0 ? mag : -mag;
}

LassoGramResult solve_lasso_gram(const Matrix& q, const Vector& b, double penalty,
                                 const Vector& warm, double tol, int max_iter) {
  const int dim = static_cast<int>(b.size());
  if (q.rows() != dim || q.cols() != dim) {
    throw InvalidInput("solve_lasso_gram: Gram matrix / gradient size mismatch");
  }
  if (warm.size() != dim) {
    throw InvalidInput("solve_lasso_gram: warm start size mismatch");
  }
  if (penalty < 0.0 || tol <= 0.0 || max_iter < 1) {
    throw InvalidInput("solve_lasso_gram: bad penalty/tol/max_iter");
  }

  LassoGramResult res;
  res.beta = warm;
  // Pin unidentifiable coordinates before forming Q*beta.
  for (int j = 0; j < dim; ++j) {
    if (q(j, j) <= 0.0) res.beta[j] = 0.0;
  }
  Vector qbeta = q * res.beta;
  const double thr = 0.5 * penalty;

  for (int sweep = 1; sweep <= max_iter; ++sweep) {
    double max_change = 0.0;
    for (int j = 0; j < dim; ++j) {
      const double qjj = q(j, j);
      if (qjj <= 0.0) continue;
      const double z = b[j] - (qbeta[j] - qjj * res.beta[j]);
      const double updated = soft_threshold(z, thr) / qjj;
      const double change = updated - res.beta[j];
      if (change != 0.0) {
        qbeta += q.col(j) * change;
        res.beta[j] = updated;
        max_change = std::max(max_change, std::abs(change));
      }
    }
    res.sweeps = sweep;
    if (max_change <= tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

LassoSolution solve_lasso(const LassoProblem& p) {
  const int q = static_cast<int>(p.design.cols());
  if (p.design.rows() != p.response.size()) {
    throw InvalidInput("solve_lasso: design rows != response length");
  }
  if (p.warm_start && p.warm_start->size() != q) {
    throw InvalidInput("solve_lasso: warm start length != design columns");
  }
  if (p.penalty < 0.0 || p.tol <= 0.0 || p.max_iter < 1) {
    throw InvalidInput("solve_lasso: bad penalty/tol/max_iter");
  }

  const Matrix gram = p.design.transpose() * p.design;
  const Vector grad = p.design.transpose() * p.response;
  const Vector warm = p.warm_start ? *p.warm_start : Vector::Zero(q);

  LassoGramResult core = solve_lasso_gram(gram, grad, p.penalty, warm, p.tol, p.max_iter);

  LassoSolution sol;
  sol.beta = std::move(core.beta);
  sol.iterations = core.sweeps;
  sol.converged = core.converged;
  const Vector resid = p.response - p.design * sol.beta;
  sol.objective = resid.squaredNorm() + p.penalty * sol.beta.lpNorm<1>();
  return sol;
}

}  // namespace gaqq
