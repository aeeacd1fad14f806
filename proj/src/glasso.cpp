#include "gaqq/glasso.hpp"

#include <cmath>

namespace gaqq {

namespace {

void validate(const GlassoProblem& p) {
  if (p.n < 1) throw InvalidInput("solve_glasso: n must be >= 1");
  if (p.lambda1 < 0.0) throw InvalidInput("solve_glasso: lambda1 must be >= 0");
  if (p.tol <= 0.0 || p.max_iter < 1) throw InvalidInput("solve_glasso: bad tol/max_iter");
  if (!p.s_tilde.mat().allFinite()) throw InvalidInput("solve_glasso: non-finite s_tilde");
  for (int i = 0; i < p.s_tilde.dim(); ++i) {
    if (p.s_tilde(i, i) < 0.0) throw InvalidInput("solve_glasso: negative s_tilde diagonal");
  }
}

GlassoSolution exact_unpenalized(const GlassoProblem& p) {
  GlassoSolution sol;
  sol.sigma_hat = SymMatrix(p.s_tilde.mat() / static_cast<double>(p.n));
  sol.c_hat = inv_spd(sol.sigma_hat);  // throws NotPositiveDefinite when singular
  sol.sigma_hat = inv_spd(sol.c_hat);
  sol.iterations = 0;
  sol.converged = true;
  const int dim = p.s_tilde.dim();
  sol.beta_cols = Matrix::Zero(dim, dim);
  const Matrix& c = sol.c_hat.mat();
  for (int j = 0; j < dim; ++j) {
    for (int i = 0; i < dim; ++i) {
      if (i != j) sol.beta_cols(i, j) = -c(i, j) / c(j, j);
    }
  }
  return sol;
}

}  // namespace

GlassoSolution solve_glasso(const GlassoProblem& p, const GlassoSolution* warm) {
  validate(p);
  const int dim = p.s_tilde.dim();
  const double n = static_cast<double>(p.n);

  // Solve the normalized problem min -ln|C| + tr(C S) + rho ||C||_1,off with
  // S = s_tilde / n and rho = lambda1 / n; the minimizer is unchanged.
  const Matrix s = p.s_tilde.mat() / n;
  const double rho = p.lambda1 / n;

  if (p.lambda1 == 0.0) return exact_unpenalized(p);

  if (dim == 1) {
    if (s(0, 0) <= 0.0) throw NotPositiveDefinite("solve_glasso: zero variance");
    GlassoSolution sol;
    sol.c_hat = SymMatrix(Matrix::Constant(1, 1, 1.0 / s(0, 0)));
    sol.sigma_hat = SymMatrix(Matrix::Constant(1, 1, s(0, 0)));
    sol.converged = true;
    sol.beta_cols = Matrix::Zero(1, 1);
    return sol;
  }

  for (int i = 0; i < dim; ++i) {
    if (s(i, i) <= 0.0) throw NotPositiveDefinite("solve_glasso: zero s_tilde diagonal");
  }

  // Working covariance W; the diagonal is fixed at S_ii (unpenalized diagonal).
  Matrix w = s;
  Matrix b = (warm && warm->beta_cols.rows() == dim) ? warm->beta_cols
                                                     : Matrix::Zero(dim, dim);

  const double w_scale = 1.0 + max_abs(s);
  const double outer_tol = p.tol * w_scale;
  const double inner_tol = std::max(p.tol * 1e-1 * w_scale, 1e-13);
  // Warm starts across sweeps polish the column solutions, so each visit
  // gets a bounded budget.
  const int inner_max = 15;

  GlassoSolution sol;
  for (int sweep = 1; sweep <= p.max_iter; ++sweep) {
    double max_change = 0.0;
    for (int j = 0; j < dim; ++j) {
      // Column lasso on W11 (rows/cols != j):
      //   min 1/2 beta' W11 beta - s12' beta + rho |beta|_1
      // run in place on full-size vectors with coordinate j masked out.
      Vector beta = b.col(j);
      beta[j] = 0.0;
      Vector wbeta = w * beta;  // row j carries w12'beta, unused by the updates
      for (int it = 0; it < inner_max; ++it) {
        double inner_change = 0.0;
        for (int k = 0; k < dim; ++k) {
          if (k == j) continue;
          const double wkk = w(k, k);
          if (wkk <= 0.0) continue;
          const double z = s(k, j) - (wbeta[k] - wkk * beta[k]);
          const double updated = soft_threshold(z, rho) / wkk;
          const double change = updated - beta[k];
          if (change != 0.0) {
            wbeta += w.col(k) * change;
            beta[k] = updated;
            inner_change = std::max(inner_change, std::abs(change));
          }
        }
        if (inner_change <= inner_tol) break;
      }
      b.col(j) = beta;
      // New column of W: w12 = W11 * beta, diagonal untouched.
      for (int k = 0; k < dim; ++k) {
        if (k == j) continue;
        const double updated = wbeta[k] - w(k, j) * beta[j];  // beta[j] == 0
        max_change = std::max(max_change, std::abs(updated - w(k, j)));
        w(k, j) = updated;
        w(j, k) = updated;
      }
    }
    sol.iterations = sweep;
    if (max_change <= outer_tol) {
      sol.converged = true;
      break;
    }
  }

  // Recover the precision matrix column by column from the final betas.
  Matrix theta = Matrix::Zero(dim, dim);
  for (int j = 0; j < dim; ++j) {
    const Vector beta = b.col(j);
    double quad = 0.0;
    for (int k = 0; k < dim; ++k) {
      if (k != j) quad += w(k, j) * beta[k];  // w12 = W11 beta at convergence
    }
    const double denom = w(j, j) - quad;
    if (denom <= 0.0 || !std::isfinite(denom)) {
      throw NotPositiveDefinite("solve_glasso: working covariance lost definiteness");
    }
    const double tjj = 1.0 / denom;
    theta(j, j) = tjj;
    for (int k = 0; k < dim; ++k) {
      if (k != j) theta(k, j) = -beta[k] * tjj;
    }
  }

  sol.c_hat = SymMatrix(theta);
  sol.sigma_hat = inv_spd(sol.c_hat);
  sol.beta_cols = std::move(b);
  return sol;
}

double glasso_kkt_residual(const SymMatrix& c, const GlassoProblem& p) {
  if (c.dim() != p.s_tilde.dim()) {
    throw InvalidInput("glasso_kkt_residual: dimension mismatch");
  }
  const SymMatrix sigma = inv_spd(c);
  const Matrix g = -static_cast<double>(p.n) * sigma.mat() + p.s_tilde.mat();
  // Entries at or below dust scale are treated as structural zeros.
  const double zero_eps = 1e-10 * (1.0 + max_abs(c.mat()));
  double res = 0.0;
  for (int i = 0; i < c.dim(); ++i) {
    for (int j = 0; j < c.dim(); ++j) {
      if (i == j) {
        res = std::max(res, std::abs(g(i, i)));
      } else if (std::abs(c(i, j)) > zero_eps) {
        const double sign = c(i, j) > 0.0 ? 1.0 : -1.0;
        res = std::max(res, std::abs(g(i, j) + p.lambda1 * sign));
      } else {
        res = std::max(res, std::max(std::abs(g(i, j)) - p.lambda1, 0.0));
      }
    }
  }
  return res;
}

double glasso_objective(const SymMatrix& c, const GlassoProblem& p) {
  const double n = static_cast<double>(p.n);
  double l1_off = 0.0;
  for (int i = 0; i < c.dim(); ++i) {
    for (int j = 0; j < c.dim(); ++j) {
      if (i != j) l1_off += std::abs(c(i, j));
    }
  }
  const double trace = (c.mat().cwiseProduct(p.s_tilde.mat())).sum();
  return -n * log_det_spd(c) + trace + p.lambda1 * l1_off;
}

}  // namespace gaqq
