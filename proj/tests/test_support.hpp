#pragma once

// Shared helpers for the test suites: deterministic random instances and
// brute-force oracles kept independent of the solver code paths they check.

#include <cmath>
#include <vector>

#include "gaqq/dataset.hpp"
#include "gaqq/estimator.hpp"
#include "gaqq/numerics.hpp"
#include "gaqq/rng.hpp"

namespace gaqq::testsupport {

inline Matrix random_matrix(int rows, int cols, SplitMix64& rng) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.next_normal();
  }
  return m;
}

inline Vector random_vector(int n, SplitMix64& rng) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.next_normal();
  return v;
}

inline SymMatrix random_symmetric(int p, SplitMix64& rng) {
  return SymMatrix(random_matrix(p, p, rng));
}

// A A' / p + ridge * I
inline SymMatrix random_spd(int p, SplitMix64& rng, double ridge = 0.5) {
  const Matrix a = random_matrix(p, p, rng);
  return SymMatrix(Matrix(a * a.transpose() / p + ridge * Matrix::Identity(p, p)));
}

// Scatter-scale PSD matrix of rank min(n, p).
inline SymMatrix random_scatter(int p, int n, SplitMix64& rng) {
  const Matrix a = random_matrix(n, p, rng);
  return SymMatrix(Matrix(a.transpose() * a));
}

// Gaussian class data with means spread ~ N(0, spread^2) per coordinate.
inline Dataset random_dataset(int p, const std::vector<int>& sizes, SplitMix64& rng,
                              double spread = 1.0) {
  const int k = static_cast<int>(sizes.size());
  const SymMatrix c = random_spd(p, rng);
  const SymMatrix cov = inv_spd(c);
  const Matrix chol = chol_lower_spd(cov);
  int n = 0;
  for (int s : sizes) n += s;
  Matrix w(n, p);
  std::vector<int> z(n);
  int at = 0;
  for (int g = 0; g < k; ++g) {
    const Vector mu = spread * random_vector(p, rng);
    for (int i = 0; i < sizes[g]; ++i) {
      w.row(at) = (mu + chol * random_vector(p, rng)).transpose();
      z[at] = g + 1;
      ++at;
    }
  }
  return Dataset::create(std::move(w), std::move(z));
}

inline double lasso_objective_direct(const Matrix& a, const Vector& r, const Vector& beta,
                                     double penalty) {
  return (r - a * beta).squaredNorm() + penalty * beta.lpNorm<1>();
}

// Brute-force lasso oracle for q <= 3: multi-resolution grid search over
// [-span, span]^q refined down to `resolution` around the running optimum.
// Pure objective evaluation, no coordinate descent.
inline Vector lasso_grid_oracle(const Matrix& a, const Vector& r, double penalty,
                                double span = 3.0, double resolution = 1e-4) {
  const int q = static_cast<int>(a.cols());
  Vector center = Vector::Zero(q);
  double step = span / 15.0;
  Vector best = center;
  // First pass covers [-span, span]; later passes shrink around the optimum.
  double radius = span;
  while (true) {
    const int half = static_cast<int>(std::ceil(radius / step));
    double best_obj = std::numeric_limits<double>::infinity();
    Vector probe(q);
    std::vector<int> idx(q, -half);
    while (true) {
      for (int d = 0; d < q; ++d) probe[d] = center[d] + idx[d] * step;
      const double obj = lasso_objective_direct(a, r, probe, penalty);
      if (obj < best_obj) {
        best_obj = obj;
        best = probe;
      }
      int d = 0;
      while (d < q && ++idx[d] > half) {
        idx[d] = -half;
        ++d;
      }
      if (d == q) break;
    }
    if (step <= resolution) break;
    center = best;
    radius = 2.0 * step;
    step /= 10.0;
  }
  return best;
}

}  // namespace gaqq::testsupport
