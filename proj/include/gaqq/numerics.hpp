#pragma once

#include <Eigen/Dense>

#include "gaqq/errors.hpp"

namespace gaqq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Dense symmetric matrix. Construction symmetrizes through (M + M')/2 so
// solvers downstream never see floating-point asymmetry.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m);

  static SymMatrix identity(int dim);
  static SymMatrix from_diag(const Vector& d);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& mat() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

 private:
  Matrix m_;
};

struct EigenPair {
  Vector values;   // ascending
  Matrix vectors;  // orthonormal columns, same order as values
};

// Deterministic symmetric eigendecomposition (tridiagonalization + implicit QL).
EigenPair sym_eig(const SymMatrix& m);

// PSD square root V diag(max(lambda, eig_floor))^{1/2} V'. Eigenvalues below
// -1e-10 * (1 + max|m|) are rejected as NotPositiveSemiDefinite.
SymMatrix sqrt_spd(const SymMatrix& m, double eig_floor = 1e-10);

// log|m| via Cholesky; throws NotPositiveDefinite when the factorization fails.
double log_det_spd(const SymMatrix& m);

// Inverse of an SPD matrix via Cholesky; output symmetrized.
SymMatrix inv_spd(const SymMatrix& m);

// Moore-Penrose pseudo-inverse of a PSD matrix: eigenvalues below
// rel_tol * lambda_max are treated as exact zeros.
SymMatrix pinv_psd(const SymMatrix& m, double rel_tol = 1e-10);

// Sum of log eigenvalues above rel_tol * lambda_max (log pseudo-determinant).
double log_pseudo_det_psd(const SymMatrix& m, double rel_tol = 1e-10);

// Lower Cholesky factor L with m = L L'.
Matrix chol_lower_spd(const SymMatrix& m);

double max_abs(const Matrix& m);
double max_abs(const Vector& v);

}  // namespace gaqq
