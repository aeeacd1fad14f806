#include "gaqq/numerics.hpp"

#include <cmath>

namespace gaqq {

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidInput(std::string(what) + ": non-finite entries");
  }
}

}  // namespace

SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw InvalidInput("SymMatrix: matrix must be square with dim >= 1");
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(int dim) {
  return SymMatrix(Matrix::Identity(dim, dim));
}

SymMatrix SymMatrix::from_diag(const Vector& d) {
  return SymMatrix(Matrix(d.asDiagonal()));
}

EigenPair sym_eig(const SymMatrix& m) {
  require_finite(m.mat(), "sym_eig");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.mat());
  if (solver.info() != Eigen::Success) {
    throw InvalidInput("sym_eig: eigendecomposition did not converge");
  }
  return EigenPair{solver.eigenvalues(), solver.eigenvectors()};
}

SymMatrix sqrt_spd(const SymMatrix& m, double eig_floor) {
  if (eig_floor < 0.0) {
    throw InvalidInput("sqrt_spd: eig_floor must be nonnegative");
  }
  const EigenPair eig = sym_eig(m);
  const double scale = 1.0 + max_abs(m.mat());
  if (eig.values.minCoeff() < -1e-10 * scale) {
    throw NotPositiveSemiDefinite("sqrt_spd: eigenvalue below PSD tolerance");
  }
  Vector roots = eig.values.cwiseMax(eig_floor).cwiseSqrt();
  return SymMatrix(eig.vectors * roots.asDiagonal() * eig.vectors.transpose());
}

double log_det_spd(const SymMatrix& m) {
  require_finite(m.mat(), "log_det_spd");
  Eigen::LLT<Matrix> llt(m.mat());
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("log_det_spd: Cholesky factorization failed");
  }
  const Matrix l = llt.matrixL();
  double sum = 0.0;
  for (int i = 0; i < m.dim(); ++i) {
    if (l(i, i) <= 0.0) {
      throw NotPositiveDefinite("log_det_spd: nonpositive pivot");
    }
    sum += std::log(l(i, i));
  }
  return 2.0 * sum;
}

SymMatrix inv_spd(const SymMatrix& m) {
  require_finite(m.mat(), "inv_spd");
  Eigen::LLT<Matrix> llt(m.mat());
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("inv_spd: Cholesky factorization failed");
  }
  Matrix inv = llt.solve(Matrix::Identity(m.dim(), m.dim()));
  return SymMatrix(inv);
}

SymMatrix pinv_psd(const SymMatrix& m, double rel_tol) {
  const EigenPair eig = sym_eig(m);
  const double lmax = eig.values.cwiseAbs().maxCoeff();
  const double cut = rel_tol * lmax;
  Vector inv = Vector::Zero(eig.values.size());
  for (int i = 0; i < inv.size(); ++i) {
    if (eig.values[i] > cut) inv[i] = 1.0 / eig.values[i];
  }
  return SymMatrix(eig.vectors * inv.asDiagonal() * eig.vectors.transpose());
}

double log_pseudo_det_psd(const SymMatrix& m, double rel_tol) {
  const EigenPair eig = sym_eig(m);
  const double lmax = eig.values.cwiseAbs().maxCoeff();
  const double cut = rel_tol * lmax;
  double sum = 0.0;
  for (int i = 0; i < eig.values.size(); ++i) {
    if (eig.values[i] > cut) sum += std::log(eig.values[i]);
  }
  return sum;
}

Matrix chol_lower_spd(const SymMatrix& m) {
  require_finite(m.mat(), "chol_lower_spd");
  Eigen::LLT<Matrix> llt(m.mat());
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("chol_lower_spd: Cholesky factorization failed");
  }
  return llt.matrixL();
}

double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double max_abs(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

}  // namespace gaqq
