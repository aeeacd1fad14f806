#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gaqq/dataset.hpp"
#include "gaqq/glasso.hpp"
#include "gaqq/lasso.hpp"
#include "gaqq/numerics.hpp"

namespace gaqq {

struct Hyperparams {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double tau1 = 1e-6;  // squared Frobenius threshold on successive C estimates
  double tau2 = 1e-6;  // squared l2 threshold on successive delta estimates
  int max_outer = 100;
  double lasso_tol = 1e-8;
  int lasso_max_iter = 10000;
  double glasso_tol = 1e-6;
  int glasso_max_iter = 500;
};

// Fitted model. Class mean offsets are stored uniformly in the multi-class
// convention delta_k = (mu_k - mu_1) / K for k = 2..K, so a two-class fit
// stores the negative of its internal working delta.
class ModelParams {
 public:
  int k_classes = 0;
  std::vector<Vector> mu;      // K vectors of length p
  std::vector<Vector> delta;   // K-1 vectors (k = 2..K)
  SymMatrix c_hat;
  SymMatrix sigma_hat;
  Vector pi;                   // K class priors

  // Builds a model from a precision matrix: sigma_hat = inv(c), conditional
  // slope from the precision identity Sigma_Xy' Sigma_X^{-1} = -C_Xy' / c_y2.
  static ModelParams from_precision(std::vector<Vector> mu, SymMatrix c_hat, Vector pi);

  // Builds a model from a (possibly singular) covariance matrix: c_hat is the
  // Moore-Penrose pseudo-inverse and the conditional slope uses the
  // pseudo-inverse of the Sigma_X block. Used by the GLDA baseline.
  static ModelParams from_covariance_pinv(std::vector<Vector> mu, SymMatrix sigma, Vector pi);

  // Rehydrates a pseudo-inverse-mode model from its stored precision matrix
  // (sigma_hat = pinv(c_hat)); keeps c_hat bit-identical to the input.
  static ModelParams from_precision_pseudo(std::vector<Vector> mu, SymMatrix c_hat, Vector pi);

  int p() const { return static_cast<int>(mu.empty() ? 0 : mu[0].size()); }

  // Block views of the (X, y) partition.
  Vector mu_x(int k) const { return mu[k - 1].head(p() - 1); }
  double mu_y(int k) const { return mu[k - 1][p() - 1]; }
  Matrix c_x() const { return c_hat.mat().topLeftCorner(p() - 1, p() - 1); }
  Vector c_xy() const { return c_hat.mat().topRightCorner(p() - 1, 1); }
  double c_y2() const { return c_hat(p() - 1, p() - 1); }
  Matrix sigma_x() const { return sigma_hat.mat().topLeftCorner(p() - 1, p() - 1); }
  Vector sigma_xy() const { return sigma_hat.mat().topRightCorner(p() - 1, 1); }
  double sigma_y2() const { return sigma_hat(p() - 1, p() - 1); }

  // Caches prepared by the factories.
  double log_det_sigma() const { return log_det_sigma_; }
  const Vector& xy_slope() const { return xy_slope_; }  // Sigma_Xy' Sigma_X^{-1} as a vector
  bool pseudo_inverse_mode() const { return pseudo_inverse_mode_; }

 private:
  void finalize_common();
  double log_det_sigma_ = 0.0;
  Vector xy_slope_;
  bool pseudo_inverse_mode_ = false;
};

struct FitTrace {
  std::vector<double> objective;        // penalized objective after each outer iteration
  std::vector<double> c_step_fro2;      // ||C_t - C_{t-1}||_F^2, recorded from t = 2
  std::vector<double> delta_step_sq;    // ||delta_t - delta_{t-1}||_2^2, from t = 1
  bool converged = false;
  int iterations = 0;
};

// S_tilde(delta2) = sum_{G1} (w_i - (2 n2/n) d2 - wbar)(.)' + sum_{G2} (w_i + (2 n1/n) d2 - wbar)(.)'
SymMatrix build_s_tilde_two_class(const Dataset& data, const Vector& delta2);

// y_tilde = (1/(2 n1 n2)) C^{1/2} (n2 sum_{G1} w_i - n1 sum_{G2} w_i)
Vector build_y_tilde_two_class(const Dataset& data, const SymMatrix& c_sqrt);

// Multi-class working scatter with delta_1 == 0:
// sum_k sum_{G_k} (w_i - wbar + (K/n) sum_{g>=2} n_g d_g - K d_k)(.)'
SymMatrix build_s_tilde_multi(const Dataset& data, const std::vector<Vector>& deltas);

// Working response for the class-k lasso block (k >= 2), using the scaling from
// the exact block reduction:
// (1/(K n_k (n - n_k))) C^{1/2} [ (n-n_k) sum_{G_k} w_i - n_k sum_{not G_k} w_i
//                                 + K n_k sum_{g>=2, g != k} n_g d_g ]
Vector build_y_tilde_multi(const Dataset& data, int k, const SymMatrix& c_sqrt,
                           const std::vector<Vector>& deltas);

std::pair<ModelParams, FitTrace> fit_two_class(const Dataset& data, const Hyperparams& hp);
std::pair<ModelParams, FitTrace> fit_multi_class(const Dataset& data, const Hyperparams& hp);

// Penalized objective evaluators (gamma profiled out analytically).
double objective_two_class(const Dataset& data, const Vector& delta2, const SymMatrix& c,
                           double lambda1, double lambda2);
double objective_multi(const Dataset& data, const std::vector<Vector>& deltas, const SymMatrix& c,
                       double lambda1, double lambda2);
// Unprofiled two-class objective in the mean parameterization, penalty
// (1/2) lambda2 |mu1 - mu2|_1.
double objective_mu_two_class(const Dataset& data, const Vector& mu1, const Vector& mu2,
                              const SymMatrix& c, double lambda1, double lambda2);

int count_nonzero(const Vector& v, double threshold = 1e-8);
int count_nonzero(const Matrix& m, double threshold = 1e-8);

// BIC = -n ln|C| + tr(C S_tilde(delta)) + (v(delta) + v(C) + K - 1) ln n,
// with S_tilde rebuilt at the fitted deltas and v counting entries above 1e-8.
double bic(const ModelParams& model, const Dataset& data);

struct TuneEntry {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double bic = 0.0;
  bool ok = false;
  std::string error;
};

struct TuneResult {
  ModelParams best;
  FitTrace best_trace;
  double best_lambda1 = 0.0;
  double best_lambda2 = 0.0;
  double best_bic = 0.0;
  std::vector<TuneEntry> table;
};

// Fits every (lambda1, lambda2) pair and returns the BIC minimizer; exact BIC
// ties resolve to the lexicographically larger pair. Grid points may be
// evaluated concurrently (threads > 1) with results identical to sequential.
TuneResult tune(const Dataset& data, const std::vector<double>& lambda1_grid,
                const std::vector<double>& lambda2_grid, const Hyperparams& hp,
                int threads = 1);

// {0.01, 0.05, 0.1, 0.5, 1, 5, 10, 50} * sqrt(log p / n) * n
std::vector<double> default_lambda_grid(int p, int n);

}  // namespace gaqq
