#pragma once

#include <vector>

#include "gaqq/dataset.hpp"
#include "gaqq/estimator.hpp"

namespace gaqq {

struct Prediction {
  double y_hat = 0.0;
  int z_hat = 0;            // 1..K, exact score ties resolve to the smallest index
  Vector per_class_y;       // conditional-mean prediction per class
  Vector per_class_score;   // ln(pi_k) + log density of (x', y_k)'
};

// Conditional mean of y given X = x under class k:
// mu_ky + Sigma_Xy' Sigma_X^{-1} (x - mu_kX), with the slope taken from the
// model's cached form (precision identity, or pseudo-inverse blocks for GLDA).
double predict_quantitative(const ModelParams& model, const Vector& x, int k);

// ln(pi_k) + log N((x', y_k)'; mu_k, Sigma) with y_k from predict_quantitative.
double log_class_score(const ModelParams& model, const Vector& x, int k);

// ln(pi_k / pi_1) + K (w - (mu_1 + mu_k)/2)' C delta_k; returns 0 for k = 1.
double lda_score(const ModelParams& model, const Vector& w, int k);

Prediction predict(const ModelParams& model, const Vector& x);
std::vector<Prediction> predict_batch(const ModelParams& model, const Matrix& xs);

// Baseline: class means, pooled within-class sample covariance and its
// Moore-Penrose pseudo-inverse as the precision estimate.
ModelParams glda_baseline(const Dataset& train);

}  // namespace gaqq
