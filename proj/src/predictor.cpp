#include "gaqq/predictor.hpp"

#include <cmath>

namespace gaqq {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

void require_class(const ModelParams& model, int k) {
  if (k < 1 || k > model.k_classes) throw InvalidInput("predict: class index out of range");
}

void require_x(const ModelParams& model, const Vector& x) {
  if (x.size() != model.p() - 1) throw InvalidInput("predict: x length must be p - 1");
}

}  // namespace

double predict_quantitative(const ModelParams& model, const Vector& x, int k) {
  require_class(model, k);
  require_x(model, x);
  return model.mu_y(k) + model.xy_slope().dot(x - model.mu_x(k));
}

double log_class_score(const ModelParams& model, const Vector& x, int k) {
  require_class(model, k);
  require_x(model, x);
  const int p = model.p();
  Vector w(p);
  w.head(p - 1) = x;
  w[p - 1] = predict_quantitative(model, x, k);
  const Vector centered = w - model.mu[k - 1];
  const double quad = centered.dot(model.c_hat.mat() * centered);
  return std::log(model.pi[k - 1]) -
         0.5 * (p * kLogTwoPi + model.log_det_sigma() + quad);
}

double lda_score(const ModelParams& model, const Vector& w, int k) {
  require_class(model, k);
  if (w.size() != model.p()) throw InvalidInput("lda_score: w length must be p");
  if (k == 1) return 0.0;
  const Vector& delta_k = model.delta[k - 2];
  const Vector centered = w - 0.5 * (model.mu[0] + model.mu[k - 1]);
  return std::log(model.pi[k - 1] / model.pi[0]) +
         model.k_classes * centered.dot(model.c_hat.mat() * delta_k);
}

Prediction predict(const ModelParams& model, const Vector& x) {
  require_x(model, x);
  const int kc = model.k_classes;
  Prediction pred;
  pred.per_class_y.resize(kc);
  pred.per_class_score.resize(kc);
  for (int k = 1; k <= kc; ++k) {
    pred.per_class_y[k - 1] = predict_quantitative(model, x, k);
    pred.per_class_score[k - 1] = log_class_score(model, x, k);
  }
  pred.z_hat = 1;
  for (int k = 2; k <= kc; ++k) {
    if (pred.per_class_score[k - 1] > pred.per_class_score[pred.z_hat - 1]) {
      pred.z_hat = k;
    }
  }
  pred.y_hat = pred.per_class_y[pred.z_hat - 1];
  return pred;
}

std::vector<Prediction> predict_batch(const ModelParams& model, const Matrix& xs) {
  if (xs.rows() > 0 && xs.cols() != model.p() - 1) {
    throw InvalidInput("predict_batch: feature columns must equal p - 1");
  }
  std::vector<Prediction> out;
  out.reserve(xs.rows());
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    out.push_back(predict(model, xs.row(i).transpose()));
  }
  return out;
}

ModelParams glda_baseline(const Dataset& train) {
  const int p = train.p();
  const int kc = train.k_classes;
  if (kc < 2) throw InvalidInput("glda_baseline: need at least two classes");
  if (train.n() <= kc) throw InvalidInput("glda_baseline: need n > K samples");

  std::vector<Vector> mu(kc);
  for (int k = 1; k <= kc; ++k) mu[k - 1] = train.class_mean(k);

  Matrix pooled = Matrix::Zero(p, p);
  Vector v(p);
  for (int i = 0; i < train.n(); ++i) {
    v = train.w.row(i).transpose() - mu[train.z[i] - 1];
    pooled.selfadjointView<Eigen::Lower>().rankUpdate(v, 1.0);
  }
  pooled.triangularView<Eigen::StrictlyUpper>() = pooled.transpose();
  pooled /= static_cast<double>(train.n() - kc);

  Vector pi(kc);
  for (int k = 0; k < kc; ++k) pi[k] = static_cast<double>(train.n_k[k]) / train.n();
  return ModelParams::from_covariance_pinv(std::move(mu), SymMatrix(pooled), std::move(pi));
}

}  // namespace gaqq
