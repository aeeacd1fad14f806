#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gaqq/predictor.hpp"
#include "gaqq/rng.hpp"
#include "test_support.hpp"

using namespace gaqq;
using namespace gaqq::testsupport;

namespace {

ModelParams random_model(int p, int k, SplitMix64& rng, double mean_spread = 1.5) {
  std::vector<Vector> mu;
  for (int g = 0; g < k; ++g) mu.push_back(mean_spread * random_vector(p, rng));
  Vector pi(k);
  for (int g = 0; g < k; ++g) pi[g] = rng.next_uniform(0.2, 1.0);
  pi /= pi.sum();
  return ModelParams::from_precision(std::move(mu), random_spd(p, rng), std::move(pi));
}

// Independent dense Gaussian log density evaluated from Sigma directly.
double dense_log_density(const Vector& w, const Vector& mu, const SymMatrix& sigma) {
  const int p = static_cast<int>(w.size());
  const SymMatrix prec = inv_spd(sigma);
  const Vector c = w - mu;
  return -0.5 * (p * std::log(2.0 * 3.14159265358979323846) + log_det_spd(sigma) +
                 c.dot(prec.mat() * c));
}

}  // namespace

TEST_CASE("no cross block: the class mean is the prediction for every x") {
  SplitMix64 rng(1);
  // block-diagonal precision: C_Xy = 0
  Matrix c = Matrix::Identity(4, 4);
  c(0, 1) = c(1, 0) = 0.3;
  std::vector<Vector> mu{random_vector(4, rng), random_vector(4, rng)};
  Vector pi(2);
  pi << 0.4, 0.6;
  const ModelParams model = ModelParams::from_precision(mu, SymMatrix(c), pi);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector x = random_vector(3, rng);
    CHECK(predict_quantitative(model, x, 1) == doctest::Approx(mu[0][3]).epsilon(1e-12));
    CHECK(predict_quantitative(model, x, 2) == doctest::Approx(mu[1][3]).epsilon(1e-12));
  }
}

TEST_CASE("prediction at the class center is the class response mean") {
  SplitMix64 rng(3);
  const ModelParams model = random_model(5, 3, rng);
  for (int k = 1; k <= 3; ++k) {
    CHECK(predict_quantitative(model, model.mu_x(k), k) ==
          doctest::Approx(model.mu_y(k)).epsilon(1e-12));
  }
}

TEST_CASE("covariance and precision forms of the conditional slope agree") {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const ModelParams model = random_model(5, 2, rng);
    const Vector x = random_vector(4, rng);
    for (int k = 1; k <= 2; ++k) {
      const Vector slope_cov = inv_spd(SymMatrix(model.sigma_x())).mat() * model.sigma_xy();
      const double via_cov = model.mu_y(k) + slope_cov.dot(x - model.mu_x(k));
      CHECK(predict_quantitative(model, x, k) == doctest::Approx(via_cov).epsilon(1e-8));
    }
  }
}

TEST_CASE("log scores: equal means and priors tie, prior ratio separates") {
  SplitMix64 rng(7);
  const Vector mu = random_vector(4, rng);
  const SymMatrix c = random_spd(4, rng);
  Vector pi_eq(2);
  pi_eq << 0.5, 0.5;
  const ModelParams eq = ModelParams::from_precision({mu, mu}, c, pi_eq);
  const Vector x = random_vector(3, rng);
  CHECK(log_class_score(eq, x, 1) == doctest::Approx(log_class_score(eq, x, 2)).epsilon(1e-13));

  Vector pi_skew(2);
  pi_skew << 0.9, 0.1;
  const ModelParams skew = ModelParams::from_precision({mu, mu}, c, pi_skew);
  CHECK(log_class_score(skew, x, 1) - log_class_score(skew, x, 2) ==
        doctest::Approx(std::log(9.0)).epsilon(1e-12));
}

TEST_CASE("log score matches an independent dense density evaluation") {
  SplitMix64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const ModelParams model = random_model(4, 2, rng);
    const Vector x = random_vector(3, rng);
    for (int k = 1; k <= 2; ++k) {
      Vector w(4);
      w.head(3) = x;
      w[3] = predict_quantitative(model, x, k);
      const double expected =
          std::log(model.pi[k - 1]) + dense_log_density(w, model.mu[k - 1], model.sigma_hat);
      CHECK(log_class_score(model, x, k) == doctest::Approx(expected).epsilon(1e-10));
    }
  }
}

TEST_CASE("lda_score conventions") {
  SplitMix64 rng(11);
  const Vector mu = random_vector(4, rng);
  const SymMatrix c = random_spd(4, rng);
  Vector pi(2);
  pi << 0.5, 0.5;
  // identical means: delta = 0, so every score is 0
  const ModelParams same = ModelParams::from_precision({mu, mu}, c, pi);
  const Vector w = random_vector(4, rng);
  CHECK(lda_score(same, w, 1) == 0.0);
  CHECK(lda_score(same, w, 2) == doctest::Approx(0.0).epsilon(1e-13));

  // midpoint with equal priors sits on the decision boundary
  const ModelParams model = random_model(4, 2, rng);
  Vector pi_eq(2);
  pi_eq << 0.5, 0.5;
  const ModelParams eq = ModelParams::from_precision(model.mu, model.c_hat, pi_eq);
  const Vector mid = 0.5 * (eq.mu[0] + eq.mu[1]);
  CHECK(lda_score(eq, mid, 2) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("well-separated two-class prediction") {
  const int p = 4;
  Vector mu1 = Vector::Zero(p);
  Vector mu2 = Vector::Zero(p);
  mu2[p - 1] = 10.0;
  Vector pi(2);
  pi << 0.5, 0.5;
  const ModelParams model = ModelParams::from_precision({mu1, mu2}, SymMatrix::identity(p), pi);
  const Prediction pred = predict(model, Vector::Zero(p - 1));
  CHECK(pred.z_hat == 1);
  CHECK(pred.y_hat == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("identical classes tie-break to the smallest index") {
  SplitMix64 rng(13);
  const Vector mu = random_vector(4, rng);
  Vector pi(3);
  pi << 1.0 / 3, 1.0 / 3, 1.0 / 3;
  const ModelParams model = ModelParams::from_precision({mu, mu, mu}, random_spd(4, rng), pi);
  const Prediction pred = predict(model, random_vector(3, rng));
  CHECK(pred.z_hat == 1);
  CHECK(pred.y_hat == pred.per_class_y[0]);
}

TEST_CASE("prediction invariants hold") {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 2 + rng.next_below(3);
    const ModelParams model = random_model(5, k, rng);
    const Vector x = random_vector(4, rng);
    const Prediction pred = predict(model, x);
    int argmax = 1;
    for (int g = 2; g <= k; ++g) {
      if (pred.per_class_score[g - 1] > pred.per_class_score[argmax - 1]) argmax = g;
    }
    CHECK(pred.z_hat == argmax);
    CHECK(pred.y_hat == pred.per_class_y[pred.z_hat - 1]);
  }
}

TEST_CASE("density argmax equals the LDA route") {
  SplitMix64 rng(19);
  for (int trial = 0; trial < 300; ++trial) {
    const int k = 2 + rng.next_below(3);
    const ModelParams model = random_model(4, k, rng);
    const Vector x = random_vector(3, rng);
    const Prediction pred = predict(model, x);
    // LDA route: form w = (x', y_hat)' with the density winner's y, then
    // classify by the linear scores.
    Vector w(4);
    w.head(3) = x;
    w[3] = pred.y_hat;
    int lda_winner = 1;
    double best = lda_score(model, w, 1);
    for (int g = 2; g <= k; ++g) {
      const double s = lda_score(model, w, g);
      if (s > best) {
        best = s;
        lda_winner = g;
      }
    }
    CHECK(lda_winner == pred.z_hat);
  }
}

TEST_CASE("two-class marginal LDA statistic agrees in sign") {
  SplitMix64 rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    const ModelParams model = random_model(4, 2, rng);
    const Vector x = random_vector(3, rng);
    const double gap = log_class_score(model, x, 1) - log_class_score(model, x, 2);
    const Matrix sigma_x_inv = inv_spd(SymMatrix(model.sigma_x())).mat();
    const Vector mean_gap = model.mu_x(1) - model.mu_x(2);
    const double marginal = std::log(model.pi[0] / model.pi[1]) -
                            0.5 * (model.mu_x(1) + model.mu_x(2)).dot(sigma_x_inv * mean_gap) +
                            x.dot(sigma_x_inv * mean_gap);
    if (std::abs(gap) > 1e-10 && std::abs(marginal) > 1e-10) {
      CHECK((gap > 0) == (marginal > 0));
    }
  }
}

TEST_CASE("predict_batch basics") {
  SplitMix64 rng(29);
  const ModelParams model = random_model(4, 2, rng);
  CHECK(predict_batch(model, Matrix(0, 3)).empty());

  const Matrix xs = random_matrix(6, 3, rng);
  const std::vector<Prediction> batch = predict_batch(model, xs);
  REQUIRE(batch.size() == 6);
  const Prediction single = predict(model, xs.row(0).transpose());
  CHECK(batch[0].y_hat == single.y_hat);
  CHECK(batch[0].z_hat == single.z_hat);

  Matrix reversed(6, 3);
  for (int i = 0; i < 6; ++i) reversed.row(i) = xs.row(5 - i);
  const std::vector<Prediction> rev = predict_batch(model, reversed);
  for (int i = 0; i < 6; ++i) {
    CHECK(rev[i].z_hat == batch[5 - i].z_hat);
    CHECK(rev[i].y_hat == batch[5 - i].y_hat);
  }
}

TEST_CASE("translation of the feature block leaves decisions unchanged") {
  SplitMix64 rng(31);
  const ModelParams model = random_model(5, 3, rng);
  const Vector shift = random_vector(4, rng);
  std::vector<Vector> mu_shifted = model.mu;
  for (Vector& m : mu_shifted) m.head(4) += shift;
  const ModelParams shifted = ModelParams::from_precision(mu_shifted, model.c_hat, model.pi);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector x = random_vector(4, rng);
    const Prediction a = predict(model, x);
    const Prediction b = predict(shifted, x + shift);
    CHECK(a.z_hat == b.z_hat);
    CHECK(a.y_hat == doctest::Approx(b.y_hat).epsilon(1e-10));
  }
}

TEST_CASE("glda baseline: full-rank pooled covariance inverts exactly") {
  SplitMix64 rng(37);
  const Dataset d = random_dataset(4, {40, 50}, rng);
  const ModelParams model = glda_baseline(d);
  CHECK(max_abs(Matrix(model.c_hat.mat() * model.sigma_hat.mat() - Matrix::Identity(4, 4))) <=
        1e-8);
  for (int k = 1; k <= 2; ++k) {
    CHECK(max_abs(Vector(model.mu[k - 1] - d.class_mean(k))) <= 1e-12);
  }
  CHECK(model.pi[0] == doctest::Approx(40.0 / 90.0).epsilon(1e-14));
}

TEST_CASE("glda baseline: p > n uses the Moore-Penrose pseudo-inverse") {
  SplitMix64 rng(41);
  const Dataset d = random_dataset(12, {4, 4}, rng);
  const ModelParams model = glda_baseline(d);
  const Matrix sigma = model.sigma_hat.mat();
  const Matrix c = model.c_hat.mat();
  CHECK(max_abs(Matrix(sigma * c * sigma - sigma)) <= 1e-8 * (1.0 + max_abs(sigma)));
  CHECK(max_abs(Matrix(c * sigma * c - c)) <= 1e-8 * (1.0 + max_abs(c)));
  // still usable for prediction
  const Prediction pred = predict(model, random_vector(11, rng));
  CHECK(pred.z_hat >= 1);
  CHECK(std::isfinite(pred.y_hat));
}

TEST_CASE("glda with two identical classes falls back to the prior tie-break") {
  SplitMix64 rng(43);
  Matrix base = random_matrix(6, 3, rng);
  Matrix w(12, 3);
  std::vector<int> z;
  for (int i = 0; i < 12; ++i) {
    w.row(i) = base.row(i % 6);
    z.push_back(i < 6 ? 1 : 2);
  }
  const Dataset d = Dataset::create(std::move(w), std::move(z));
  const ModelParams model = glda_baseline(d);
  CHECK(max_abs(model.delta[0]) <= 1e-12);
  for (int trial = 0; trial < 10; ++trial) {
    // equal priors and equal scores everywhere: smallest index wins
    CHECK(predict(model, random_vector(2, rng)).z_hat == 1);
  }
}

TEST_CASE("input validation") {
  SplitMix64 rng(47);
  const ModelParams model = random_model(4, 2, rng);
  CHECK_THROWS_AS(predict_quantitative(model, Vector::Zero(2), 1), InvalidInput);
  CHECK_THROWS_AS(predict_quantitative(model, Vector::Zero(3), 0), InvalidInput);
  CHECK_THROWS_AS(predict_quantitative(model, Vector::Zero(3), 3), InvalidInput);
  CHECK_THROWS_AS(lda_score(model, Vector::Zero(3), 1), InvalidInput);
  CHECK_THROWS_AS(predict(model, Vector::Zero(4)), InvalidInput);
  CHECK_THROWS_AS(predict_batch(model, Matrix::Zero(2, 2)), InvalidInput);
}
