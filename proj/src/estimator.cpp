#include "gaqq/estimator.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "gaqq/detail/parallel.hpp"

namespace gaqq {

namespace {

void require_fit_preconditions(const Dataset& data, const Hyperparams& hp, int expected_k) {
  if (expected_k > 0 && data.k_classes != expected_k) {
    throw InvalidInput("fit: dataset does not have the expected number of classes");
  }
  if (data.k_classes < 2) {
    throw InvalidInput("fit: need at least two classes");
  }
  for (int count : data.n_k) {
    if (count < 2) throw InvalidInput("fit: every class needs at least two samples");
  }
  if (hp.lambda1 < 0.0 || hp.lambda2 < 0.0) throw InvalidInput("fit: negative penalty");
  if (hp.tau1 <= 0.0 || hp.tau2 <= 0.0) throw InvalidInput("fit: tau1/tau2 must be positive");
  if (hp.max_outer < 1 || hp.lasso_max_iter < 1 || hp.glasso_max_iter < 1) {
    throw InvalidInput("fit: iteration caps must be positive");
  }
  if (hp.lasso_tol <= 0.0 || hp.glasso_tol <= 0.0) {
    throw InvalidInput("fit: solver tolerances must be positive");
  }
}

double l1_offdiag(const Matrix& m) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (i != j) sum += std::abs(m(i, j));
    }
  }
  return sum;
}

SymMatrix scatter_from_shifts(const Dataset& data, const std::vector<Vector>& class_shift) {
  const int p = data.p();
  const Vector wbar = data.overall_mean();
  Matrix s = Matrix::Zero(p, p);
  Vector v(p);
  for (int i = 0; i < data.n(); ++i) {
    v = data.w.row(i).transpose() - wbar + class_shift[data.z[i] - 1];
    s.selfadjointView<Eigen::Lower>().rankUpdate(v, 1.0);
  }
  s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
  return SymMatrix(s);
}

}  // namespace

SymMatrix build_s_tilde_two_class(const Dataset& data, const Vector& delta2) {
  if (data.k_classes != 2) throw InvalidInput("build_s_tilde_two_class: need K = 2");
  if (delta2.size() != data.p()) throw InvalidInput("build_s_tilde_two_class: delta length != p");
  const double n = data.n();
  std::vector<Vector> shift(2);
  shift[0] = -(2.0 * data.n_k[1] / n) * delta2;
  shift[1] = (2.0 * data.n_k[0] / n) * delta2;
  return scatter_from_shifts(data, shift);
}

Vector build_y_tilde_two_class(const Dataset& data, const SymMatrix& c_sqrt) {
  if (data.k_classes != 2) throw InvalidInput("build_y_tilde_two_class: need K = 2");
  if (c_sqrt.dim() != data.p()) throw InvalidInput("build_y_tilde_two_class: C^{1/2} dim != p");
  const double n1 = data.n_k[0];
  const double n2 = data.n_k[1];
  const Vector v = (n2 * data.class_sum(1) - n1 * data.class_sum(2)) / (2.0 * n1 * n2);
  return c_sqrt.mat() * v;
}

SymMatrix build_s_tilde_multi(const Dataset& data, const std::vector<Vector>& deltas) {
  const int k = data.k_classes;
  const int p = data.p();
  if (static_cast<int>(deltas.size()) != k - 1) {
    throw InvalidInput("build_s_tilde_multi: need K - 1 delta vectors");
  }
  for (const Vector& d : deltas) {
    if (d.size() != p) throw InvalidInput("build_s_tilde_multi: delta length != p");
  }
  const double n = data.n();
  Vector pooled = Vector::Zero(p);  // (K/n) sum_{g>=2} n_g delta_g
  for (int g = 2; g <= k; ++g) {
    pooled += (static_cast<double>(k) * data.n_k[g - 1] / n) * deltas[g - 2];
  }
  std::vector<Vector> shift(k);
  shift[0] = pooled;
  for (int g = 2; g <= k; ++g) {
    shift[g - 1] = pooled - static_cast<double>(k) * deltas[g - 2];
  }
  return scatter_from_shifts(data, shift);
}

Vector build_y_tilde_multi(const Dataset& data, int k, const SymMatrix& c_sqrt,
                           const std::vector<Vector>& deltas) {
  const int kc = data.k_classes;
  const int p = data.p();
  if (k < 2 || k > kc) throw InvalidInput("build_y_tilde_multi: class index must be in 2..K");
  if (c_sqrt.dim() != p) throw InvalidInput("build_y_tilde_multi: C^{1/2} dim != p");
  if (static_cast<int>(deltas.size()) != kc - 1) {
    throw InvalidInput("build_y_tilde_multi: need K - 1 delta vectors");
  }
  const double n = data.n();
  const double nk = data.n_k[k - 1];
  Vector total = Vector::Zero(p);
  for (int g = 1; g <= kc; ++g) total += data.class_sum(g);
  const Vector sum_k = data.class_sum(k);

  Vector m = (n - nk) * sum_k - nk * (total - sum_k);
  for (int g = 2; g <= kc; ++g) {
    if (g == k) continue;
    m += static_cast<double>(kc) * nk * data.n_k[g - 1] * deltas[g - 2];
  }
  m /= (static_cast<double>(kc) * nk * (n - nk));
  return c_sqrt.mat() * m;
}

double objective_two_class(const Dataset& data, const Vector& delta2, const SymMatrix& c,
                           double lambda1, double lambda2) {
  const SymMatrix s = build_s_tilde_two_class(data, delta2);
  const double trace = c.mat().cwiseProduct(s.mat()).sum();
  return -static_cast<double>(data.n()) * log_det_spd(c) + trace +
         lambda1 * l1_offdiag(c.mat()) + lambda2 * delta2.lpNorm<1>();
}

double objective_multi(const Dataset& data, const std::vector<Vector>& deltas, const SymMatrix& c,
                       double lambda1, double lambda2) {
  const SymMatrix s = build_s_tilde_multi(data, deltas);
  const double trace = c.mat().cwiseProduct(s.mat()).sum();
  double pen = 0.0;
  for (const Vector& d : deltas) pen += d.lpNorm<1>();
  return -static_cast<double>(data.n()) * log_det_spd(c) + trace +
         lambda1 * l1_offdiag(c.mat()) + lambda2 * pen;
}

double objective_mu_two_class(const Dataset& data, const Vector& mu1, const Vector& mu2,
                              const SymMatrix& c, double lambda1, double lambda2) {
  if (data.k_classes != 2) throw InvalidInput("objective_mu_two_class: need K = 2");
  double quad = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    const Vector v = data.w.row(i).transpose() - (data.z[i] == 1 ? mu1 : mu2);
    quad += v.dot(c.mat() * v);
  }
  return -static_cast<double>(data.n()) * log_det_spd(c) + quad +
         lambda1 * l1_offdiag(c.mat()) + 0.5 * lambda2 * (mu1 - mu2).lpNorm<1>();
}

void ModelParams::finalize_common() {
  const int dim = p();
  if (dim >= 2) {
    if (pseudo_inverse_mode_) {
      const SymMatrix sx(Matrix(sigma_hat.mat().topLeftCorner(dim - 1, dim - 1)));
      xy_slope_ = pinv_psd(sx).mat() * sigma_xy();
    } else {
      xy_slope_ = -c_xy() / c_y2();
    }
  } else {
    xy_slope_ = Vector();
  }
}

ModelParams ModelParams::from_precision(std::vector<Vector> mu, SymMatrix c_hat, Vector pi) {
  const int k = static_cast<int>(mu.size());
  if (k < 2) throw InvalidInput("ModelParams: need K >= 2 class means");
  if (pi.size() != k) throw InvalidInput("ModelParams: pi length != K");
  if (pi.minCoeff() <= 0.0 || std::abs(pi.sum() - 1.0) > 1e-8) {
    throw InvalidInput("ModelParams: priors must be positive and sum to 1");
  }
  const int dim = static_cast<int>(mu[0].size());
  for (const Vector& m : mu) {
    if (m.size() != dim) throw InvalidInput("ModelParams: inconsistent mean lengths");
  }
  if (c_hat.dim() != dim) throw InvalidInput("ModelParams: precision dim != mean length");

  ModelParams model;
  model.k_classes = k;
  model.mu = std::move(mu);
  model.c_hat = std::move(c_hat);
  model.sigma_hat = inv_spd(model.c_hat);
  model.pi = std::move(pi);
  model.delta.resize(k - 1);
  for (int g = 2; g <= k; ++g) {
    model.delta[g - 2] = (model.mu[g - 1] - model.mu[0]) / static_cast<double>(k);
  }
  model.pseudo_inverse_mode_ = false;
  model.log_det_sigma_ = log_det_spd(model.sigma_hat);
  model.finalize_common();
  return model;
}

ModelParams ModelParams::from_covariance_pinv(std::vector<Vector> mu, SymMatrix sigma, Vector pi) {
  const int k = static_cast<int>(mu.size());
  if (k < 2) throw InvalidInput("ModelParams: need K >= 2 class means");
  if (pi.size() != k || pi.minCoeff() <= 0.0 || std::abs(pi.sum() - 1.0) > 1e-8) {
    throw InvalidInput("ModelParams: bad priors");
  }
  ModelParams model;
  model.k_classes = k;
  model.mu = std::move(mu);
  model.sigma_hat = std::move(sigma);
  model.c_hat = pinv_psd(model.sigma_hat);
  model.pi = std::move(pi);
  model.delta.resize(k - 1);
  for (int g = 2; g <= k; ++g) {
    model.delta[g - 2] = (model.mu[g - 1] - model.mu[0]) / static_cast<double>(k);
  }
  model.pseudo_inverse_mode_ = true;
  model.log_det_sigma_ = log_pseudo_det_psd(model.sigma_hat);
  model.finalize_common();
  return model;
}

ModelParams ModelParams::from_precision_pseudo(std::vector<Vector> mu, SymMatrix c_hat,
                                               Vector pi) {
  const int k = static_cast<int>(mu.size());
  if (k < 2) throw InvalidInput("ModelParams: need K >= 2 class means");
  if (pi.size() != k || pi.minCoeff() <= 0.0 || std::abs(pi.sum() - 1.0) > 1e-8) {
    throw InvalidInput("ModelParams: bad priors");
  }
  ModelParams model;
  model.k_classes = k;
  model.mu = std::move(mu);
  model.c_hat = std::move(c_hat);
  model.sigma_hat = pinv_psd(model.c_hat);
  model.pi = std::move(pi);
  model.delta.resize(k - 1);
  for (int g = 2; g <= k; ++g) {
    model.delta[g - 2] = (model.mu[g - 1] - model.mu[0]) / static_cast<double>(k);
  }
  model.pseudo_inverse_mode_ = true;
  model.log_det_sigma_ = log_pseudo_det_psd(model.sigma_hat);
  model.finalize_common();
  return model;
}

namespace {

struct OuterState {
  GlassoSolution glasso;
  bool have_glasso = false;
};

ModelParams assemble_model(const Dataset& data, const std::vector<Vector>& mu,
                           const SymMatrix& c, std::vector<Vector> deltas) {
  Vector pi(data.k_classes);
  for (int k = 0; k < data.k_classes; ++k) {
    pi[k] = static_cast<double>(data.n_k[k]) / data.n();
  }
  ModelParams model = ModelParams::from_precision(mu, c, pi);
  model.delta = std::move(deltas);  // keep the solver's exact zeros
  return model;
}

}  // namespace

std::pair<ModelParams, FitTrace> fit_two_class(const Dataset& data, const Hyperparams& hp) {
  require_fit_preconditions(data, hp, 2);
  const double n = data.n();
  const double n1 = data.n_k[0];
  const double n2 = data.n_k[1];
  const Vector wbar = data.overall_mean();
  const Vector wbar1 = data.class_mean(1);
  const Vector wbar2 = data.class_mean(2);

  // Exact block reduction: the delta step of the joint objective carries a
  // leading factor 4 n1 n2 / n, so the plain lasso is solved with
  // lambda2 * n / (4 n1 n2).
  const double lambda2_eff = hp.lambda2 * n / (4.0 * n1 * n2);

  Vector delta = 0.5 * (wbar1 - wbar2);
  FitTrace trace;
  OuterState state;
  SymMatrix prev_c;

  for (int t = 1; t <= hp.max_outer; ++t) {
    const SymMatrix s_tilde = build_s_tilde_two_class(data, delta);
    GlassoProblem gp{s_tilde, data.n(), hp.lambda1, hp.glasso_tol, hp.glasso_max_iter};
    GlassoSolution gl = solve_glasso(gp, state.have_glasso ? &state.glasso : nullptr);

    const SymMatrix c_sqrt = sqrt_spd(gl.c_hat);
    LassoProblem lp;
    lp.design = c_sqrt.mat();
    lp.response = build_y_tilde_two_class(data, c_sqrt);
    lp.penalty = lambda2_eff;
    lp.warm_start = delta;
    lp.tol = hp.lasso_tol;
    lp.max_iter = hp.lasso_max_iter;
    const LassoSolution ls = solve_lasso(lp);

    const double delta_step = (ls.beta - delta).squaredNorm();
    trace.delta_step_sq.push_back(delta_step);
    double c_step = 0.0;
    if (t >= 2) {
      c_step = (gl.c_hat.mat() - prev_c.mat()).squaredNorm();
      trace.c_step_fro2.push_back(c_step);
    }
    delta = ls.beta;
    prev_c = gl.c_hat;
    state.glasso = std::move(gl);
    state.have_glasso = true;
    trace.objective.push_back(
        objective_two_class(data, delta, state.glasso.c_hat, hp.lambda1, hp.lambda2));
    trace.iterations = t;
    if (t >= 2 && c_step < hp.tau1 && delta_step < hp.tau2) {
      trace.converged = true;
      break;
    }
  }

  const Vector gamma = wbar + ((n2 - n1) / n) * delta;
  std::vector<Vector> mu{gamma + delta, gamma - delta};
  // Stored offsets use the uniform convention delta_k = (mu_k - mu_1)/K.
  std::vector<Vector> deltas{-delta};
  return {assemble_model(data, mu, state.glasso.c_hat, std::move(deltas)), trace};
}

std::pair<ModelParams, FitTrace> fit_multi_class(const Dataset& data, const Hyperparams& hp) {
  require_fit_preconditions(data, hp, 0);
  const int kc = data.k_classes;
  const double n = data.n();
  const Vector wbar = data.overall_mean();

  std::vector<Vector> deltas(kc - 1);
  std::vector<double> lambda2_eff(kc - 1);
  for (int g = 2; g <= kc; ++g) {
    deltas[g - 2] = (data.class_mean(g) - data.class_mean(1)) / static_cast<double>(kc);
    const double ng = data.n_k[g - 1];
    lambda2_eff[g - 2] = hp.lambda2 * n / (static_cast<double>(kc) * kc * ng * (n - ng));
  }

  FitTrace trace;
  OuterState state;
  SymMatrix prev_c;

  for (int t = 1; t <= hp.max_outer; ++t) {
    const SymMatrix s_tilde = build_s_tilde_multi(data, deltas);
    GlassoProblem gp{s_tilde, data.n(), hp.lambda1, hp.glasso_tol, hp.glasso_max_iter};
    GlassoSolution gl = solve_glasso(gp, state.have_glasso ? &state.glasso : nullptr);
    const SymMatrix c_sqrt = sqrt_spd(gl.c_hat);

    // K - 1 lasso blocks, Gauss-Seidel: each working response sees the
    // freshest other deltas.
    double delta_step = 0.0;
    for (int g = 2; g <= kc; ++g) {
      LassoProblem lp;
      lp.design = c_sqrt.mat();
      lp.response = build_y_tilde_multi(data, g, c_sqrt, deltas);
      lp.penalty = lambda2_eff[g - 2];
      lp.warm_start = deltas[g - 2];
      lp.tol = hp.lasso_tol;
      lp.max_iter = hp.lasso_max_iter;
      const LassoSolution ls = solve_lasso(lp);
      delta_step += (ls.beta - deltas[g - 2]).squaredNorm();
      deltas[g - 2] = ls.beta;
    }

    trace.delta_step_sq.push_back(delta_step);
    double c_step = 0.0;
    if (t >= 2) {
      c_step = (gl.c_hat.mat() - prev_c.mat()).squaredNorm();
      trace.c_step_fro2.push_back(c_step);
    }
    prev_c = gl.c_hat;
    state.glasso = std::move(gl);
    state.have_glasso = true;
    trace.objective.push_back(
        objective_multi(data, deltas, state.glasso.c_hat, hp.lambda1, hp.lambda2));
    trace.iterations = t;
    if (t >= 2 && c_step < hp.tau1 && delta_step < hp.tau2) {
      trace.converged = true;
      break;
    }
  }

  Vector pooled = Vector::Zero(data.p());  // (K/n) sum n_g delta_g
  Vector delta_total = Vector::Zero(data.p());
  for (int g = 2; g <= kc; ++g) {
    pooled += (static_cast<double>(kc) * data.n_k[g - 1] / n) * deltas[g - 2];
    delta_total += deltas[g - 2];
  }
  const Vector gamma = wbar + delta_total - pooled;
  std::vector<Vector> mu(kc);
  mu[0] = gamma - delta_total;
  for (int g = 2; g <= kc; ++g) {
    mu[g - 1] = gamma - delta_total + static_cast<double>(kc) * deltas[g - 2];
  }
  return {assemble_model(data, mu, state.glasso.c_hat, std::move(deltas)), trace};
}

int count_nonzero(const Vector& v, double threshold) {
  int count = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > threshold) ++count;
  }
  return count;
}

int count_nonzero(const Matrix& m, double threshold) {
  int count = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (std::abs(m(i, j)) > threshold) ++count;
    }
  }
  return count;
}

double bic(const ModelParams& model, const Dataset& data) {
  if (model.k_classes != data.k_classes || model.p() != data.p()) {
    throw InvalidInput("bic: model/data shape mismatch");
  }
  const double n = data.n();
  const SymMatrix s_tilde = build_s_tilde_multi(data, model.delta);
  const double trace = model.c_hat.mat().cwiseProduct(s_tilde.mat()).sum();
  int v_delta = 0;
  for (const Vector& d : model.delta) v_delta += count_nonzero(d);
  const int v_c = count_nonzero(model.c_hat.mat());
  const double df = v_delta + v_c + model.k_classes - 1;
  return -n * log_det_spd(model.c_hat) + trace + df * std::log(n);
}

TuneResult tune(const Dataset& data, const std::vector<double>& lambda1_grid,
                const std::vector<double>& lambda2_grid, const Hyperparams& hp, int threads) {
  if (lambda1_grid.empty() || lambda2_grid.empty()) {
    throw InvalidInput("tune: empty lambda grid");
  }
  struct Slot {
    TuneEntry entry;
    std::optional<std::pair<ModelParams, FitTrace>> fit;
  };
  const int count = static_cast<int>(lambda1_grid.size() * lambda2_grid.size());
  std::vector<Slot> slots(count);

  const int n2grid = static_cast<int>(lambda2_grid.size());
  detail::parallel_for(count, threads, [&](int idx) {
    const double l1 = lambda1_grid[idx / n2grid];
    const double l2 = lambda2_grid[idx % n2grid];
    Slot& slot = slots[idx];
    slot.entry.lambda1 = l1;
    slot.entry.lambda2 = l2;
    try {
      Hyperparams local = hp;
      local.lambda1 = l1;
      local.lambda2 = l2;
      auto fit = data.k_classes == 2 ? fit_two_class(data, local) : fit_multi_class(data, local);
      slot.entry.bic = bic(fit.first, data);
      slot.entry.ok = true;
      slot.fit = std::move(fit);
    } catch (const Error& e) {
      slot.entry.ok = false;
      slot.entry.error = e.what();
      slot.entry.bic = std::numeric_limits<double>::quiet_NaN();
    }
  });

  TuneResult result;
  int best = -1;
  for (int idx = 0; idx < count; ++idx) {
    result.table.push_back(slots[idx].entry);
    if (!slots[idx].entry.ok) continue;
    if (best < 0) {
      best = idx;
      continue;
    }
    const TuneEntry& cur = slots[idx].entry;
    const TuneEntry& inc = slots[best].entry;
    if (cur.bic < inc.bic ||
        (cur.bic == inc.bic &&
         (cur.lambda1 > inc.lambda1 ||
          (cur.lambda1 == inc.lambda1 && cur.lambda2 > inc.lambda2)))) {
      best = idx;
    }
  }
  if (best < 0) {
    std::string detail = "tune: every grid point failed";
    for (const TuneEntry& e : result.table) {
      detail += "\n  lambda1=" + std::to_string(e.lambda1) +
                " lambda2=" + std::to_string(e.lambda2) + ": " + e.error;
    }
    throw TuningFailed(detail);
  }
  result.best = std::move(slots[best].fit->first);
  result.best_trace = std::move(slots[best].fit->second);
  result.best_lambda1 = slots[best].entry.lambda1;
  result.best_lambda2 = slots[best].entry.lambda2;
  result.best_bic = slots[best].entry.bic;
  return result;
}

std::vector<double> default_lambda_grid(int p, int n) {
  if (p < 2 || n < 1) throw InvalidInput("default_lambda_grid: need p >= 2, n >= 1");
  const double anchor = std::sqrt(std::log(static_cast<double>(p)) / n) * n;
  std::vector<double> grid;
  for (double mult : {0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 10.0, 50.0}) {
    grid.push_back(mult * anchor);
  }
  return grid;
}

}  // namespace gaqq
