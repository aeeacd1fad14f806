#include "gaqq/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <optional>
#include <sstream>

#include "gaqq/detail/parallel.hpp"
#include "gaqq/predictor.hpp"

namespace gaqq {

namespace {

uint64_t bits_of(double x) {
  uint64_t out;
  std::memcpy(&out, &x, sizeof(out));
  return out;
}

}  // namespace

std::string ScenarioSpec::id() const {
  std::ostringstream os;
  const int m = static_cast<int>(precision_model) + 1;
  if (multi_class) {
    os << "t3-m" << m << "-p" << p << "-k" << k_classes << "-n" << n_per_class;
  } else {
    os << "t1-m" << m << "-s" << (sparsity == MeanSparsity::S1 ? 1 : 2) << "-p" << p << "-n"
       << n1 << "x" << n2;
  }
  if (test_per_class > 0) os << "-test" << test_per_class;
  if (mean_scale != 1.0) os << "-scale" << mean_scale;
  return os.str();
}

uint64_t ScenarioSpec::hash() const {
  uint64_t h = 0x6761717173696dull;  // arbitrary fixed tag
  for (uint64_t field :
       {static_cast<uint64_t>(static_cast<int>(precision_model) + 1), static_cast<uint64_t>(p),
        static_cast<uint64_t>(multi_class ? 1 : 0),
        static_cast<uint64_t>(sparsity == MeanSparsity::S1 ? 1 : 2), static_cast<uint64_t>(n1),
        static_cast<uint64_t>(n2), static_cast<uint64_t>(k_classes),
        static_cast<uint64_t>(n_per_class), static_cast<uint64_t>(test_per_class),
        bits_of(mean_scale)}) {
    h = mix64(h ^ field);
  }
  return h;
}

int ScenarioSpec::train_size(int k) const {
  if (multi_class) return n_per_class;
  return k == 1 ? n1 : n2;
}

int ScenarioSpec::test_size(int k) const {
  return test_per_class > 0 ? test_per_class : train_size(k);
}

SymMatrix make_precision(PrecisionModel model, int p, SplitMix64& rng) {
  if (p < 1) throw InvalidInput("make_precision: p must be >= 1");
  switch (model) {
    case PrecisionModel::M1:
      return SymMatrix::identity(p);
    case PrecisionModel::M2: {
      Matrix c(p, p);
      for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) c(i, j) = std::pow(0.6, std::abs(i - j));
      }
      return SymMatrix(c);
    }
    case PrecisionModel::M3: {
      const Matrix base = make_precision(PrecisionModel::M2, p, rng).mat();
      std::vector<int> perm(p);
      std::iota(perm.begin(), perm.end(), 0);
      for (int i = p - 1; i >= 1; --i) {
        std::swap(perm[i], perm[rng.next_below(i + 1)]);
      }
      Matrix c(p, p);
      for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) c(i, j) = base(perm[i], perm[j]);
      }
      return SymMatrix(c);
    }
    case PrecisionModel::M4: {
      if (p < 6) throw InvalidInput("make_precision: M4 needs p >= 6 for the 5x5 block");
      Matrix c = Matrix::Identity(p, p);
      for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) c(i, j) = i == j ? 1.0 : 0.6;
      }
      return SymMatrix(c);
    }
    case PrecisionModel::M5: {
      Matrix theta = Matrix::Zero(p, p);
      // Upper triangle in row-major order; both the Bernoulli and value
      // uniforms are always drawn so the stream layout is outcome-free.
      for (int i = 0; i < p; ++i) {
        for (int j = i + 1; j < p; ++j) {
          const bool active = rng.next_bernoulli(0.15);
          const double value = rng.next_uniform(-1.0, 1.0);
          if (active) {
            theta(i, j) = value;
            theta(j, i) = value;
          }
        }
      }
      const double lmin = sym_eig(SymMatrix(theta)).values.minCoeff();
      double alpha = 0.1;
      while (lmin + alpha < 0.05) alpha += 0.1;
      theta += alpha * Matrix::Identity(p, p);
      return SymMatrix(theta);
    }
  }
  throw InvalidInput("make_precision: unknown model");
}

std::pair<Vector, Vector> make_means_two_class(int p, MeanSparsity sparsity, SplitMix64& rng) {
  if (p < 4) throw InvalidInput("make_means_two_class: p must be >= 4");
  const double zero_frac = sparsity == MeanSparsity::S1 ? 0.25 : 0.75;
  const int zeros = static_cast<int>(std::lround(zero_frac * p));
  // Partial Fisher-Yates: the first `zeros` slots become the zero positions.
  std::vector<int> idx(p);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < zeros; ++i) {
    std::swap(idx[i], idx[i + rng.next_below(p - i)]);
  }
  std::vector<bool> is_zero(p, false);
  for (int i = 0; i < zeros; ++i) is_zero[idx[i]] = true;
  Vector mu2 = Vector::Zero(p);
  for (int j = 0; j < p; ++j) {
    if (!is_zero[j]) mu2[j] = rng.next_uniform(0.0, 2.0);
  }
  return {Vector::Zero(p), mu2};
}

std::vector<Vector> make_means_multi(int p, int k_classes, SplitMix64& rng) {
  if (k_classes < 2) throw InvalidInput("make_means_multi: need K >= 2");
  if (p < 2 * k_classes + 6) throw InvalidInput("make_means_multi: need p >= 2K + 6");
  std::vector<Vector> mu(k_classes, Vector::Zero(p));
  for (int k = 1; k <= k_classes; ++k) {
    for (int j = 2 * k - 1; j <= 2 * k + 6; ++j) {
      mu[k - 1][j - 1] = 0.5 * k + rng.next_uniform(-1.0, 1.0);
    }
  }
  return mu;
}

Matrix sample_mvn(const Vector& mu, const SymMatrix& precision, int n, SplitMix64& rng) {
  if (n < 0) throw InvalidInput("sample_mvn: negative sample count");
  if (mu.size() != precision.dim()) throw InvalidInput("sample_mvn: dimension mismatch");
  const SymMatrix cov = inv_spd(precision);
  const Matrix chol = chol_lower_spd(cov);
  const int p = precision.dim();
  Matrix out(n, p);
  Vector z(p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) z[j] = rng.next_normal();
    out.row(i) = (mu + chol * z).transpose();
  }
  return out;
}

double misclassification_error(const std::vector<int>& truth, const std::vector<int>& pred) {
  if (truth.empty() || truth.size() != pred.size()) {
    throw InvalidInput("misclassification_error: label vectors must match and be nonempty");
  }
  int wrong = 0;
  for (size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] != pred[i]) ++wrong;
  }
  return static_cast<double>(wrong) / truth.size();
}

double rmspe(const Vector& truth, const Vector& pred) {
  if (truth.size() == 0 || truth.size() != pred.size()) {
    throw InvalidInput("rmspe: value vectors must match and be nonempty");
  }
  return std::sqrt((truth - pred).squaredNorm() / truth.size());
}

namespace {

struct Truth {
  SymMatrix precision;
  std::vector<Vector> mu;
};

// Draw order per replication stream: precision structure, class means,
// training rows class by class, then test rows class by class.
SimulatedData generate(const ScenarioSpec& spec, int rep_index) {
  if (spec.p < 2) throw InvalidInput("scenario: p must be >= 2");
  const int kc = spec.num_classes();
  for (int k = 1; k <= kc; ++k) {
    if (spec.train_size(k) < 2 || spec.test_size(k) < 2) {
      throw InvalidInput("scenario: class sizes must be >= 2");
    }
  }
  SplitMix64 rng(derive_stream(spec.seed, spec.hash(), static_cast<uint64_t>(rep_index)));

  Truth truth;
  truth.precision = make_precision(spec.precision_model, spec.p, rng);
  if (spec.multi_class) {
    truth.mu = make_means_multi(spec.p, spec.k_classes, rng);
  } else {
    auto [mu1, mu2] = make_means_two_class(spec.p, spec.sparsity, rng);
    truth.mu = {std::move(mu1), std::move(mu2)};
  }
  if (spec.mean_scale != 1.0) {
    for (int k = 1; k < kc; ++k) {
      truth.mu[k] = truth.mu[0] + spec.mean_scale * (truth.mu[k] - truth.mu[0]);
    }
  }

  auto sample_split = [&](bool test) {
    int total = 0;
    for (int k = 1; k <= kc; ++k) total += test ? spec.test_size(k) : spec.train_size(k);
    Matrix w(total, spec.p);
    std::vector<int> z(total);
    int at = 0;
    for (int k = 1; k <= kc; ++k) {
      const int rows = test ? spec.test_size(k) : spec.train_size(k);
      w.middleRows(at, rows) = sample_mvn(truth.mu[k - 1], truth.precision, rows, rng);
      std::fill(z.begin() + at, z.begin() + at + rows, k);
      at += rows;
    }
    return Dataset::create(std::move(w), std::move(z));
  };

  SimulatedData out{sample_split(false), sample_split(true)};
  return out;
}

}  // namespace

SimulatedData simulate_scenario(const ScenarioSpec& spec, int rep_index) {
  return generate(spec, rep_index);
}

RepOutcome run_replication(const ScenarioSpec& spec, Method method, const BenchmarkConfig& config,
                           int rep_index) {
  const SimulatedData data = generate(spec, rep_index);

  ModelParams model;
  if (method == Method::GLDA) {
    model = glda_baseline(data.train);
  } else {
    std::vector<double> g1 = config.lambda1_grid;
    std::vector<double> g2 = config.lambda2_grid;
    if (g1.empty()) g1 = default_lambda_grid(data.train.p(), data.train.n());
    if (g2.empty()) g2 = default_lambda_grid(data.train.p(), data.train.n());
    model = tune(data.train, g1, g2, config.hp, /*threads=*/1).best;
  }

  const Matrix xs = data.test.w.leftCols(spec.p - 1);
  const std::vector<Prediction> preds = predict_batch(model, xs);
  std::vector<int> z_hat(preds.size());
  Vector y_hat(static_cast<Eigen::Index>(preds.size()));
  for (size_t i = 0; i < preds.size(); ++i) {
    z_hat[i] = preds[i].z_hat;
    y_hat[static_cast<Eigen::Index>(i)] = preds[i].y_hat;
  }
  RepOutcome out;
  out.me = misclassification_error(data.test.z, z_hat);
  out.rmspe = rmspe(data.test.w.col(spec.p - 1), y_hat);
  return out;
}

std::vector<BenchmarkResult> run_benchmark(const ScenarioSpec& spec,
                                           const std::vector<Method>& methods, int reps,
                                           const BenchmarkConfig& config) {
  if (reps < 2) throw InvalidInput("run_benchmark: need reps >= 2");
  if (methods.empty()) throw InvalidInput("run_benchmark: no methods given");

  std::vector<BenchmarkResult> results;
  for (Method method : methods) {
    std::vector<std::optional<RepOutcome>> outcomes(reps);
    detail::parallel_for(reps, config.threads, [&](int rep) {
      try {
        outcomes[rep] = run_replication(spec, method, config, rep);
      } catch (const Error&) {
        outcomes[rep] = std::nullopt;
      }
    });

    BenchmarkResult res;
    res.scenario = spec;
    res.method = method;
    for (int rep = 0; rep < reps; ++rep) {
      if (!outcomes[rep]) {
        res.failed++;
        continue;
      }
      res.rep_index.push_back(rep);
      res.rep_me.push_back(100.0 * outcomes[rep]->me);
      res.rep_rmspe.push_back(outcomes[rep]->rmspe);
    }
    res.reps = static_cast<int>(res.rep_index.size());
    if (res.reps == 0) {
      throw BenchmarkFailed("run_benchmark: every replication failed for " +
                            method_name(method) + " on " + spec.id());
    }
    auto summarize = [&](const std::vector<double>& xs, double& mean, double& se) {
      mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
      if (xs.size() < 2) {
        se = 0.0;
        return;
      }
      double ss = 0.0;
      for (double x : xs) ss += (x - mean) * (x - mean);
      se = std::sqrt(ss / (xs.size() - 1)) / std::sqrt(static_cast<double>(xs.size()));
    };
    summarize(res.rep_me, res.me_mean, res.me_se);
    summarize(res.rep_rmspe, res.rmspe_mean, res.rmspe_se);
    results.push_back(std::move(res));
  }
  return results;
}

std::string method_name(Method m) {
  return m == Method::GAQQ ? "gaqq" : "glda";
}

ScenarioSpec parse_scenario(const std::string& name) {
  ScenarioSpec spec;
  spec.n1 = spec.n2 = spec.n_per_class = 30;
  bool have_p = false;
  std::stringstream ss(name);
  std::string token;
  while (std::getline(ss, token, '-')) {
    if (token.empty()) continue;
    auto int_after = [&](size_t off) {
      try {
        size_t used = 0;
        const int v = std::stoi(token.substr(off), &used);
        if (used != token.size() - off || v <= 0) throw std::invalid_argument(token);
        return v;
      } catch (const std::exception&) {
        throw InvalidInput("parse_scenario: bad token '" + token + "' in '" + name + "'");
      }
    };
    if (token == "t1" || token == "t2") {
      spec.multi_class = false;
    } else if (token == "t3") {
      spec.multi_class = true;
    } else if (token.size() == 2 && token[0] == 'm' && token[1] >= '1' && token[1] <= '5') {
      spec.precision_model = static_cast<PrecisionModel>(token[1] - '1');
    } else if (token == "s1") {
      spec.sparsity = MeanSparsity::S1;
    } else if (token == "s2") {
      spec.sparsity = MeanSparsity::S2;
    } else if (token[0] == 'p') {
      spec.p = int_after(1);
      have_p = true;
    } else if (token[0] == 'k') {
      spec.k_classes = int_after(1);
    } else if (token.rfind("test", 0) == 0) {
      spec.test_per_class = int_after(4);
    } else if (token[0] == 'n') {
      const size_t x = token.find('x');
      if (x == std::string::npos) {
        spec.n1 = spec.n2 = spec.n_per_class = int_after(1);
      } else {
        try {
          spec.n1 = std::stoi(token.substr(1, x - 1));
          spec.n2 = std::stoi(token.substr(x + 1));
        } catch (const std::exception&) {
          throw InvalidInput("parse_scenario: bad token '" + token + "'");
        }
        if (spec.n1 <= 0 || spec.n2 <= 0) {
          throw InvalidInput("parse_scenario: class sizes must be positive");
        }
      }
    } else {
      throw InvalidInput("parse_scenario: unknown token '" + token + "' in '" + name + "'");
    }
  }
  if (!have_p) throw InvalidInput("parse_scenario: missing dimension token 'p<int>'");
  return spec;
}

}  // namespace gaqq
