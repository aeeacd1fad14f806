#include "gaqq/dataset.hpp"

#include <algorithm>

namespace gaqq {

Dataset Dataset::create(Matrix w, std::vector<int> z) {
  if (w.rows() < 1 || w.cols() < 1) {
    throw InvalidInput("Dataset: empty sample matrix");
  }
  if (static_cast<size_t>(w.rows()) != z.size()) {
    throw InvalidInput("Dataset: label count != row count");
  }
  if (!w.allFinite()) {
    throw InvalidInput("Dataset: non-finite entries");
  }
  const int k = *std::max_element(z.begin(), z.end());
  if (k < 1 || *std::min_element(z.begin(), z.end()) < 1) {
    throw InvalidInput("Dataset: labels must lie in 1..K");
  }
  std::vector<int> counts(k, 0);
  for (int label : z) counts[label - 1]++;
  for (int c = 0; c < k; ++c) {
    if (counts[c] == 0) {
      throw InvalidInput("Dataset: label " + std::to_string(c + 1) + " absent; labels must be contiguous 1..K");
    }
  }
  Dataset d;
  d.w = std::move(w);
  d.z = std::move(z);
  d.k_classes = k;
  d.n_k = std::move(counts);
  return d;
}

Vector Dataset::overall_mean() const {
  return w.colwise().mean();
}

Vector Dataset::class_sum(int k) const {
  if (k < 1 || k > k_classes) throw InvalidInput("Dataset: class index out of range");
  Vector s = Vector::Zero(p());
  for (int i = 0; i < n(); ++i) {
    if (z[i] == k) s += w.row(i).transpose();
  }
  return s;
}

Vector Dataset::class_mean(int k) const {
  return class_sum(k) / static_cast<double>(n_k[k - 1]);
}

}  // namespace gaqq
