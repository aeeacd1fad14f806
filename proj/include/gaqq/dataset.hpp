#pragma once

#include <vector>

#include "gaqq/numerics.hpp"

namespace gaqq {

// Labeled sample matrix. Row i is w_i = (x_i', y_i)' with the quantitative
// response stored in the LAST column; z holds class labels in 1..K with every
// class present.
struct Dataset {
  Matrix w;
  std::vector<int> z;
  int k_classes = 0;
  std::vector<int> n_k;

  // Validates label contiguity, finiteness and per-class counts >= 1.
  // Fitting additionally requires n_k >= 2 (checked by the fit entry points).
  static Dataset create(Matrix w, std::vector<int> z);

  int n() const { return static_cast<int>(w.rows()); }
  int p() const { return static_cast<int>(w.cols()); }

  Vector overall_mean() const;
  Vector class_sum(int k) const;   // sum of rows with label k
  Vector class_mean(int k) const;
};

}  // namespace gaqq
