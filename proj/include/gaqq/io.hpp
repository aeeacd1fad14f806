#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gaqq/dataset.hpp"
#include "gaqq/estimator.hpp"
#include "gaqq/simulation.hpp"

namespace gaqq {

// Column reference: numeric text selects by 0-based position, anything else
// by header name (requires has_header).
struct ColumnRef {
  std::optional<int> index;
  std::string name;

  static ColumnRef parse(const std::string& text);
  std::string describe() const;
};

struct DataSchema {
  ColumnRef label_column;
  ColumnRef response_column;
  // Empty: every remaining column is a feature.
  std::vector<ColumnRef> feature_columns;
  bool has_header = true;
};

struct LoadedCsv {
  Dataset data;
  // label_names[k-1] is the original label mapped to class k.
  std::vector<std::string> label_names;
  bool labels_remapped = false;
};

// Comma-separated, '.' decimal, optional header, UTF-8. The response is moved
// to the last coordinate of w; labels are remapped to contiguous 1..K
// (numeric sort when every label parses as a number, lexicographic otherwise).
LoadedCsv load_csv(const std::string& path, const DataSchema& schema);

struct ModelMetadata {
  int iterations = 0;
  bool converged = true;
  double bic = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::string data_fingerprint;
  std::vector<std::string> label_names;
};

void save_model(const ModelParams& model, const ModelMetadata& meta, const std::string& path);

struct LoadedModel {
  ModelParams model;
  ModelMetadata meta;
};
LoadedModel load_model(const std::string& path);

// 64-bit content hash of a dataset, reported as fit metadata.
std::string dataset_fingerprint(const Dataset& data);

void write_dataset_csv(const Dataset& data, const std::string& path);

void write_benchmark_csv(const std::vector<BenchmarkResult>& results,
                         const std::string& reps_path, const std::string& summary_path);

// Shortest round-trip-exact decimal rendering of a double.
std::string format_double(double x);

}  // namespace gaqq
