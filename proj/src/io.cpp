#include "gaqq/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "gaqq/rng.hpp"

namespace gaqq {

using nlohmann::json;

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool parse_number(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* begin = t.data();
  const char* end = begin + t.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

}  // namespace

ColumnRef ColumnRef::parse(const std::string& text) {
  ColumnRef ref;
  const std::string t = trim(text);
  if (t.empty()) throw InvalidInput("empty column reference");
  if (std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    ref.index = std::stoi(t);
  } else {
    ref.name = t;
  }
  return ref;
}

std::string ColumnRef::describe() const {
  return index ? "#" + std::to_string(*index) : name;
}

namespace {

int resolve_column(const ColumnRef& ref, const std::vector<std::string>& header, int width,
                   bool has_header) {
  if (ref.index) {
    if (*ref.index < 0 || *ref.index >= width) {
      throw InvalidInput("column index " + std::to_string(*ref.index) + " out of range (file has " +
                         std::to_string(width) + " columns)");
    }
    return *ref.index;
  }
  if (!has_header) {
    throw InvalidInput("column '" + ref.name + "' referenced by name but the file has no header");
  }
  for (size_t i = 0; i < header.size(); ++i) {
    if (trim(header[i]) == ref.name) return static_cast<int>(i);
  }
  throw InvalidInput("column '" + ref.name + "' not found in header");
}

}  // namespace

LoadedCsv load_csv(const std::string& path, const DataSchema& schema) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw ParseError(path + ": empty file");

  std::vector<std::string> header;
  size_t first_row = 0;
  if (schema.has_header) {
    header = split_csv_line(lines[0]);
    first_row = 1;
  }
  if (first_row >= lines.size()) throw ParseError(path + ": no data rows");
  const int width = static_cast<int>(split_csv_line(lines[first_row]).size());
  if (schema.has_header && static_cast<int>(header.size()) != width) {
    throw ParseError(path + ": header and first data row have different column counts");
  }

  const int label_col = resolve_column(schema.label_column, header, width, schema.has_header);
  const int response_col = resolve_column(schema.response_column, header, width, schema.has_header);
  if (label_col == response_col) {
    throw InvalidInput("label and response columns must be distinct");
  }
  std::vector<int> feature_cols;
  if (schema.feature_columns.empty()) {
    for (int c = 0; c < width; ++c) {
      if (c != label_col && c != response_col) feature_cols.push_back(c);
    }
  } else {
    for (const ColumnRef& ref : schema.feature_columns) {
      const int c = resolve_column(ref, header, width, schema.has_header);
      if (c == label_col || c == response_col) {
        throw InvalidInput("feature column " + ref.describe() + " collides with label/response");
      }
      feature_cols.push_back(c);
    }
  }
  if (feature_cols.empty()) throw InvalidInput("no feature columns left");

  auto cell_name = [&](int col) {
    std::string name = "column " + std::to_string(col + 1);
    if (schema.has_header) name += " ('" + trim(header[col]) + "')";
    return name;
  };

  const int n = static_cast<int>(lines.size() - first_row);
  const int p = static_cast<int>(feature_cols.size()) + 1;
  Matrix w(n, p);
  std::vector<std::string> raw_labels(n);
  for (int i = 0; i < n; ++i) {
    const std::string& line = lines[first_row + i];
    const std::vector<std::string> cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) != width) {
      throw ParseError(path + ": row " + std::to_string(first_row + i + 1) + " has " +
                       std::to_string(cells.size()) + " cells, expected " + std::to_string(width));
    }
    for (size_t f = 0; f < feature_cols.size(); ++f) {
      double v;
      if (!parse_number(cells[feature_cols[f]], v)) {
        throw ParseError(path + ": row " + std::to_string(first_row + i + 1) + ", " +
                         cell_name(feature_cols[f]) + ": cannot parse '" +
                         trim(cells[feature_cols[f]]) + "' as a finite number");
      }
      w(i, static_cast<int>(f)) = v;
    }
    double y;
    if (!parse_number(cells[response_col], y)) {
      throw ParseError(path + ": row " + std::to_string(first_row + i + 1) + ", " +
                       cell_name(response_col) + ": cannot parse '" + trim(cells[response_col]) +
                       "' as a finite number");
    }
    w(i, p - 1) = y;
    raw_labels[i] = trim(cells[label_col]);
    if (raw_labels[i].empty()) {
      throw ParseError(path + ": row " + std::to_string(first_row + i + 1) + ", " +
                       cell_name(label_col) + ": empty label");
    }
  }

  // Map distinct labels to 1..K: numeric order when every label is numeric,
  // lexicographic otherwise.
  std::vector<std::string> distinct = raw_labels;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  bool all_numeric = true;
  for (const std::string& s : distinct) {
    double v;
    if (!parse_number(s, v)) {
      all_numeric = false;
      break;
    }
  }
  if (all_numeric) {
    std::sort(distinct.begin(), distinct.end(), [](const std::string& a, const std::string& b) {
      double va, vb;
      parse_number(a, va);
      parse_number(b, vb);
      return va < vb;
    });
  }
  if (distinct.size() < 2) {
    throw InvalidInput(path + ": only one class present in the label column");
  }
  std::map<std::string, int> label_to_class;
  for (size_t k = 0; k < distinct.size(); ++k) {
    label_to_class[distinct[k]] = static_cast<int>(k + 1);
  }
  std::vector<int> z(n);
  bool remapped = false;
  for (int i = 0; i < n; ++i) {
    z[i] = label_to_class[raw_labels[i]];
    if (raw_labels[i] != std::to_string(z[i])) remapped = true;
  }

  LoadedCsv out{Dataset::create(std::move(w), std::move(z)), std::move(distinct), remapped};
  return out;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string dataset_fingerprint(const Dataset& data) {
  uint64_t h = mix64(0x64617461ull);
  h = mix64(h ^ static_cast<uint64_t>(data.n()));
  h = mix64(h ^ static_cast<uint64_t>(data.p()));
  for (int label : data.z) h = mix64(h ^ static_cast<uint64_t>(label));
  for (int i = 0; i < data.n(); ++i) {
    for (int j = 0; j < data.p(); ++j) {
      uint64_t bits;
      const double v = data.w(i, j);
      std::memcpy(&bits, &v, sizeof(bits));
      h = mix64(h ^ bits);
    }
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector json_to_vector(const json& arr, int expect) {
  if (!arr.is_array() || static_cast<int>(arr.size()) != expect) {
    throw SchemaError("model file: bad numeric array length");
  }
  Vector v(expect);
  for (int i = 0; i < expect; ++i) {
    if (!arr[i].is_number()) throw SchemaError("model file: non-numeric array entry");
    v[i] = arr[i].get<double>();
  }
  return v;
}

constexpr int kModelFormatVersion = 1;

}  // namespace

void save_model(const ModelParams& model, const ModelMetadata& meta, const std::string& path) {
  json j;
  j["format_version"] = kModelFormatVersion;
  j["k_classes"] = model.k_classes;
  j["p"] = model.p();
  j["pi"] = vector_to_json(model.pi);
  json mu = json::array();
  for (const Vector& m : model.mu) mu.push_back(vector_to_json(m));
  j["mu"] = mu;
  json delta = json::array();
  for (const Vector& d : model.delta) delta.push_back(vector_to_json(d));
  j["delta"] = delta;
  json c = json::array();  // row-major
  for (int i = 0; i < model.p(); ++i) {
    for (int jj = 0; jj < model.p(); ++jj) c.push_back(model.c_hat(i, jj));
  }
  j["c_hat"] = c;
  j["lambda1"] = meta.lambda1;
  j["lambda2"] = meta.lambda2;
  j["metadata"] = {
      {"iterations", meta.iterations},
      {"converged", meta.converged},
      {"bic", meta.bic},
      {"data_fingerprint", meta.data_fingerprint},
      {"label_names", meta.label_names},
      {"prediction_mode", model.pseudo_inverse_mode() ? "pinv" : "precision"},
  };
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model file: " + path);
  out << j.dump(1) << "\n";
  if (!out.good()) throw IoError("failed writing model file: " + path);
}

LoadedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError("model file " + path + ": " + e.what());
  }
  try {
    if (!j.contains("format_version") || !j["format_version"].is_number_integer()) {
      throw SchemaError("model file " + path + ": missing format_version");
    }
    const int version = j["format_version"].get<int>();
    if (version != kModelFormatVersion) {
      throw UnsupportedVersion("model file " + path + ": format_version " +
                               std::to_string(version) + " not supported");
    }
    const int k = j.at("k_classes").get<int>();
    const int p = j.at("p").get<int>();
    if (k < 2 || p < 1) throw SchemaError("model file " + path + ": bad k_classes/p");
    Vector pi = json_to_vector(j.at("pi"), k);
    const json& mu_json = j.at("mu");
    if (!mu_json.is_array() || static_cast<int>(mu_json.size()) != k) {
      throw SchemaError("model file " + path + ": mu must have K rows");
    }
    std::vector<Vector> mu;
    for (int g = 0; g < k; ++g) mu.push_back(json_to_vector(mu_json[g], p));
    const json& delta_json = j.at("delta");
    if (!delta_json.is_array() || static_cast<int>(delta_json.size()) != k - 1) {
      throw SchemaError("model file " + path + ": delta must have K - 1 rows");
    }
    std::vector<Vector> delta;
    for (int g = 0; g + 1 < k; ++g) delta.push_back(json_to_vector(delta_json[g], p));
    const json& c_json = j.at("c_hat");
    if (!c_json.is_array() || static_cast<int>(c_json.size()) != p * p) {
      throw SchemaError("model file " + path + ": c_hat must have p*p entries");
    }
    Matrix c(p, p);
    for (int i = 0; i < p; ++i) {
      for (int jj = 0; jj < p; ++jj) {
        const json& cell = c_json[i * p + jj];
        if (!cell.is_number()) throw SchemaError("model file " + path + ": non-numeric c_hat");
        c(i, jj) = cell.get<double>();
      }
    }
    const json& meta_json = j.at("metadata");
    ModelMetadata meta;
    meta.iterations = meta_json.at("iterations").get<int>();
    meta.converged = meta_json.at("converged").get<bool>();
    meta.bic = meta_json.at("bic").get<double>();
    meta.lambda1 = j.at("lambda1").get<double>();
    meta.lambda2 = j.at("lambda2").get<double>();
    meta.data_fingerprint = meta_json.at("data_fingerprint").get<std::string>();
    meta.label_names = meta_json.at("label_names").get<std::vector<std::string>>();
    const std::string mode = meta_json.at("prediction_mode").get<std::string>();

    ModelParams model;
    if (mode == "precision") {
      model = ModelParams::from_precision(std::move(mu), SymMatrix(c), std::move(pi));
    } else if (mode == "pinv") {
      model = ModelParams::from_precision_pseudo(std::move(mu), SymMatrix(c), std::move(pi));
    } else {
      throw SchemaError("model file " + path + ": unknown prediction_mode '" + mode + "'");
    }
    model.delta = std::move(delta);
    return LoadedModel{std::move(model), std::move(meta)};
  } catch (const json::exception& e) {
    throw SchemaError("model file " + path + ": " + e.what());
  }
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write: " + path);
  const int p = data.p();
  for (int f = 1; f < p; ++f) out << "f" << f << ",";
  out << "y,z\n";
  for (int i = 0; i < data.n(); ++i) {
    for (int j = 0; j < p; ++j) out << format_double(data.w(i, j)) << ",";
    out << data.z[i] << "\n";
  }
  if (!out.good()) throw IoError("failed writing: " + path);
}

void write_benchmark_csv(const std::vector<BenchmarkResult>& results, const std::string& reps_path,
                         const std::string& summary_path) {
  std::ofstream reps(reps_path);
  if (!reps) throw IoError("cannot write: " + reps_path);
  reps << "scenario_id,method,rep,me,rmspe\n";
  for (const BenchmarkResult& r : results) {
    for (size_t i = 0; i < r.rep_index.size(); ++i) {
      reps << r.scenario.id() << "," << method_name(r.method) << "," << r.rep_index[i] << ","
           << format_double(r.rep_me[i]) << "," << format_double(r.rep_rmspe[i]) << "\n";
    }
  }
  if (!reps.good()) throw IoError("failed writing: " + reps_path);

  std::ofstream summary(summary_path);
  if (!summary) throw IoError("cannot write: " + summary_path);
  summary << "scenario_id,method,reps,failed,me_mean,me_se,rmspe_mean,rmspe_se\n";
  for (const BenchmarkResult& r : results) {
    summary << r.scenario.id() << "," << method_name(r.method) << "," << r.reps << "," << r.failed
            << "," << format_double(r.me_mean) << "," << format_double(r.me_se) << ","
            << format_double(r.rmspe_mean) << "," << format_double(r.rmspe_se) << "\n";
  }
  if (!summary.good()) throw IoError("failed writing: " + summary_path);
}

}  // namespace gaqq
