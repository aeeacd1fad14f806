// gaqq command line: fit / predict / simulate / benchmark / version.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gaqq/io.hpp"
#include "gaqq/predictor.hpp"
#include "gaqq/simulation.hpp"
#include "gaqq/version.hpp"

namespace {

using namespace gaqq;

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      grid.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw InvalidInput("bad grid value '" + tok + "'");
    }
  }
  if (grid.empty()) throw InvalidInput("empty lambda grid");
  return grid;
}

std::vector<Method> parse_methods(const std::string& text) {
  std::vector<Method> methods;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::string lower;
    for (char c : tok) lower.push_back(static_cast<char>(std::tolower(c)));
    if (lower == "gaqq") {
      methods.push_back(Method::GAQQ);
    } else if (lower == "glda") {
      methods.push_back(Method::GLDA);
    } else {
      throw InvalidInput("unknown method '" + tok + "' (expected gaqq or glda)");
    }
  }
  if (methods.empty()) throw InvalidInput("no methods given");
  return methods;
}

struct FitOptions {
  std::string data_path;
  std::string label_col;
  std::string response_col;
  bool no_header = false;
  std::optional<double> lambda1;
  std::optional<double> lambda2;
  bool do_tune = false;
  std::string grid1_text;
  std::string grid2_text;
  std::string out_model;
  double tol = 1e-6;
  int max_iter = 100;
  int threads = 1;
};

int cmd_fit(const FitOptions& opt) {
  DataSchema schema;
  schema.label_column = ColumnRef::parse(opt.label_col);
  schema.response_column = ColumnRef::parse(opt.response_col);
  schema.has_header = !opt.no_header;
  LoadedCsv loaded = load_csv(opt.data_path, schema);
  const Dataset& data = loaded.data;
  if (loaded.labels_remapped) {
    std::cout << "labels remapped:";
    for (size_t k = 0; k < loaded.label_names.size(); ++k) {
      std::cout << " " << loaded.label_names[k] << "->" << (k + 1);
    }
    std::cout << "\n";
  }

  Hyperparams hp;
  hp.tau1 = hp.tau2 = opt.tol;
  hp.max_outer = opt.max_iter;

  ModelParams model;
  FitTrace trace;
  ModelMetadata meta;
  if (opt.do_tune) {
    std::vector<double> g1 = opt.grid1_text.empty() ? default_lambda_grid(data.p(), data.n())
                                                    : parse_grid(opt.grid1_text);
    std::vector<double> g2 = opt.grid2_text.empty() ? default_lambda_grid(data.p(), data.n())
                                                    : parse_grid(opt.grid2_text);
    TuneResult result = tune(data, g1, g2, hp, opt.threads);
    model = std::move(result.best);
    trace = std::move(result.best_trace);
    meta.lambda1 = result.best_lambda1;
    meta.lambda2 = result.best_lambda2;
    meta.bic = result.best_bic;
    std::cout << "tuned lambda1=" << format_double(meta.lambda1)
              << " lambda2=" << format_double(meta.lambda2) << " over " << result.table.size()
              << " grid points\n";
  } else {
    if (!opt.lambda1 || !opt.lambda2) {
      throw InvalidInput("fit: give --lambda1 and --lambda2, or --tune");
    }
    hp.lambda1 = *opt.lambda1;
    hp.lambda2 = *opt.lambda2;
    auto fit = data.k_classes == 2 ? fit_two_class(data, hp) : fit_multi_class(data, hp);
    model = std::move(fit.first);
    trace = std::move(fit.second);
    meta.lambda1 = hp.lambda1;
    meta.lambda2 = hp.lambda2;
    meta.bic = bic(model, data);
  }
  meta.iterations = trace.iterations;
  meta.converged = trace.converged;
  meta.data_fingerprint = dataset_fingerprint(data);
  meta.label_names = loaded.label_names;
  save_model(model, meta, opt.out_model);
  std::cout << "fit: K=" << model.k_classes << " p=" << model.p() << " n=" << data.n()
            << " iterations=" << meta.iterations << " converged=" << (meta.converged ? "yes" : "no")
            << " bic=" << format_double(meta.bic) << "\n";
  std::cout << "model written to " << opt.out_model << "\n";
  return 0;
}

struct PredictOptions {
  std::string model_path;
  std::string data_path;
  std::string out_path;
  std::string truth_label_col;
  std::string truth_response_col;
  bool no_header = false;
};

// Splits one CSV line, tracking raw cells only.
std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

int cmd_predict(const PredictOptions& opt) {
  LoadedModel loaded = load_model(opt.model_path);
  const ModelParams& model = loaded.model;

  std::ifstream in(opt.data_path);
  if (!in) throw IoError("cannot open file: " + opt.data_path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw ParseError(opt.data_path + ": empty file");

  std::vector<std::string> header;
  size_t first_row = 0;
  if (!opt.no_header) {
    header = split_line(lines[0]);
    first_row = 1;
  }
  if (first_row >= lines.size()) throw ParseError(opt.data_path + ": no data rows");
  const int width = static_cast<int>(split_line(lines[first_row]).size());

  auto resolve = [&](const std::string& text) -> int {
    const ColumnRef ref = ColumnRef::parse(text);
    if (ref.index) {
      if (*ref.index < 0 || *ref.index >= width) {
        throw InvalidInput("column index " + std::to_string(*ref.index) + " out of range");
      }
      return *ref.index;
    }
    for (size_t i = 0; i < header.size(); ++i) {
      std::string h = header[i];
      while (!h.empty() && (h.back() == ' ' || h.back() == '\t')) h.pop_back();
      if (h == ref.name) return static_cast<int>(i);
    }
    throw InvalidInput("column '" + ref.name + "' not found in header");
  };
  int label_col = -1, response_col = -1;
  if (!opt.truth_label_col.empty()) label_col = resolve(opt.truth_label_col);
  if (!opt.truth_response_col.empty()) response_col = resolve(opt.truth_response_col);

  std::vector<int> feature_cols;
  for (int c = 0; c < width; ++c) {
    if (c != label_col && c != response_col) feature_cols.push_back(c);
  }
  if (static_cast<int>(feature_cols.size()) != model.p() - 1) {
    throw InvalidInput("predict: file provides " + std::to_string(feature_cols.size()) +
                       " feature columns, model expects " + std::to_string(model.p() - 1));
  }

  auto match_label = [&](const std::string& raw) -> int {
    for (size_t k = 0; k < loaded.meta.label_names.size(); ++k) {
      if (loaded.meta.label_names[k] == raw) return static_cast<int>(k + 1);
    }
    try {
      const double v = std::stod(raw);
      for (size_t k = 0; k < loaded.meta.label_names.size(); ++k) {
        if (std::stod(loaded.meta.label_names[k]) == v) return static_cast<int>(k + 1);
      }
    } catch (const std::exception&) {
    }
    throw ParseError(opt.data_path + ": label '" + raw + "' not known to the model");
  };

  const int n = static_cast<int>(lines.size() - first_row);
  Matrix xs(n, model.p() - 1);
  std::vector<int> truth_z;
  Vector truth_y = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    const std::vector<std::string> cells = split_line(lines[first_row + i]);
    if (static_cast<int>(cells.size()) != width) {
      throw ParseError(opt.data_path + ": row " + std::to_string(first_row + i + 1) +
                       " has inconsistent column count");
    }
    for (size_t f = 0; f < feature_cols.size(); ++f) {
      try {
        xs(i, static_cast<int>(f)) = std::stod(cells[feature_cols[f]]);
      } catch (const std::exception&) {
        throw ParseError(opt.data_path + ": row " + std::to_string(first_row + i + 1) +
                         ", column " + std::to_string(feature_cols[f] + 1) + ": bad number '" +
                         cells[feature_cols[f]] + "'");
      }
    }
    if (label_col >= 0) truth_z.push_back(match_label(cells[label_col]));
    if (response_col >= 0) {
      try {
        truth_y[i] = std::stod(cells[response_col]);
      } catch (const std::exception&) {
        throw ParseError(opt.data_path + ": row " + std::to_string(first_row + i + 1) +
                         ": bad truth response '" + cells[response_col] + "'");
      }
    }
  }

  const std::vector<Prediction> preds = predict_batch(model, xs);
  std::ofstream out(opt.out_path);
  if (!out) throw IoError("cannot write: " + opt.out_path);
  out << "row,y_hat,z_hat,label\n";
  for (int i = 0; i < n; ++i) {
    const int z = preds[i].z_hat;
    const std::string label =
        static_cast<size_t>(z) <= loaded.meta.label_names.size()
            ? loaded.meta.label_names[z - 1]
            : std::to_string(z);
    out << i << "," << format_double(preds[i].y_hat) << "," << z << "," << label << "\n";
  }
  if (!out.good()) throw IoError("failed writing: " + opt.out_path);
  std::cout << "predictions written to " << opt.out_path << " (" << n << " rows)\n";

  if (label_col >= 0) {
    std::vector<int> z_hat(n);
    for (int i = 0; i < n; ++i) z_hat[i] = preds[i].z_hat;
    std::cout << "me_percent=" << format_double(100.0 * misclassification_error(truth_z, z_hat))
              << "\n";
  }
  if (response_col >= 0) {
    Vector y_hat(n);
    for (int i = 0; i < n; ++i) y_hat[i] = preds[i].y_hat;
    std::cout << "rmspe=" << format_double(rmspe(truth_y, y_hat)) << "\n";
  }
  return 0;
}

struct SimulateOptions {
  std::string scenario;
  std::string precision_model = "m1";
  int p = 40;
  int classes = 2;
  std::string sizes = "30";
  std::string sparsity = "s2";
  int test_size = 0;
  uint64_t seed = 0;
  int rep = 0;
  std::string out_dir;
};

ScenarioSpec scenario_from_flags(const SimulateOptions& opt) {
  if (!opt.scenario.empty()) {
    ScenarioSpec spec = parse_scenario(opt.scenario);
    spec.seed = opt.seed;
    if (opt.test_size > 0) spec.test_per_class = opt.test_size;
    return spec;
  }
  ScenarioSpec spec;
  std::string m = opt.precision_model;
  if (!m.empty() && (m[0] == 'm' || m[0] == 'M')) m = m.substr(1);
  if (m.size() != 1 || m[0] < '1' || m[0] > '5') {
    throw InvalidInput("precision model must be m1..m5");
  }
  spec.precision_model = static_cast<PrecisionModel>(m[0] - '1');
  spec.p = opt.p;
  spec.multi_class = opt.classes > 2;
  spec.k_classes = opt.classes;
  if (opt.sparsity == "s1" || opt.sparsity == "S1") {
    spec.sparsity = MeanSparsity::S1;
  } else if (opt.sparsity == "s2" || opt.sparsity == "S2") {
    spec.sparsity = MeanSparsity::S2;
  } else {
    throw InvalidInput("sparsity must be s1 or s2");
  }
  const std::vector<double> sizes = parse_grid(opt.sizes);
  if (sizes.size() == 1) {
    spec.n1 = spec.n2 = spec.n_per_class = static_cast<int>(sizes[0]);
  } else if (sizes.size() == 2 && !spec.multi_class) {
    spec.n1 = static_cast<int>(sizes[0]);
    spec.n2 = static_cast<int>(sizes[1]);
  } else {
    throw InvalidInput("--sizes: give one shared size or two sizes for a two-class scenario");
  }
  spec.test_per_class = opt.test_size;
  spec.seed = opt.seed;
  return spec;
}

int cmd_simulate(const SimulateOptions& opt) {
  const ScenarioSpec spec = scenario_from_flags(opt);
  const SimulatedData data = simulate_scenario(spec, opt.rep);
  std::filesystem::create_directories(opt.out_dir);
  const std::string train_path = opt.out_dir + "/train.csv";
  const std::string test_path = opt.out_dir + "/test.csv";
  write_dataset_csv(data.train, train_path);
  write_dataset_csv(data.test, test_path);
  std::cout << "scenario " << spec.id() << " rep " << opt.rep << "\n"
            << "train: " << train_path << " (" << data.train.n() << " rows)\n"
            << "test:  " << test_path << " (" << data.test.n() << " rows)\n";
  return 0;
}

struct BenchmarkOptions {
  std::string scenario;
  int reps = 0;
  uint64_t seed = 0;
  std::string methods = "gaqq,glda";
  std::string out_prefix;
  std::string grid1_text;
  std::string grid2_text;
  int test_size = 0;
  int threads = 1;
  std::optional<double> tol;
  std::optional<int> max_iter;
};

int cmd_benchmark(const BenchmarkOptions& opt) {
  ScenarioSpec spec = parse_scenario(opt.scenario);
  spec.seed = opt.seed;
  if (opt.test_size > 0) spec.test_per_class = opt.test_size;

  BenchmarkConfig config;  // harness defaults unless overridden
  if (opt.tol) config.hp.tau1 = config.hp.tau2 = *opt.tol;
  if (opt.max_iter) config.hp.max_outer = *opt.max_iter;
  if (!opt.grid1_text.empty()) config.lambda1_grid = parse_grid(opt.grid1_text);
  if (!opt.grid2_text.empty()) config.lambda2_grid = parse_grid(opt.grid2_text);
  config.threads = opt.threads;

  const std::vector<Method> methods = parse_methods(opt.methods);
  const std::vector<BenchmarkResult> results = run_benchmark(spec, methods, opt.reps, config);
  const std::string reps_path = opt.out_prefix + "_reps.csv";
  const std::string summary_path = opt.out_prefix + "_summary.csv";
  write_benchmark_csv(results, reps_path, summary_path);
  for (const BenchmarkResult& r : results) {
    std::cout << spec.id() << " " << method_name(r.method) << ": me=" << format_double(r.me_mean)
              << "%(" << format_double(r.me_se) << ") rmspe=" << format_double(r.rmspe_mean) << "("
              << format_double(r.rmspe_se) << ") reps=" << r.reps << " failed=" << r.failed
              << "\n";
  }
  std::cout << "wrote " << reps_path << " and " << summary_path << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"gaqq: joint generative modeling of a quantitative and a qualitative response"};
  app.require_subcommand(1);

  FitOptions fit_opt;
  CLI::App* fit = app.add_subcommand("fit", "fit a model to a CSV data set");
  fit->add_option("--data", fit_opt.data_path, "training CSV")->required();
  fit->add_option("--label-col", fit_opt.label_col, "class label column (name or 0-based index)")
      ->required();
  fit->add_option("--response-col", fit_opt.response_col,
                  "quantitative response column (name or 0-based index)")
      ->required();
  fit->add_flag("--no-header", fit_opt.no_header, "file has no header row");
  fit->add_option("--lambda1", fit_opt.lambda1, "precision penalty");
  fit->add_option("--lambda2", fit_opt.lambda2, "mean-difference penalty");
  fit->add_flag("--tune", fit_opt.do_tune, "select (lambda1, lambda2) by BIC over a grid");
  fit->add_option("--grid1", fit_opt.grid1_text, "comma-separated lambda1 grid");
  fit->add_option("--grid2", fit_opt.grid2_text, "comma-separated lambda2 grid");
  fit->add_option("--out-model", fit_opt.out_model, "output model JSON path")->required();
  fit->add_option("--tol", fit_opt.tol, "outer convergence threshold (tau1 = tau2)");
  fit->add_option("--max-iter", fit_opt.max_iter, "outer iteration cap");
  fit->add_option("--threads", fit_opt.threads, "worker threads for tuning");

  PredictOptions pred_opt;
  CLI::App* predict = app.add_subcommand("predict", "predict y and the class for new rows");
  predict->add_option("--model", pred_opt.model_path, "model JSON from fit")->required();
  predict->add_option("--data", pred_opt.data_path, "feature CSV")->required();
  predict->add_option("--out", pred_opt.out_path, "output CSV")->required();
  predict->add_option("--truth-label-col", pred_opt.truth_label_col,
                      "optional truth label column; reports ME");
  predict->add_option("--truth-response-col", pred_opt.truth_response_col,
                      "optional truth response column; reports RMSPE");
  predict->add_flag("--no-header", pred_opt.no_header, "file has no header row");

  SimulateOptions sim_opt;
  CLI::App* simulate = app.add_subcommand("simulate", "write one synthetic train/test pair");
  simulate->add_option("--scenario", sim_opt.scenario, "scenario preset, e.g. t1-m1-s2-p40");
  simulate->add_option("--precision-model", sim_opt.precision_model, "m1..m5");
  simulate->add_option("--p", sim_opt.p, "dimension (features + response)");
  simulate->add_option("--classes", sim_opt.classes, "number of classes");
  simulate->add_option("--sizes", sim_opt.sizes, "per-class training size(s)");
  simulate->add_option("--sparsity", sim_opt.sparsity, "s1 (25% zeros) or s2 (75% zeros)");
  simulate->add_option("--test-size", sim_opt.test_size, "per-class test size (0: same as train)");
  simulate->add_option("--seed", sim_opt.seed, "RNG seed");
  simulate->add_option("--rep", sim_opt.rep, "replication index");
  simulate->add_option("--out-dir", sim_opt.out_dir, "output directory")->required();

  BenchmarkOptions bench_opt;
  CLI::App* benchmark = app.add_subcommand("benchmark", "replicated scenario benchmark");
  benchmark->add_option("--scenario", bench_opt.scenario, "scenario preset")->required();
  benchmark->add_option("--reps", bench_opt.reps, "replications (>= 2)")->required();
  benchmark->add_option("--seed", bench_opt.seed, "RNG seed");
  benchmark->add_option("--methods", bench_opt.methods, "comma list of gaqq,glda");
  benchmark->add_option("--out", bench_opt.out_prefix, "output prefix for CSVs")->required();
  benchmark->add_option("--grid1", bench_opt.grid1_text, "lambda1 grid override");
  benchmark->add_option("--grid2", bench_opt.grid2_text, "lambda2 grid override");
  benchmark->add_option("--test-size", bench_opt.test_size, "per-class test size");
  benchmark->add_option("--threads", bench_opt.threads, "worker threads across replications");
  benchmark->add_option("--tol", bench_opt.tol, "outer convergence threshold");
  benchmark->add_option("--max-iter", bench_opt.max_iter, "outer iteration cap");

  CLI::App* version = app.add_subcommand("version", "print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    std::cerr << "run with --help for usage\n";
    return 1;
  }

  try {
    if (fit->parsed()) return cmd_fit(fit_opt);
    if (predict->parsed()) return cmd_predict(pred_opt);
    if (simulate->parsed()) return cmd_simulate(sim_opt);
    if (benchmark->parsed()) return cmd_benchmark(bench_opt);
    if (version->parsed()) {
      std::cout << "gaqq " << kVersion << "\n";
      return 0;
    }
  } catch (const NotPositiveDefinite& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const NotPositiveSemiDefinite& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const TuningFailed& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const BenchmarkFailed& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

int main(int argc, char** argv) { return run_cli(argc, argv); }
