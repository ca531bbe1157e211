/*
 * Copyright 2026 The dare-forest Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line front end: generate, train, predict, delete, benchmark, tune
// and inspect. Exit codes: 0 ok, 1 domain failure, 2 usage, 3 I/O, 4 unknown
// instance id.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dare/dare.hpp"
#include "json.hpp"

namespace {

using json = nlohmann::json;

enum ExitCode : int { kOk = 0, kDomain = 1, kUsage = 2, kIo = 3, kUnknownId = 4 };

// Flag errors found after parsing (e.g. --drmax > --max-depth).
struct UsageError : dare::Error {
  using dare::Error::Error;
};

struct DataOptions {
  std::string data;
  std::string label_column = "label";
  std::vector<std::string> categorical;
  std::size_t synthetic = 0;
  double test_fraction = 0.0;
  std::uint64_t data_seed = 0;

  void add(CLI::App* cmd, bool with_split) {
    auto* data_opt = cmd->add_option("--data", data, "CSV file with a header row");
    auto* syn_opt = cmd->add_option("--synthetic", synthetic, "Generate n synthetic instances instead")
                        ->check(CLI::PositiveNumber);
    data_opt->excludes(syn_opt);
    cmd->add_option("--label-column", label_column, "Label column name")->capture_default_str();
    cmd->add_option("--categorical", categorical, "Categorical columns to one-hot encode")->delimiter(',');
    cmd->add_option("--data-seed", data_seed, "Seed for synthetic generation / splitting")->capture_default_str();
    if (with_split)
      cmd->add_option("--test-fraction", test_fraction, "Hold out this fraction for evaluation")
          ->check(CLI::Range(0.0, 0.99));
  }

  dare::Dataset load() const {
    if (synthetic > 0) return dare::make_synthetic(synthetic, data_seed);
    if (data.empty()) throw UsageError("one of --data or --synthetic is required");
    return dare::load_csv(data, label_column, categorical);
  }
};

struct ParamOptions {
  std::size_t trees = 10;
  std::size_t max_depth = 10;
  std::size_t drmax = 0;
  std::size_t k = 5;
  std::size_t p_tilde = 0;
  std::size_t min_support = 2;
  std::string criterion = "gini";
  std::uint64_t seed = 1;

  void add(CLI::App* cmd) {
    cmd->add_option("--trees", trees, "Number of trees")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--max-depth", max_depth, "Maximum depth")->capture_default_str();
    cmd->add_option("--drmax", drmax, "Layers of random nodes from the top")->capture_default_str();
    cmd->add_option("--k", k, "Thresholds sampled per attribute")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--p-tilde", p_tilde, "Attributes per greedy split (0 = floor(sqrt(p)))")->capture_default_str();
    cmd->add_option("--min-support", min_support, "Minimum instances to split")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--criterion", criterion, "Split criterion")
        ->check(CLI::IsMember({"gini", "entropy"}))
        ->capture_default_str();
    cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
  }

  dare::TreeParams params() const {
    dare::TreeParams p;
    p.max_depth = max_depth;
    p.random_depth = drmax;
    p.k = k;
    p.p_tilde = p_tilde;
    p.min_support = min_support;
    p.criterion = dare::parse_criterion(criterion);
    return p;
  }

  void check(std::size_t n_features) const {
    if (drmax > max_depth) throw UsageError("--drmax must not exceed --max-depth");
    if (p_tilde > n_features) throw UsageError("--p-tilde exceeds the number of attributes");
  }
};

json params_json(const dare::TreeParams& p, std::size_t trees, std::uint64_t seed) {
  return {{"trees", trees},
          {"max_depth", p.max_depth},
          {"drmax", p.random_depth},
          {"k", p.k},
          {"p_tilde", p.p_tilde},
          {"min_support", p.min_support},
          {"criterion", dare::to_string(p.criterion)},
          {"seed", seed}};
}

json memory_json(const dare::MemoryReport& m) {
  return {{"structure_bytes", m.structure_bytes},     {"decision_stats_bytes", m.decision_stats_bytes},
          {"leaf_stats_bytes", m.leaf_stats_bytes},   {"total_bytes", m.total_bytes},
          {"database_bytes", m.database_bytes},       {"nodes", m.nodes},
          {"leaves", m.leaves}};
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string depth_histogram_json(const std::map<std::size_t, dare::Count>& h) {
  json j = json::object();
  for (const auto& [depth, count] : h) j[std::to_string(depth)] = count;
  return j.dump();
}

constexpr const char* kDeletionCsvHeader = "index,instance_id,wall_time,retrain_cost,resamples,retrain_depths";

void write_deletion_row(std::ostream& out, const dare::DeletionRecord& r) {
  out << r.index << ',' << r.id << ',' << r.seconds << ',' << r.cost << ',' << r.resamples << ','
      << csv_quote(depth_histogram_json(r.depth_instances)) << '\n';
}

dare::DeletionRecord record_of(std::size_t index, dare::InstanceId id, const dare::DeletionReport& rep) {
  dare::DeletionRecord rec;
  rec.index = index;
  rec.id = id;
  rec.seconds = rep.seconds;
  rec.cost = rep.cost();
  rec.resamples = rep.resample_count();
  for (const auto& t : rep.trees)
    for (const auto& e : t.retrains) rec.depth_instances[e.depth] += e.instances;
  return rec;
}

dare::Adversary parse_adversary(const std::string& s) {
  if (s == "random") return dare::Adversary::random();
  if (s.rfind("worst", 0) == 0) {
    const std::string digits = s.substr(5);
    std::size_t n = 0;
    try {
      n = digits.empty() ? 1000 : std::stoul(digits);
    } catch (const std::exception&) {
      throw UsageError("--adversary: expected random or worst<N>, got " + s);
    }
    if (n == 0) throw UsageError("--adversary: worst<N> needs N >= 1");
    return dare::Adversary::worst_of(n);
  }
  throw UsageError("--adversary: expected random or worst<N>, got " + s);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw dare::IoError("cannot write " + path);
  out.precision(9);
  return out;
}

// ---------------------------------------------------------------- commands

struct GenerateCmd {
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  std::string out;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("generate", "Write a synthetic dataset as CSV");
    cmd->add_option("--n", n, "Instances")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--seed", seed, "Seed")->capture_default_str();
    cmd->add_option("--out", out, "Output CSV")->required();
    cmd->callback([this] { run(); });
  }
  void run() {
    const auto d = dare::make_synthetic(n, seed);
    dare::write_csv(d, out);
    std::cout << json{{"n", d.n()}, {"p", d.p()}, {"positives", d.positives()}, {"out", out}}.dump() << '\n';
  }
};

struct TrainCmd {
  DataOptions data;
  ParamOptions params;
  std::string out;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("train", "Train a forest and write a model file");
    data.add(cmd, false);
    params.add(cmd);
    cmd->add_option("--out", out, "Model file")->required();
    cmd->callback([this] { run(); });
  }
  void run() {
    const dare::Dataset d = data.load();
    params.check(d.p());
    const auto start = std::chrono::steady_clock::now();
    const dare::Forest f = dare::train_forest(d, params.params(), params.trees, params.seed);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    dare::save_model(f, out);
    std::cout << json{{"n", d.n()},
                      {"p", d.p()},
                      {"training_seconds", seconds},
                      {"params", params_json(f.params(), f.n_trees(), f.seed())},
                      {"memory", memory_json(dare::memory_report(f))},
                      {"model", out}}
                     .dump()
              << '\n';
  }
};

struct PredictCmd {
  std::string model;
  std::string data;
  std::string out;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("predict", "Predict positive-class probabilities for a CSV");
    cmd->add_option("--model", model, "Model file")->required();
    cmd->add_option("--data", data, "CSV with the training columns (label optional)")->required();
    cmd->add_option("--out", out, "Output CSV (default: stdout)");
    cmd->callback([this] { run(); });
  }
  void run() {
    const dare::Forest f = dare::load_model(model);
    const auto table = dare::csv::read(data);
    dare::Dataset d;
    if (f.database().schema()) {
      d = dare::encode_table(table, *f.database().schema(), false);
    } else {
      dare::Schema s;
      for (const auto& name : f.database().feature_names()) s.columns.push_back({name, false, {}});
      s.label_column = "label";
      s.label_values = {"0", "1"};
      d = dare::encode_table(table, s, false);
    }
    const auto probs = dare::predict(f, d);
    std::ofstream file;
    if (!out.empty()) file = open_out(out);
    std::ostream& os = out.empty() ? std::cout : file;
    os.precision(17);
    os << "row,probability,prediction\n";
    for (std::size_t i = 0; i < probs.size(); ++i) os << i << ',' << probs[i] << ',' << (probs[i] > 0.5 ? 1 : 0) << '\n';
  }
};

struct DeleteCmd {
  std::string model;
  std::string ids_file;
  std::string adversary;
  std::size_t count = 1;
  bool batch = false;
  std::uint64_t seed = 1;
  std::string out;
  std::string report;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("delete", "Unlearn training instances from a model");
    cmd->add_option("--model", model, "Model file")->required();
    auto* ids_opt = cmd->add_option("--ids", ids_file, "File of instance ids (whitespace/comma separated)");
    auto* adv_opt = cmd->add_option("--adversary", adversary, "random | worst1000 | worst<N>");
    ids_opt->excludes(adv_opt);
    cmd->add_option("--count", count, "Deletions to draw from the adversary")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_flag("--batch", batch, "Apply --ids as one batch");
    cmd->add_option("--seed", seed, "Adversary seed")->capture_default_str();
    cmd->add_option("--out", out, "Updated model file (default: overwrite --model)");
    cmd->add_option("--report", report, "Deletion report CSV (default: stdout)");
    cmd->callback([this] { run(); });
  }

  static std::vector<dare::InstanceId> read_ids(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw dare::IoError("cannot open " + path);
    std::vector<dare::InstanceId> ids;
    std::string token;
    while (in >> token) {
      std::stringstream parts(token);
      std::string piece;
      while (std::getline(parts, piece, ',')) {
        if (piece.empty()) continue;
        try {
          std::size_t used = 0;
          ids.push_back(std::stoll(piece, &used));
          if (used != piece.size()) throw std::invalid_argument(piece);
        } catch (const std::exception&) {
          throw dare::ParseError(path + ": not an instance id: " + piece);
        }
      }
    }
    return ids;
  }

  void run() {
    if (ids_file.empty() && adversary.empty()) throw UsageError("one of --ids or --adversary is required");
    dare::Forest f = dare::load_model(model);
    std::vector<dare::DeletionRecord> records;
    if (!ids_file.empty()) {
      const auto ids = read_ids(ids_file);
      const auto missing = dare::unknown_ids(f, ids);
      if (!missing.empty()) {
        std::cerr << "error: unknown instance ids:";
        for (auto id : missing) std::cerr << ' ' << id;
        std::cerr << '\n';
        throw dare::UnknownIdError(missing.front());
      }
      if (batch) {
        const auto rep = dare::remove_batch(f, ids);
        records.push_back(record_of(0, ids.empty() ? -1 : ids.front(), rep));
      } else {
        for (auto id : ids) {
          if (!f.database().contains(id)) continue;  // duplicate in the list
          records.push_back(record_of(records.size(), id, dare::remove_instance(f, id)));
        }
      }
    } else {
      const auto adv = parse_adversary(adversary);
      dare::Rng rng(seed);
      for (std::size_t i = 0; i < count && !f.database().empty(); ++i) {
        const auto id = dare::next_victim(adv, f, rng);
        records.push_back(record_of(i, id, dare::remove_instance(f, id)));
      }
    }
    dare::save_model(f, out.empty() ? model : out);
    std::ofstream file;
    if (!report.empty()) file = open_out(report);
    std::ostream& os = report.empty() ? std::cout : file;
    os << kDeletionCsvHeader << '\n';
    for (const auto& r : records) write_deletion_row(os, r);
  }
};

struct BenchmarkCmd {
  DataOptions data;
  ParamOptions params;
  std::string adversary = "random";
  std::size_t budget = 100000;
  double max_seconds = std::numeric_limits<double>::infinity();
  std::size_t repeats = 1;
  std::string metric;
  std::string out;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("benchmark", "Measure deletion speedup over naive retraining");
    data.add(cmd, true);
    params.add(cmd);
    cmd->add_option("--adversary", adversary, "random | worst1000 | worst<N>")->capture_default_str();
    cmd->add_option("--budget", budget, "Maximum deletions per repeat")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--max-seconds", max_seconds, "Wall-clock cap per repeat")->check(CLI::PositiveNumber);
    cmd->add_option("--repeats", repeats, "Independent repeats (seed, seed+1, ...)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--metric", metric, "accuracy | auc | ap (default: by positive rate)");
    cmd->add_option("--out", out, "Output directory")->required();
    cmd->callback([this] { run(); });
  }

  void run() {
    const auto adv = parse_adversary(adversary);
    dare::Dataset all = data.load();
    params.check(all.p());
    std::optional<dare::Dataset> test;
    dare::Dataset train;
    if (data.test_fraction > 0.0) {
      auto [tr, te] = dare::train_test_split(all, 1.0 - data.test_fraction, data.data_seed);
      train = std::move(tr);
      test = std::move(te);
    } else {
      train = std::move(all);
    }
    const dare::Metric m = metric.empty() ? dare::metric_for_positive_rate(static_cast<double>(train.positives()) /
                                                                           static_cast<double>(train.n()))
                                          : dare::parse_metric(metric);
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) throw dare::IoError("cannot create " + out);

    json runs = json::array();
    double log_sum = 0.0;
    bool all_positive = true;
    for (std::size_t r = 0; r < repeats; ++r) {
      const std::uint64_t seed = params.seed + r;
      dare::Budget b;
      b.max_deletions = budget;
      b.max_seconds = max_seconds;
      const auto result = dare::run_benchmark(train, test ? &*test : nullptr, params.params(), params.trees, seed,
                                              adv, b, m);
      const std::string csv_path = (std::filesystem::path(out) / ("deletions_" + std::to_string(r) + ".csv")).string();
      auto csv = open_out(csv_path);
      csv << kDeletionCsvHeader << '\n';
      for (const auto& rec : result.records) write_deletion_row(csv, rec);
      json hist = json::object();
      for (const auto& [depth, c] : result.retrain_depth_histogram) hist[std::to_string(depth)] = c;
      double mean_time = 0.0;
      for (double t : result.per_deletion_times) mean_time += t;
      if (!result.per_deletion_times.empty()) mean_time /= static_cast<double>(result.per_deletion_times.size());
      json run{{"repeat", r},
               {"seed", seed},
               {"speedup", result.speedup()},
               {"deletions_completed", result.deletions_completed},
               {"naive_seconds", result.naive_seconds},
               {"train_seconds", result.train_seconds},
               {"mean_deletion_seconds", mean_time},
               {"budget_exhausted", result.budget_exhausted},
               {"retrain_depth_histogram", hist},
               {"csv", csv_path}};
      if (result.metric_before) run["metric_before"] = *result.metric_before;
      if (result.metric_after) run["metric_after"] = *result.metric_after;
      runs.push_back(run);
      if (result.speedup() > 0)
        log_sum += std::log(result.speedup());
      else
        all_positive = false;
    }
    json summary{{"params", params_json(params.params(), params.trees, params.seed)},
                 {"adversary", adv.name()},
                 {"metric", dare::to_string(m)},
                 {"n_train", train.n()},
                 {"repeats", runs}};
    summary["speedup_geometric_mean"] =
        all_positive ? json(std::exp(log_sum / static_cast<double>(repeats))) : json(0.0);
    auto file = open_out((std::filesystem::path(out) / "summary.json").string());
    file << summary.dump(2) << '\n';
    std::cout << summary.dump() << '\n';
  }
};

struct TuneCmd {
  DataOptions data;
  std::vector<std::size_t> trees{10};
  std::vector<std::size_t> depths{10};
  std::vector<std::size_t> ks{5};
  std::vector<double> tolerances{0.001, 0.0025, 0.005, 0.01};
  std::size_t folds = 5;
  std::size_t p_tilde = 0;
  std::string criterion = "gini";
  std::string metric;
  std::uint64_t seed = 1;
  std::string out;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("tune", "Grid-search a greedy model, then tune --drmax per tolerance");
    data.add(cmd, false);
    cmd->add_option("--trees", trees, "Tree-count grid")->delimiter(',')->check(CLI::PositiveNumber);
    cmd->add_option("--max-depth", depths, "Depth grid")->delimiter(',');
    cmd->add_option("--k", ks, "Threshold-count grid")->delimiter(',')->check(CLI::PositiveNumber);
    cmd->add_option("--tolerance", tolerances, "Absolute CV-score tolerances (inf allowed)")->delimiter(',');
    cmd->add_option("--folds", folds, "Cross-validation folds")->check(CLI::Range(2, 1000))->capture_default_str();
    cmd->add_option("--p-tilde", p_tilde, "Attributes per greedy split (0 = floor(sqrt(p)))");
    cmd->add_option("--criterion", criterion, "Split criterion")->check(CLI::IsMember({"gini", "entropy"}));
    cmd->add_option("--metric", metric, "accuracy | auc | ap (default: by positive rate)");
    cmd->add_option("--seed", seed, "Seed")->capture_default_str();
    cmd->add_option("--out", out, "Write the selection JSON here as well as stdout");
    cmd->callback([this] { run(); });
  }

  void run() {
    for (double t : tolerances)
      if (!(t >= 0.0)) throw UsageError("--tolerance values must be non-negative");
    const dare::Dataset d = data.load();
    const dare::Metric m = metric.empty() ? dare::metric_for_positive_rate(static_cast<double>(d.positives()) /
                                                                           static_cast<double>(d.n()))
                                          : dare::parse_metric(metric);
    dare::TreeParams base;
    base.p_tilde = p_tilde;
    base.criterion = dare::parse_criterion(criterion);
    if (p_tilde > d.p()) throw UsageError("--p-tilde exceeds the number of attributes");
    const auto best = dare::grid_search(d, base, trees, depths, ks, folds, m, seed);
    base.max_depth = best.max_depth;
    base.k = best.k;
    const auto drmax = dare::tune_drmax(d, base, best.n_trees, tolerances, folds, m, seed);
    json tol = json::array();
    for (std::size_t i = 0; i < tolerances.size(); ++i)
      tol.push_back({{"tolerance", std::isinf(tolerances[i]) ? json("inf") : json(tolerances[i])},
                     {"drmax", drmax[i]}});
    json result{{"metric", dare::to_string(m)}, {"folds", folds},           {"seed", seed},
                {"trees", best.n_trees},         {"max_depth", best.max_depth}, {"k", best.k},
                {"cv_score", best.score},        {"drmax", tol}};
    if (!out.empty()) {
      auto file = open_out(out);
      file << result.dump(2) << '\n';
    }
    std::cout << result.dump() << '\n';
  }
};

struct InspectCmd {
  std::string model;
  int* exit_code = nullptr;

  void add(CLI::App& app, int& code) {
    exit_code = &code;
    auto* cmd = app.add_subcommand("inspect", "Audit a model and report its memory breakdown");
    cmd->add_option("--model", model, "Model file")->required();
    cmd->callback([this] { run(); });
  }
  void run() {
    const dare::Forest f = dare::load_model(model);
    const auto report = dare::audit(f);
    json mismatches = json::array();
    for (const auto& m : report.mismatches) mismatches.push_back({{"tree", m.tree}, {"path", m.path}, {"what", m.what}});
    json result{{"n", f.database().size()},
                {"p", f.database().p()},
                {"params", params_json(f.params(), f.n_trees(), f.seed())},
                {"audit", {{"clean", report.clean()}, {"nodes_checked", report.nodes_checked}, {"mismatches", mismatches}}},
                {"memory", memory_json(dare::memory_report(f))}};
    std::cout << result.dump(2) << '\n';
    *exit_code = report.clean() ? kOk : kDomain;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random forests with exact, efficient unlearning of training instances"};
  app.require_subcommand(1);
  int code = kOk;
  GenerateCmd generate;
  TrainCmd train;
  PredictCmd predict;
  DeleteCmd del;
  BenchmarkCmd benchmark;
  TuneCmd tune;
  InspectCmd inspect;
  generate.add(app);
  train.add(app);
  predict.add(app);
  del.add(app);
  benchmark.add(app);
  tune.add(app);
  inspect.add(app, code);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const dare::UnknownIdError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUnknownId;
  } catch (const dare::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const dare::FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const dare::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const dare::LabelCardinalityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDomain;
  }
  return code;
}
