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

#ifndef DARE_BENCH_HPP_
#define DARE_BENCH_HPP_

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dare/common.hpp"
#include "dare/dataset.hpp"
#include "dare/metrics.hpp"
#include "dare/rng.hpp"
#include "dare/tree.hpp"
#include "dare/unlearn.hpp"

namespace dare {

struct Adversary {
  enum class Kind : std::uint8_t { kRandom, kWorstOf };
  Kind kind = Kind::kRandom;
  std::size_t sample_size = 1000;

  static Adversary random() { return {Kind::kRandom, 1}; }
  static Adversary worst_of(std::size_t sample_size) {
    if (sample_size < 1) throw InvalidArgument("worst_of: sample_size must be >= 1");
    return {Kind::kWorstOf, sample_size};
  }

  std::string name() const { return kind == Kind::kRandom ? "random" : "worst" + std::to_string(sample_size); }
};

// random: uniform over surviving ids. worst-of-n: among min(n, size) uniform
// candidates, the one with the largest dry-run retrain cost (ties: lowest id).
inline InstanceId next_victim(const Adversary& adv, const Forest& f, Rng& rng) {
  if (f.database().empty()) throw InvalidArgument("next_victim: database is empty");
  std::vector<InstanceId> ids = f.database().live_ids();
  if (adv.kind == Adversary::Kind::kRandom) return ids[rng.uniform_index(ids.size())];
  const std::size_t m = std::min(adv.sample_size, ids.size());
  rng.partial_shuffle(ids, m);
  InstanceId best = ids[0];
  Count best_cost = -1;
  for (std::size_t i = 0; i < m; ++i) {
    const Count cost = dry_run_cost(f, ids[i]);
    if (cost > best_cost || (cost == best_cost && ids[i] < best)) {
      best = ids[i];
      best_cost = cost;
    }
  }
  return best;
}

struct Budget {
  std::size_t max_deletions = std::numeric_limits<std::size_t>::max();
  double max_seconds = std::numeric_limits<double>::infinity();
};

struct DeletionRecord {
  std::size_t index = 0;
  InstanceId id = 0;
  double seconds = 0.0;
  Count cost = 0;
  std::size_t resamples = 0;
  std::map<std::size_t, Count> depth_instances;  // depth -> retrained instances
};

struct BenchResult {
  double train_seconds = 0.0;
  double naive_seconds = 0.0;  // one full retraining on n - 1 instances
  std::size_t deletions_completed = 0;
  std::vector<double> per_deletion_times;
  std::vector<DeletionRecord> records;
  std::map<std::size_t, Count> retrain_depth_histogram;
  Metric metric = Metric::kAccuracy;
  std::optional<double> metric_before;
  std::optional<double> metric_after;
  bool budget_exhausted = false;  // stopped by the budget, speedup is a lower bound

  // Instances deleted within the time of one naive retraining.
  double speedup() const { return static_cast<double>(deletions_completed); }
};

// Trains a forest, times one naive retraining, then deletes adversarially
// chosen instances until their cumulative deletion time would exceed the
// naive time (or the budget runs out).
inline BenchResult run_benchmark(const Dataset& train, const Dataset* test, const TreeParams& params,
                                 std::size_t n_trees, std::uint64_t seed, const Adversary& adv, const Budget& budget,
                                 Metric metric = Metric::kAccuracy) {
  using Clock = std::chrono::steady_clock;
  if (budget.max_deletions == 0 || !(budget.max_seconds > 0.0)) throw InvalidArgument("run_benchmark: empty budget");
  BenchResult result;
  result.metric = metric;
  Rng adversary_rng = Rng::derive(seed, 0xad7e45a7ULL);

  auto start = Clock::now();
  Forest forest = train_forest(train, params, n_trees, seed);
  result.train_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  if (test) result.metric_before = metric_score(metric, test->labels, predict(forest, *test));

  {
    const auto ids = forest.database().live_ids();
    const InstanceId probe = ids[adversary_rng.uniform_index(ids.size())];
    Database reduced = forest.database();
    reduced.remove(probe);
    start = Clock::now();
    Forest naive = train_forest_on(std::move(reduced), forest.params(), n_trees, seed + 1);
    result.naive_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  }

  const auto loop_start = Clock::now();
  double cumulative = 0.0;
  result.budget_exhausted = true;
  while (result.records.size() < budget.max_deletions &&
         std::chrono::duration<double>(Clock::now() - loop_start).count() < budget.max_seconds) {
    if (forest.database().size() <= 1) {
      result.budget_exhausted = false;
      break;
    }
    const InstanceId victim = next_victim(adv, forest, adversary_rng);
    const DeletionReport rep = remove_instance(forest, victim);
    if (cumulative + rep.seconds > result.naive_seconds) {
      result.budget_exhausted = false;
      break;
    }
    cumulative += rep.seconds;
    DeletionRecord rec;
    rec.index = result.records.size();
    rec.id = victim;
    rec.seconds = rep.seconds;
    rec.cost = rep.cost();
    rec.resamples = rep.resample_count();
    for (const auto& t : rep.trees)
      for (const auto& e : t.retrains) {
        rec.depth_instances[e.depth] += e.instances;
        result.retrain_depth_histogram[e.depth] += e.instances;
      }
    result.per_deletion_times.push_back(rep.seconds);
    result.records.push_back(std::move(rec));
  }
  result.deletions_completed = result.records.size();
  if (test && !forest.database().empty()) result.metric_after = metric_score(metric, test->labels, predict(forest, *test));
  return result;
}

// Fold of each row: position in a seeded shuffle modulo `folds`.
inline std::vector<std::size_t> fold_assignment(std::size_t n, std::size_t folds, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::size_t> fold(n);
  for (std::size_t i = 0; i < n; ++i) fold[order[i]] = i % folds;
  return fold;
}

// Mean test-fold metric over k-fold cross-validation.
inline double cv_score(const Dataset& d, const TreeParams& params, std::size_t n_trees, std::size_t folds,
                       Metric metric, std::uint64_t seed) {
  if (folds < 2) throw InvalidArgument("cv_score: folds must be >= 2");
  if (folds > d.n()) throw InvalidArgument("cv_score: more folds than instances");
  const auto fold = fold_assignment(d.n(), folds, seed);
  double total = 0.0;
  for (std::size_t k = 0; k < folds; ++k) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t r = 0; r < d.n(); ++r) (fold[r] == k ? test_rows : train_rows).push_back(r);
    const Dataset train = d.subset(train_rows);
    const Dataset test = d.subset(test_rows);
    const Count pos = test.positives();
    if (metric == Metric::kAuc && (pos == 0 || pos == static_cast<Count>(test.n())))
      throw InvalidArgument("cv_score: degenerate fold " + std::to_string(k) + " (single class)");
    if (metric == Metric::kAp && pos == 0)
      throw InvalidArgument("cv_score: degenerate fold " + std::to_string(k) + " (no positives)");
    const Forest forest = train_forest(train, params, n_trees, seed + 1 + k);
    total += metric_score(metric, test.labels, predict(forest, test));
  }
  return total / static_cast<double>(folds);
}

// For each tolerance, the largest random_depth reached by incrementing from
// 0 before the CV score falls more than `tolerance` below the greedy
// (random_depth = 0) score.
inline std::vector<std::size_t> tune_drmax(const Dataset& d, const TreeParams& base, std::size_t n_trees,
                                           std::span<const double> tolerances, std::size_t folds, Metric metric,
                                           std::uint64_t seed) {
  for (double tol : tolerances)
    if (!(tol >= 0.0)) throw InvalidArgument("tune_drmax: tolerance must be non-negative");
  TreeParams params = base;
  params.random_depth = 0;
  const double greedy = cv_score(d, params, n_trees, folds, metric, seed);
  std::vector<std::size_t> out(tolerances.size(), base.max_depth);
  std::vector<bool> done(tolerances.size(), false);
  for (std::size_t depth = 1; depth <= base.max_depth; ++depth) {
    if (std::all_of(done.begin(), done.end(), [](bool b) { return b; })) break;
    params.random_depth = depth;
    const double score = cv_score(d, params, n_trees, folds, metric, seed);
    for (std::size_t i = 0; i < tolerances.size(); ++i) {
      if (done[i]) continue;
      if (greedy - score > tolerances[i]) {
        out[i] = depth - 1;
        done[i] = true;
      }
    }
  }
  return out;
}

inline std::size_t tune_drmax(const Dataset& d, const TreeParams& base, std::size_t n_trees, double tolerance,
                              std::size_t folds, Metric metric, std::uint64_t seed) {
  const double tols[] = {tolerance};
  return tune_drmax(d, base, n_trees, tols, folds, metric, seed).front();
}

struct GridPoint {
  std::size_t n_trees = 0;
  std::size_t max_depth = 0;
  std::size_t k = 0;
  double score = 0.0;
};

// Greedy model (random_depth = 0) grid search; first best point wins ties.
inline GridPoint grid_search(const Dataset& d, const TreeParams& base, std::span<const std::size_t> tree_grid,
                             std::span<const std::size_t> depth_grid, std::span<const std::size_t> k_grid,
                             std::size_t folds, Metric metric, std::uint64_t seed) {
  if (tree_grid.empty() || depth_grid.empty() || k_grid.empty()) throw InvalidArgument("grid_search: empty grid");
  GridPoint best;
  bool have = false;
  for (std::size_t t : tree_grid)
    for (std::size_t depth : depth_grid)
      for (std::size_t k : k_grid) {
        TreeParams params = base;
        params.random_depth = 0;
        params.max_depth = depth;
        params.k = k;
        const double score = cv_score(d, params, t, folds, metric, seed);
        if (!have || score > best.score) {
          best = {t, depth, k, score};
          have = true;
        }
      }
  return best;
}

}  // namespace dare

#endif  // DARE_BENCH_HPP_
