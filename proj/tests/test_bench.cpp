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


#include <gtest/gtest.h>

#include <limits>
#include <map>

#include "test_util.hpp"

namespace dare {
namespace {

using testing::make_dataset;

TEST(NextVictim, SoleInstance) {
  const Forest f = train_forest(make_dataset({{1}}, {1}), TreeParams{}, 1, 1);
  Rng rng(1);
  EXPECT_EQ(next_victim(Adversary::random(), f, rng), 0);
  EXPECT_EQ(next_victim(Adversary::worst_of(1000), f, rng), 0);
}

TEST(NextVictim, WorstOfAllIsGlobalArgmax) {
  const Dataset d = make_synthetic(400, 3);
  TreeParams params;
  params.random_depth = 1;
  const Forest f = train_forest(d, params, 3, 5);
  InstanceId best = -1;
  Count best_cost = -1;
  for (InstanceId id : f.database().live_ids()) {
    const Count c = dry_run_cost(f, id);
    if (c > best_cost) best = id, best_cost = c;
  }
  Rng rng(2);
  EXPECT_EQ(next_victim(Adversary::worst_of(400), f, rng), best);
  EXPECT_EQ(next_victim(Adversary::worst_of(100000), f, rng), best);
}

TEST(NextVictim, RandomIsUniform) {
  Rng data_rng(1);
  const Forest f = train_forest(testing::random_tiny_dataset(12, 2, 5, data_rng), TreeParams{}, 1, 1);
  Rng rng(3);
  std::vector<std::size_t> counts(12, 0);
  for (int i = 0; i < 24000; ++i) ++counts[static_cast<std::size_t>(next_victim(Adversary::random(), f, rng))];
  EXPECT_GT(testing::chi_square_uniform_pvalue(counts), 0.001);
}

TEST(Adversary, Names) {
  EXPECT_EQ(Adversary::random().name(), "random");
  EXPECT_EQ(Adversary::worst_of(1000).name(), "worst1000");
  EXPECT_THROW(Adversary::worst_of(0), InvalidArgument);
}

TEST(RunBenchmark, SpeedupIdentity) {
  const Dataset d = make_synthetic(4000, 4);
  const auto [train, test] = train_test_split(d, 0.8, 1);
  Budget budget;
  budget.max_seconds = 20;
  const auto r = run_benchmark(train, &test, TreeParams{}, 3, 7, Adversary::random(), budget);
  EXPECT_EQ(r.deletions_completed, r.per_deletion_times.size());
  EXPECT_EQ(r.speedup(), static_cast<double>(r.deletions_completed));
  double sum = 0;
  for (double t : r.per_deletion_times) sum += t;
  EXPECT_LE(sum, r.naive_seconds);
  EXPECT_GE(r.speedup(), 1.0);
  ASSERT_TRUE(r.metric_before.has_value());
  ASSERT_TRUE(r.metric_after.has_value());
  EXPECT_GT(*r.metric_before, 0.6);
  Count hist_total = 0;
  for (const auto& [depth, c] : r.retrain_depth_histogram) hist_total += c;
  Count record_total = 0;
  for (const auto& rec : r.records) record_total += rec.cost;
  EXPECT_EQ(hist_total, record_total);
}

TEST(RunBenchmark, DeletionBudgetIsALowerBound) {
  const Dataset d = make_synthetic(3000, 5);
  Budget budget;
  budget.max_deletions = 5;
  const auto r = run_benchmark(d, nullptr, TreeParams{}, 2, 1, Adversary::random(), budget);
  EXPECT_EQ(r.deletions_completed, 5u);
  EXPECT_TRUE(r.budget_exhausted);
  EXPECT_FALSE(r.metric_before.has_value());
  Budget empty;
  empty.max_deletions = 0;
  EXPECT_THROW(run_benchmark(d, nullptr, TreeParams{}, 2, 1, Adversary::random(), empty), InvalidArgument);
}

TEST(FoldAssignment, DeterministicAndBalanced) {
  const auto a = fold_assignment(103, 5, 9);
  EXPECT_EQ(a, fold_assignment(103, 5, 9));
  std::vector<int> sizes(5, 0);
  for (auto f : a) ++sizes[f];
  for (int s : sizes) EXPECT_TRUE(s == 20 || s == 21);
}

TEST(CvScore, ConstantPredictionClosedForm) {
  // No feature varies, so every tree is one leaf predicting the training
  // fold's positive rate, which stays below 0.5: accuracy = share of
  // negatives per fold.
  std::vector<std::uint8_t> y{1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
  const Dataset d = make_dataset({std::vector<double>(10, 2.0)}, y);
  const auto folds = fold_assignment(10, 5, 3);
  double expected = 0;
  for (std::size_t k = 0; k < 5; ++k) {
    int n = 0, neg = 0;
    for (std::size_t r = 0; r < 10; ++r)
      if (folds[r] == k) ++n, neg += y[r] == 0;
    expected += static_cast<double>(neg) / n;
  }
  expected /= 5;
  EXPECT_DOUBLE_EQ(cv_score(d, TreeParams{}, 2, 5, Metric::kAccuracy, 3), expected);
}

TEST(CvScore, LeaveOneOutMatchesManualEnumeration) {
  Rng rng(4);
  const Dataset d = testing::random_tiny_dataset(10, 2, 4, rng);
  TreeParams params;
  params.max_depth = 3;
  params.p_tilde = 2;
  const std::uint64_t seed = 17;
  const auto folds = fold_assignment(10, 10, seed);
  double manual = 0;
  for (std::size_t k = 0; k < 10; ++k) {
    std::vector<std::size_t> rest;
    std::size_t held = 0;
    for (std::size_t r = 0; r < 10; ++r) {
      if (folds[r] == k) held = r;
      else rest.push_back(r);
    }
    const Forest f = train_forest(d.subset(rest), params, 3, seed + 1 + k);
    const double p = predict(f, d.row(held));
    manual += ((p > 0.5) == (d.labels[held] == 1)) ? 1.0 : 0.0;
  }
  EXPECT_DOUBLE_EQ(cv_score(d, params, 3, 10, Metric::kAccuracy, seed), manual / 10);
}

TEST(CvScore, Errors) {
  const Dataset d = make_synthetic(20, 1);
  EXPECT_THROW(cv_score(d, TreeParams{}, 1, 1, Metric::kAccuracy, 1), InvalidArgument);
  EXPECT_THROW(cv_score(d, TreeParams{}, 1, 21, Metric::kAccuracy, 1), InvalidArgument);
  // Leave-one-out folds hold a single class.
  EXPECT_THROW(cv_score(d, TreeParams{}, 1, 20, Metric::kAuc, 1), InvalidArgument);
}

TEST(TuneDrmax, InfiniteToleranceReachesMaxDepth) {
  const Dataset d = make_synthetic(300, 2);
  TreeParams base;
  base.max_depth = 4;
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_EQ(tune_drmax(d, base, 2, inf, 3, Metric::kAccuracy, 1), 4u);
}

TEST(TuneDrmax, ZeroToleranceStopsAtFirstDegradation) {
  // x0 separates the classes perfectly; nine noise columns. A greedy stump
  // finds x0, a random stump almost never does.
  Rng rng(5);
  std::vector<std::vector<double>> cols(10, std::vector<double>(200));
  std::vector<std::uint8_t> y(200);
  for (std::size_t i = 0; i < 200; ++i) {
    y[i] = static_cast<std::uint8_t>(i % 2);
    cols[0][i] = y[i] ? 1.0 + rng.uniform01() : -rng.uniform01();
    for (std::size_t a = 1; a < 10; ++a) cols[a][i] = rng.uniform01();
  }
  const Dataset d = make_dataset(cols, y);
  TreeParams base;
  base.max_depth = 1;
  base.p_tilde = 10;
  EXPECT_EQ(cv_score(d, base, 1, 5, Metric::kAccuracy, 2), 1.0);
  const std::vector<double> tols{0.0, std::numeric_limits<double>::infinity()};
  EXPECT_EQ(tune_drmax(d, base, 1, tols, 5, Metric::kAccuracy, 2), (std::vector<std::size_t>{0, 1}));
  EXPECT_THROW(tune_drmax(d, base, 1, -0.1, 5, Metric::kAccuracy, 2), InvalidArgument);
}

TEST(GridSearch, SinglePointAndDeterminism) {
  const Dataset d = make_synthetic(300, 3);
  const std::vector<std::size_t> t{2}, depth{3}, k{5};
  const auto g = grid_search(d, TreeParams{}, t, depth, k, 3, Metric::kAccuracy, 4);
  EXPECT_EQ(g.n_trees, 2u);
  EXPECT_EQ(g.max_depth, 3u);
  EXPECT_EQ(g.k, 5u);
  const std::vector<std::size_t> depths{1, 2, 4};
  const auto a = grid_search(d, TreeParams{}, t, depths, k, 3, Metric::kAccuracy, 4);
  const auto b = grid_search(d, TreeParams{}, t, depths, k, 3, Metric::kAccuracy, 4);
  EXPECT_EQ(a.max_depth, b.max_depth);
  EXPECT_EQ(a.score, b.score);
  EXPECT_THROW(grid_search(d, TreeParams{}, std::vector<std::size_t>{}, depth, k, 3, Metric::kAccuracy, 4),
               InvalidArgument);
}

}  // namespace
}  // namespace dare
