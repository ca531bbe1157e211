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

#include <cmath>
#include <map>
#include <set>

#include "test_util.hpp"

namespace dare {
namespace {

using testing::entropy_oracle;
using testing::gini_oracle;

struct Tuple {
  Count n, n_pos, nl, nl_pos;
};

std::vector<Tuple> random_tuples(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Tuple> out;
  while (out.size() < count) {
    const Count n = 1 + static_cast<Count>(rng.uniform_index(rng.uniform01() < 0.5 ? 20 : 100000));
    const Count n_pos = static_cast<Count>(rng.uniform_index(static_cast<std::uint64_t>(n) + 1));
    const Count nl = static_cast<Count>(rng.uniform_index(static_cast<std::uint64_t>(n) + 1));
    const Count lo = std::max<Count>(0, nl - (n - n_pos));
    const Count hi = std::min(nl, n_pos);
    const Count nl_pos = lo + static_cast<Count>(rng.uniform_index(static_cast<std::uint64_t>(hi - lo) + 1));
    out.push_back({n, n_pos, nl, nl_pos});
  }
  return out;
}

TEST(GiniScore, Examples) {
  EXPECT_EQ(gini_score(4, 2, 2, 2), 0.0);
  EXPECT_DOUBLE_EQ(gini_score(4, 2, 2, 1), 0.5);
  EXPECT_NEAR(gini_score(10, 4, 6, 1), gini_oracle(10, 4, 6, 1), 1e-12);
}

TEST(GiniScore, MatchesExactFractions) {
  for (const auto& t : random_tuples(1000, 11)) {
    const double s = gini_score(t.n, t.n_pos, t.nl, t.nl_pos);
    ASSERT_NEAR(s, gini_oracle(t.n, t.n_pos, t.nl, t.nl_pos), 1e-12);
    ASSERT_GE(s, 0.0);
    ASSERT_LE(s, 0.5);
  }
}

TEST(EntropyScore, Examples) {
  EXPECT_EQ(entropy_score(4, 2, 2, 2), 0.0);
  EXPECT_DOUBLE_EQ(entropy_score(4, 2, 2, 1), 1.0);
  EXPECT_NEAR(entropy_score(10, 4, 6, 1), static_cast<double>(entropy_oracle(10, 4, 6, 1)), 1e-12);
}

TEST(EntropyScore, MatchesDirectEvaluation) {
  for (const auto& t : random_tuples(1000, 12)) {
    const double s = entropy_score(t.n, t.n_pos, t.nl, t.nl_pos);
    ASSERT_NEAR(s, static_cast<double>(entropy_oracle(t.n, t.n_pos, t.nl, t.nl_pos)), 1e-12);
    ASSERT_GE(s, 0.0);
    ASSERT_LE(s, 1.0 + 1e-15);
  }
}

TEST(Scores, RejectInconsistentCounts) {
  EXPECT_THROW(gini_score(0, 0, 0, 0), InvalidArgument);
  EXPECT_THROW(gini_score(4, 5, 2, 1), InvalidArgument);
  EXPECT_THROW(gini_score(4, 2, 5, 1), InvalidArgument);
  EXPECT_THROW(entropy_score(4, 2, 2, 3), InvalidArgument);
  EXPECT_THROW(entropy_score(4, 1, 1, -1), InvalidArgument);
}

TEST(Scores, DependOnlyOnCounts) {
  const double a = gini_score(1000, 377, 411, 96);
  const double b = gini_score(1000, 377, 411, 96);
  EXPECT_EQ(std::memcmp(&a, &b, sizeof a), 0);
}

// Every adjacent distinct-value pair whose two value groups together hold
// both labels, with counts by scanning.
std::vector<ThresholdStats> enumerate_oracle(const std::vector<double>& x, const std::vector<std::uint8_t>& y) {
  std::set<double> distinct(x.begin(), x.end());
  std::vector<double> vals(distinct.begin(), distinct.end());
  std::vector<ThresholdStats> out;
  for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
    ThresholdStats t;
    t.v1 = vals[i];
    t.v2 = vals[i + 1];
    t.value = (t.v1 + t.v2) / 2;
    std::set<int> labels;
    for (std::size_t r = 0; r < x.size(); ++r) {
      if (x[r] <= t.value) {
        ++t.n_left;
        t.n_left_pos += y[r];
      }
      if (x[r] == t.v1) {
        ++t.n_v1;
        t.pos_v1 += y[r];
        labels.insert(y[r]);
      }
      if (x[r] == t.v2) {
        ++t.n_v2;
        t.pos_v2 += y[r];
        labels.insert(y[r]);
      }
    }
    if (labels.size() == 2) out.push_back(t);
  }
  return out;
}

void expect_same_stats(const std::vector<ThresholdStats>& a, const std::vector<ThresholdStats>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].value, b[i].value);
    EXPECT_EQ(a[i].v1, b[i].v1);
    EXPECT_EQ(a[i].v2, b[i].v2);
    EXPECT_EQ(a[i].n_left, b[i].n_left);
    EXPECT_EQ(a[i].n_left_pos, b[i].n_left_pos);
    EXPECT_EQ(a[i].n_v1, b[i].n_v1);
    EXPECT_EQ(a[i].pos_v1, b[i].pos_v1);
    EXPECT_EQ(a[i].n_v2, b[i].n_v2);
    EXPECT_EQ(a[i].pos_v2, b[i].pos_v2);
  }
}

TEST(EnumerateValidThresholds, Examples) {
  const auto a = enumerate_valid_thresholds(std::vector<double>{1, 2, 3, 4}, std::vector<std::uint8_t>{1, 0, 1, 0});
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a[0].value, 1.5);
  EXPECT_EQ(a[1].value, 2.5);
  EXPECT_EQ(a[2].value, 3.5);
  EXPECT_TRUE(enumerate_valid_thresholds(std::vector<double>{1, 2, 3}, std::vector<std::uint8_t>{1, 1, 1}).empty());
  const auto b = enumerate_valid_thresholds(std::vector<double>{1, 1, 2}, std::vector<std::uint8_t>{1, 0, 1});
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b[0].value, 1.5);
  EXPECT_EQ(b[0].n_v1, 2);
  EXPECT_EQ(b[0].pos_v1, 1);
  EXPECT_EQ(b[0].n_left, 2);
}

TEST(EnumerateValidThresholds, SameLabelNeighboursAreSkipped) {
  const auto t = enumerate_valid_thresholds(std::vector<double>{1, 2, 3, 4}, std::vector<std::uint8_t>{0, 0, 1, 1});
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].value, 2.5);
}

TEST(EnumerateValidThresholds, MatchesBruteForce) {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(40);
    std::vector<double> x(n);
    std::vector<std::uint8_t> y(n);
    const std::size_t levels = 1 + rng.uniform_index(12);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng.uniform_index(levels)) * 0.5 - 2.0;
      y[i] = static_cast<std::uint8_t>(rng.uniform_index(2));
    }
    expect_same_stats(enumerate_valid_thresholds(x, y), enumerate_oracle(x, y));
  }
}

TEST(ThresholdStats, RemoveMatchesRecount) {
  Rng rng(6);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 3 + rng.uniform_index(30);
    std::vector<double> x(n);
    std::vector<std::uint8_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng.uniform_index(6));
      y[i] = static_cast<std::uint8_t>(rng.uniform_index(2));
    }
    auto stats = enumerate_valid_thresholds(x, y);
    const std::size_t victim = rng.uniform_index(n);
    for (auto& t : stats) t.remove(x[victim], y[victim]);
    x.erase(x.begin() + static_cast<long>(victim));
    y.erase(y.begin() + static_cast<long>(victim));
    const auto fresh = enumerate_oracle(x, y);
    for (const auto& t : stats) {
      // Recount this (v1, v2) pair directly on the survivors.
      Count nl = 0, nlp = 0, n1 = 0, p1 = 0, n2 = 0, p2 = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= t.value) nl++, nlp += y[i];
        if (x[i] == t.v1) n1++, p1 += y[i];
        if (x[i] == t.v2) n2++, p2 += y[i];
      }
      EXPECT_EQ(t.n_left, nl);
      EXPECT_EQ(t.n_left_pos, nlp);
      EXPECT_EQ(t.n_v1, n1);
      EXPECT_EQ(t.pos_v1, p1);
      EXPECT_EQ(t.n_v2, n2);
      EXPECT_EQ(t.pos_v2, p2);
      const bool in_fresh =
          std::any_of(fresh.begin(), fresh.end(), [&](const ThresholdStats& f) { return f.value == t.value; });
      EXPECT_EQ(t.valid(), in_fresh) << "threshold " << t.value;
    }
  }
}

std::vector<ThresholdStats> numbered_pool(std::size_t m) {
  std::vector<ThresholdStats> pool(m);
  for (std::size_t i = 0; i < m; ++i) {
    pool[i].value = static_cast<double>(i) + 0.5;
    pool[i].v1 = static_cast<double>(i);
    pool[i].v2 = static_cast<double>(i) + 1;
  }
  return pool;
}

TEST(SampleThresholds, UndersizedPoolIsReturnedWhole) {
  Rng rng(1);
  EXPECT_EQ(sample_thresholds(numbered_pool(3), 5, rng).size(), 3u);
  EXPECT_EQ(sample_thresholds(numbered_pool(10), 5, rng).size(), 5u);
  EXPECT_THROW(sample_thresholds(numbered_pool(3), 0, rng), InvalidArgument);
}

TEST(SampleThresholds, SubsetsAreUniform) {
  const auto pool = numbered_pool(10);
  Rng rng(2);
  std::map<unsigned, std::size_t> freq;
  for (int i = 0; i < 252000; ++i) {
    const auto s = sample_thresholds(pool, 5, rng);
    ASSERT_TRUE(std::is_sorted(s.begin(), s.end(), [](auto& a, auto& b) { return a.value < b.value; }));
    unsigned mask = 0;
    for (const auto& t : s) mask |= 1u << static_cast<unsigned>(t.v1);
    ASSERT_EQ(__builtin_popcount(mask), 5);
    ++freq[mask];
  }
  ASSERT_EQ(freq.size(), 252u);
  std::vector<std::size_t> counts;
  for (const auto& [mask, c] : freq) counts.push_back(c);
  EXPECT_GT(testing::chi_square_uniform_pvalue(counts), 0.001);
}

TEST(ResampleReplacements, UniformOverUnselected) {
  const auto pool = numbered_pool(5);
  const std::vector<ThresholdStats> kept{pool[2]};
  Rng rng(3);
  std::vector<std::size_t> counts(5, 0);
  for (int i = 0; i < 40000; ++i) {
    const auto r = resample_replacements(pool, kept, 1, rng);
    ASSERT_EQ(r.size(), 1u);
    ++counts[static_cast<std::size_t>(r[0].v1)];
  }
  EXPECT_EQ(counts[2], 0u);
  counts.erase(counts.begin() + 2);
  EXPECT_GT(testing::chi_square_uniform_pvalue(counts), 0.001);
}

TEST(ResampleReplacements, Exhaustion) {
  const auto pool = numbered_pool(2);
  Rng rng(4);
  const auto one = resample_replacements(pool, {pool[0]}, 2, rng);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].value, pool[1].value);
  EXPECT_TRUE(resample_replacements(pool, pool, 1, rng).empty());
}

TEST(SelectBest, SingleAndTieBreak) {
  const std::vector<SplitCandidate> one{{4, 1.5, 0.3}};
  EXPECT_EQ(select_best(one).attribute, 4u);
  const std::vector<SplitCandidate> tie{{3, 0.5, 0.2}, {1, 9.5, 0.2}};
  EXPECT_EQ(select_best(tie).attribute, 1u);
  const std::vector<SplitCandidate> same_attr{{2, 7.5, 0.2}, {2, 1.5, 0.2}};
  EXPECT_EQ(select_best(same_attr).threshold, 1.5);
  EXPECT_THROW(select_best(std::vector<SplitCandidate>{}), InvalidArgument);
}

TEST(SelectBest, MatchesExhaustiveArgmin) {
  Rng rng(8);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<SplitCandidate> c(1 + rng.uniform_index(30));
    for (auto& s : c) {
      s.attribute = rng.uniform_index(4);
      s.threshold = static_cast<double>(rng.uniform_index(5));
      s.score = static_cast<double>(rng.uniform_index(4)) / 4.0;
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < c.size(); ++i) {
      const auto a = std::tie(c[i].score, c[i].attribute, c[i].threshold);
      const auto b = std::tie(c[best].score, c[best].attribute, c[best].threshold);
      if (a < b) best = i;
    }
    const auto got = select_best(c);
    EXPECT_EQ(got.score, c[best].score);
    EXPECT_EQ(got.attribute, c[best].attribute);
    EXPECT_EQ(got.threshold, c[best].threshold);
  }
}

TEST(Criterion, ParseAndName) {
  EXPECT_EQ(parse_criterion("gini"), Criterion::kGini);
  EXPECT_EQ(parse_criterion("entropy"), Criterion::kEntropy);
  EXPECT_EQ(to_string(Criterion::kEntropy), "entropy");
  EXPECT_THROW(parse_criterion("mse"), InvalidArgument);
}

}  // namespace
}  // namespace dare
