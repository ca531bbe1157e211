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


// Shared fixtures for the unit suites and the acceptance binary.

#ifndef DARE_TESTS_TEST_UTIL_HPP_
#define DARE_TESTS_TEST_UTIL_HPP_

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/rational.hpp>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "dare/dare.hpp"

namespace dare::testing {

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("dare_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string write(const std::string& name, const std::string& content) const {
    std::ofstream out(file(name), std::ios::binary);
    out << content;
    return file(name);
  }

 private:
  std::filesystem::path path_;
};

// Upper-tail probability of Pearson's statistic against uniform expectation.
inline double chi_square_uniform_pvalue(const std::vector<std::size_t>& counts) {
  std::size_t total = 0;
  for (auto c : counts) total += c;
  const double expected = static_cast<double>(total) / static_cast<double>(counts.size());
  double stat = 0.0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

inline Dataset make_dataset(std::vector<std::vector<double>> columns, std::vector<std::uint8_t> labels) {
  Dataset d;
  d.columns = std::move(columns);
  d.labels = std::move(labels);
  d.ids.resize(d.labels.size());
  for (std::size_t i = 0; i < d.ids.size(); ++i) d.ids[i] = static_cast<InstanceId>(i);
  for (std::size_t j = 0; j < d.columns.size(); ++j) d.feature_names.push_back("f" + std::to_string(j));
  return d;
}

// Small-integer features so duplicate values and score ties are common.
inline Dataset random_tiny_dataset(std::size_t n, std::size_t p, std::size_t levels, Rng& rng) {
  std::vector<std::vector<double>> cols(p, std::vector<double>(n));
  for (auto& col : cols)
    for (auto& v : col) v = static_cast<double>(rng.uniform_index(levels));
  std::vector<std::uint8_t> labels(n);
  for (auto& y : labels) y = static_cast<std::uint8_t>(rng.uniform_index(2));
  return make_dataset(std::move(cols), std::move(labels));
}

// No randomness left: every non-constant attribute, every valid threshold.
inline TreeParams deterministic_params(std::size_t p, std::size_t max_depth) {
  TreeParams params;
  params.max_depth = max_depth;
  params.random_depth = 0;
  params.p_tilde = p;
  params.k = 1u << 20;
  return params;
}

// Fresh forest trained on the database's surviving rows.
inline Forest scratch_retrain(const Forest& f) {
  return train_forest_on(f.database(), f.params(), f.n_trees(), f.seed());
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2.0;
}

using Rational = boost::rational<long long>;

// Weighted Gini impurity of the two branches, in exact fractions.
inline double gini_oracle(Count n, Count n_pos, Count nl, Count nl_pos) {
  const Count branches[2][2] = {{nl, nl_pos}, {n - nl, n_pos - nl_pos}};
  Rational total = 0;
  for (const auto& b : branches) {
    if (b[0] == 0) continue;
    const Rational p1(b[1], b[0]);
    const Rational p0(b[0] - b[1], b[0]);
    total += Rational(b[0], n) * (Rational(1) - p1 * p1 - p0 * p0);
  }
  return boost::rational_cast<double>(total);
}

inline long double entropy_oracle(Count n, Count n_pos, Count nl, Count nl_pos) {
  const Count branches[2][2] = {{nl, nl_pos}, {n - nl, n_pos - nl_pos}};
  long double total = 0;
  for (const auto& b : branches) {
    if (b[0] == 0) continue;
    long double h = 0;
    for (Count c : {b[1], b[0] - b[1]}) {
      if (c == 0) continue;
      const long double q = static_cast<long double>(c) / static_cast<long double>(b[0]);
      h -= q * std::log2(q);
    }
    total += static_cast<long double>(b[0]) / static_cast<long double>(n) * h;
  }
  return total;
}

inline double auc_pairs(const std::vector<std::uint8_t>& y, const std::vector<double>& s) {
  double wins = 0;
  double pairs = 0;
  for (std::size_t i = 0; i < y.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (!(y[i] == 1 && y[j] == 0)) continue;
      pairs += 1;
      if (s[i] > s[j]) wins += 1;
      else if (s[i] == s[j]) wins += 0.5;
    }
  return wins / pairs;
}

// Walk the ranking from the top; at each positive, precision of the prefix
// counted from scratch.
inline double ap_rank_walk(const std::vector<std::uint8_t>& y, const std::vector<double>& s) {
  std::vector<std::pair<double, std::size_t>> keyed;
  for (std::size_t i = 0; i < y.size(); ++i) keyed.push_back({-s[i], i});
  std::sort(keyed.begin(), keyed.end());
  double sum = 0;
  int positives = 0;
  for (std::size_t r = 0; r < keyed.size(); ++r) {
    if (!y[keyed[r].second]) continue;
    ++positives;
    int hits = 0;
    for (std::size_t q = 0; q <= r; ++q) hits += y[keyed[q].second];
    sum += static_cast<double>(hits) / static_cast<double>(r + 1);
  }
  return sum / positives;
}

}  // namespace dare::testing

#endif  // DARE_TESTS_TEST_UTIL_HPP_
