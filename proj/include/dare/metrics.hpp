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

#ifndef DARE_METRICS_HPP_
#define DARE_METRICS_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "dare/common.hpp"

namespace dare {

enum class Metric : std::uint8_t { kAccuracy = 0, kAuc = 1, kAp = 2 };

inline std::string to_string(Metric m) {
  switch (m) {
    case Metric::kAccuracy: return "accuracy";
    case Metric::kAuc: return "auc";
    case Metric::kAp: return "ap";
  }
  return "?";
}

inline Metric parse_metric(const std::string& s) {
  if (s == "accuracy" || s == "acc") return Metric::kAccuracy;
  if (s == "auc") return Metric::kAuc;
  if (s == "ap") return Metric::kAp;
  throw InvalidArgument("unknown metric: " + s);
}

// AP below 1% positives, AUC up to 20%, accuracy otherwise.
inline Metric metric_for_positive_rate(double rate) {
  if (rate < 0.01) return Metric::kAp;
  if (rate <= 0.20) return Metric::kAuc;
  return Metric::kAccuracy;
}

namespace detail {

inline void check_lengths(std::span<const std::uint8_t> y, std::span<const double> p) {
  if (y.size() != p.size()) throw InvalidArgument("metric: label/score length mismatch");
  if (y.empty()) throw InvalidArgument("metric: empty input");
}

}  // namespace detail

inline double metric_accuracy(std::span<const std::uint8_t> y_true, std::span<const double> y_prob) {
  detail::check_lengths(y_true, y_prob);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) correct += ((y_prob[i] > 0.5) == (y_true[i] != 0)) ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(y_true.size());
}

// Mann-Whitney statistic: P(score of a random positive > score of a random
// negative), ties credited 1/2. Uses doubled mid-ranks so the sum is exact.
inline double metric_auc(std::span<const std::uint8_t> y_true, std::span<const double> y_prob) {
  detail::check_lengths(y_true, y_prob);
  const std::size_t n = y_true.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y_prob[a] < y_prob[b]; });
  Count positives = 0;
  Count twice_rank_sum = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && y_prob[order[j]] == y_prob[order[i]]) ++j;
    // Ranks i+1 .. j share the mid-rank (i + 1 + j) / 2.
    const Count twice_mid = static_cast<Count>(i + 1 + j);
    for (std::size_t m = i; m < j; ++m) {
      if (y_true[order[m]]) {
        ++positives;
        twice_rank_sum += twice_mid;
      }
    }
    i = j;
  }
  const Count negatives = static_cast<Count>(n) - positives;
  if (positives == 0 || negatives == 0) throw InvalidArgument("metric_auc: both classes must be present");
  const double numerator = static_cast<double>(twice_rank_sum - positives * (positives + 1));
  return numerator / (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

// Step-wise average precision over a descending-score ranking; equal scores
// keep input order (stable sort).
inline double metric_ap(std::span<const std::uint8_t> y_true, std::span<const double> y_prob) {
  detail::check_lengths(y_true, y_prob);
  const std::size_t n = y_true.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y_prob[a] > y_prob[b]; });
  double sum = 0.0;
  Count hits = 0;
  for (std::size_t r = 0; r < n; ++r) {
    if (y_true[order[r]]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  }
  if (hits == 0) throw InvalidArgument("metric_ap: no positive instances");
  return sum / static_cast<double>(hits);
}

inline double metric_score(Metric m, std::span<const std::uint8_t> y_true, std::span<const double> y_prob) {
  switch (m) {
    case Metric::kAccuracy: return metric_accuracy(y_true, y_prob);
    case Metric::kAuc: return metric_auc(y_true, y_prob);
    case Metric::kAp: return metric_ap(y_true, y_prob);
  }
  throw InvalidArgument("unknown metric");
}

}  // namespace dare

#endif  // DARE_METRICS_HPP_
