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

#ifndef DARE_SPLITCRIT_HPP_
#define DARE_SPLITCRIT_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dare/common.hpp"
#include "dare/rng.hpp"

namespace dare {

enum class Criterion : std::uint8_t { kGini = 0, kEntropy = 1 };

inline std::string to_string(Criterion c) { return c == Criterion::kGini ? "gini" : "entropy"; }

inline Criterion parse_criterion(const std::string& s) {
  if (s == "gini") return Criterion::kGini;
  if (s == "entropy") return Criterion::kEntropy;
  throw InvalidArgument("unknown criterion: " + s);
}

struct NodeCounts {
  Count n = 0;
  Count n_pos = 0;

  bool pure() const { return n_pos == 0 || n_pos == n; }
  friend bool operator==(const NodeCounts&, const NodeCounts&) = default;
};

// Cached statistics of one candidate threshold: the left branch totals plus
// the count / positive count of the two adjacent values it separates.
struct ThresholdStats {
  double value = 0.0;  // (v1 + v2) / 2
  double v1 = 0.0;
  double v2 = 0.0;
  Count n_left = 0;
  Count n_left_pos = 0;
  Count n_v1 = 0;
  Count pos_v1 = 0;
  Count n_v2 = 0;
  Count pos_v2 = 0;

  // Some instance at v1 and some instance at v2 carry opposite labels.
  bool valid() const {
    if (n_v1 < 1 || n_v2 < 1) return false;
    const Count pos = pos_v1 + pos_v2;
    return pos != 0 && pos != n_v1 + n_v2;
  }

  // Removes one instance with attribute value x and label y.
  void remove(double x, std::uint8_t y) {
    if (x <= value) {
      --n_left;
      n_left_pos -= y;
    }
    if (x == v1) {
      --n_v1;
      pos_v1 -= y;
    } else if (x == v2) {
      --n_v2;
      pos_v2 -= y;
    }
  }

  friend bool operator==(const ThresholdStats&, const ThresholdStats&) = default;
};

namespace detail {

inline void check_counts(Count n, Count n_pos, Count n_left, Count n_left_pos) {
  if (n < 1 || n_pos < 0 || n_pos > n || n_left < 0 || n_left > n || n_left_pos < 0 || n_left_pos > n_left ||
      n_pos - n_left_pos < 0 || n_pos - n_left_pos > n - n_left)
    throw InvalidArgument("inconsistent split counts n=" + std::to_string(n) + " n_pos=" + std::to_string(n_pos) +
                          " n_left=" + std::to_string(n_left) + " n_left_pos=" + std::to_string(n_left_pos));
}

using Wide = unsigned __int128;

inline Wide gcd_wide(Wide a, Wide b) {
  while (b != 0) {
    const Wide t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// Weighted Gini as the reduced fraction
//   (n nl nr - (pl^2 + ql^2) nr - (pr^2 + qr^2) nl) / (n nl nr)
// divided once, so equal scores are bit-identical whatever counts produce
// them. An empty branch contributes nothing.
inline double gini_exact(Count n, Count n_pos, Count n_left, Count n_left_pos) {
  const Wide nl = static_cast<Wide>(n_left);
  const Wide nr = static_cast<Wide>(n - n_left);
  const Wide pl = static_cast<Wide>(n_left_pos);
  const Wide pr = static_cast<Wide>(n_pos - n_left_pos);
  const Wide sl = pl * pl + (nl - pl) * (nl - pl);
  const Wide sr = pr * pr + (nr - pr) * (nr - pr);
  Wide num, den;
  if (nl == 0 || nr == 0) {
    const Wide nb = nl == 0 ? nr : nl;
    const Wide sb = nl == 0 ? sr : sl;
    num = nb * nb - sb;
    den = nb * nb;
  } else {
    den = static_cast<Wide>(n) * nl * nr;
    num = den - sl * nr - sr * nl;
  }
  if (num == 0) return 0.0;
  const Wide g = gcd_wide(num, den);
  num /= g;
  den /= g;
  return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

inline double binary_entropy(Count nb, Count pb) {
  double h = 0.0;
  if (pb > 0) {
    const double q = static_cast<double>(pb) / static_cast<double>(nb);
    h -= q * std::log2(q);
  }
  if (pb < nb) {
    const double r = static_cast<double>(nb - pb) / static_cast<double>(nb);
    h -= r * std::log2(r);
  }
  return h;
}

template <typename Impurity>
double weighted_score(Count n, Count n_pos, Count n_left, Count n_left_pos, Impurity impurity) {
  check_counts(n, n_pos, n_left, n_left_pos);
  const Count n_right = n - n_left;
  const Count n_right_pos = n_pos - n_left_pos;
  const double total = static_cast<double>(n);
  double score = 0.0;
  if (n_left > 0) score += static_cast<double>(n_left) / total * impurity(n_left, n_left_pos);
  if (n_right > 0) score += static_cast<double>(n_right) / total * impurity(n_right, n_right_pos);
  return score;
}

}  // namespace detail

// Weighted Gini index of a binary split; lower is better.
inline double gini_score(Count n, Count n_pos, Count n_left, Count n_left_pos) {
  detail::check_counts(n, n_pos, n_left, n_left_pos);
  return detail::gini_exact(n, n_pos, n_left, n_left_pos);
}

// Weighted binary entropy (bits) of a split, with 0 log 0 = 0.
inline double entropy_score(Count n, Count n_pos, Count n_left, Count n_left_pos) {
  return detail::weighted_score(n, n_pos, n_left, n_left_pos, detail::binary_entropy);
}

inline double split_score(Criterion c, const NodeCounts& counts, const ThresholdStats& t) {
  return c == Criterion::kGini ? gini_score(counts.n, counts.n_pos, t.n_left, t.n_left_pos)
                               : entropy_score(counts.n, counts.n_pos, t.n_left, t.n_left_pos);
}

struct ValueLabel {
  double value;
  std::uint8_t label;
};

// Valid thresholds over (value, label) pairs already sorted by value.
inline std::vector<ThresholdStats> enumerate_sorted(std::span<const ValueLabel> sorted) {
  std::vector<ThresholdStats> out;
  const std::size_t n = sorted.size();
  std::size_t i = 0;
  Count cum = 0, cum_pos = 0;
  // Group previous: value, count, positives.
  double prev_value = 0.0;
  Count prev_n = 0, prev_pos = 0;
  while (i < n) {
    const double v = sorted[i].value;
    Count gn = 0, gp = 0;
    while (i < n && sorted[i].value == v) {
      ++gn;
      gp += sorted[i].label;
      ++i;
    }
    if (prev_n > 0) {
      ThresholdStats t;
      t.v1 = prev_value;
      t.v2 = v;
      t.value = (prev_value + v) / 2.0;
      t.n_left = cum;
      t.n_left_pos = cum_pos;
      t.n_v1 = prev_n;
      t.pos_v1 = prev_pos;
      t.n_v2 = gn;
      t.pos_v2 = gp;
      if (t.valid()) out.push_back(t);
    }
    cum += gn;
    cum_pos += gp;
    prev_value = v;
    prev_n = gn;
    prev_pos = gp;
  }
  return out;
}

inline void sort_by_value(std::vector<ValueLabel>& pairs) {
  std::sort(pairs.begin(), pairs.end(), [](const ValueLabel& a, const ValueLabel& b) { return a.value < b.value; });
}

// One entry per adjacent distinct-value pair that has opposite labels across
// it, sorted by threshold.
inline std::vector<ThresholdStats> enumerate_valid_thresholds(std::span<const double> values,
                                                              std::span<const std::uint8_t> labels) {
  if (values.size() != labels.size()) throw InvalidArgument("enumerate_valid_thresholds: length mismatch");
  std::vector<ValueLabel> pairs(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) pairs[i] = {values[i], labels[i]};
  sort_by_value(pairs);
  return enumerate_sorted(pairs);
}

namespace detail {

inline void sort_thresholds(std::vector<ThresholdStats>& ts) {
  std::sort(ts.begin(), ts.end(), [](const ThresholdStats& a, const ThresholdStats& b) { return a.value < b.value; });
}

inline std::vector<ThresholdStats> draw_subset(const std::vector<ThresholdStats>& pool, std::size_t k, Rng& rng) {
  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.partial_shuffle(order, k);
  std::vector<ThresholdStats> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(pool[order[i]]);
  sort_thresholds(out);
  return out;
}

}  // namespace detail

// Uniform size-k subset without replacement (all candidates if there are at
// most k), sorted by threshold.
inline std::vector<ThresholdStats> sample_thresholds(const std::vector<ThresholdStats>& candidates, std::size_t k,
                                                     Rng& rng) {
  if (k < 1) throw InvalidArgument("sample_thresholds: k must be >= 1");
  if (candidates.size() <= k) return candidates;
  return detail::draw_subset(candidates, k, rng);
}

// Uniform draw of `need` thresholds from `candidates` that are not already in
// `kept` (matched by threshold value); returns every available one if fewer.
inline std::vector<ThresholdStats> resample_replacements(const std::vector<ThresholdStats>& candidates,
                                                         const std::vector<ThresholdStats>& kept, std::size_t need,
                                                         Rng& rng) {
  std::vector<ThresholdStats> pool;
  pool.reserve(candidates.size());
  for (const auto& c : candidates) {
    const bool taken =
        std::any_of(kept.begin(), kept.end(), [&](const ThresholdStats& t) { return t.value == c.value; });
    if (!taken) pool.push_back(c);
  }
  if (pool.size() <= need) return pool;
  return detail::draw_subset(pool, need, rng);
}

struct SplitCandidate {
  std::size_t attribute = 0;
  double threshold = 0.0;
  double score = 0.0;
};

// Total order used to pick a split: lower score, then lower attribute index,
// then lower threshold.
inline bool precedes(const SplitCandidate& a, const SplitCandidate& b) {
  if (a.score != b.score) return a.score < b.score;
  if (a.attribute != b.attribute) return a.attribute < b.attribute;
  return a.threshold < b.threshold;
}

inline SplitCandidate select_best(std::span<const SplitCandidate> scored) {
  if (scored.empty()) throw InvalidArgument("select_best: no candidates");
  SplitCandidate best = scored.front();
  for (const auto& c : scored.subspan(1))
    if (precedes(c, best)) best = c;
  return best;
}

}  // namespace dare

#endif  // DARE_SPLITCRIT_HPP_
