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

#ifndef DARE_UNLEARN_HPP_
#define DARE_UNLEARN_HPP_

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "dare/common.hpp"
#include "dare/dataset.hpp"
#include "dare/rng.hpp"
#include "dare/splitcrit.hpp"
#include "dare/tree.hpp"

namespace dare {

struct RetrainEvent {
  std::size_t depth = 0;
  Count instances = 0;  // size of the rebuilt subtree's data

  friend bool operator==(const RetrainEvent&, const RetrainEvent&) = default;
};

struct TreeDeletionStats {
  std::vector<RetrainEvent> retrains;
  std::size_t resamples = 0;  // thresholds / attributes / random thresholds redrawn
  double seconds = 0.0;
};

struct DeletionReport {
  std::vector<InstanceId> ids;
  std::vector<TreeDeletionStats> trees;
  double seconds = 0.0;

  // Total instances across retrained nodes of all trees (adversary cost).
  Count cost() const {
    Count c = 0;
    for (const auto& t : trees)
      for (const auto& e : t.retrains) c += e.instances;
    return c;
  }

  std::size_t retrain_count() const {
    std::size_t c = 0;
    for (const auto& t : trees) c += t.retrains.size();
    return c;
  }

  std::size_t resample_count() const {
    std::size_t c = 0;
    for (const auto& t : trees) c += t.resamples;
    return c;
  }
};

namespace detail {

enum class Verdict {
  kDescend,          // statistics updated, structure unchanged
  kRebuildChildren,  // greedy split changed: retrain both children
  kRebuildRandom,    // random node lost a branch
  kRebuildSubtree,   // node itself must be retrained (e.g. became a leaf)
};

struct Evaluation {
  Verdict verdict = Verdict::kDescend;
  std::optional<std::vector<Slot>> remaining;  // node data minus removed, once gathered
  std::size_t resamples = 0;
};

// Applies the removal of `removed` (sorted slots, all under `node`) to a
// greedy node's counts and candidate statistics and decides what must be
// retrained. `counts` and `split` may be the node's own members or copies.
inline Evaluation evaluate_greedy(const Database& db, const Node& node, std::span<const Slot> removed,
                                  std::size_t depth, const TreeParams& params, Rng& rng, NodeCounts& counts,
                                  GreedySplit& split) {
  Evaluation ev;
  for (Slot s : removed) {
    const std::uint8_t y = db.label(s);
    --counts.n;
    counts.n_pos -= y;
    for (auto& as : split.attributes) {
      const double x = db.value(s, as.attribute);
      for (auto& t : as.thresholds) t.remove(x, y);
    }
  }
  if (counts.n == 0 || stop_here(counts, depth, params)) {
    ev.verdict = Verdict::kRebuildSubtree;
    return ev;
  }

  auto data = [&]() -> const std::vector<Slot>& {
    if (!ev.remaining) ev.remaining = gather_slots(node, removed);
    return *ev.remaining;
  };

  std::vector<std::size_t> invalid_attributes;
  std::vector<ValueLabel> scratch;
  for (auto& as : split.attributes) {
    std::vector<ThresholdStats> kept;
    for (const auto& t : as.thresholds)
      if (t.valid()) kept.push_back(t);
    if (kept.size() == as.thresholds.size()) continue;
    ev.resamples += as.thresholds.size() - kept.size();
    const auto pool = attribute_pool(db, data(), as.attribute, scratch);
    if (pool.empty()) {
      invalid_attributes.push_back(as.attribute);
      continue;
    }
    const std::size_t target = std::min(params.k, pool.size());
    auto replacements = resample_replacements(pool, kept, target - kept.size(), rng);
    kept.insert(kept.end(), replacements.begin(), replacements.end());
    sort_thresholds(kept);
    as.thresholds = std::move(kept);
  }

  if (!invalid_attributes.empty()) {
    std::erase_if(split.attributes, [&](const AttributeStats& as) {
      return std::find(invalid_attributes.begin(), invalid_attributes.end(), as.attribute) != invalid_attributes.end();
    });
    std::vector<std::size_t> excluded = invalid_attributes;
    for (const auto& as : split.attributes) excluded.push_back(as.attribute);
    const std::size_t need = params.p_tilde - split.attributes.size();
    const auto& d = data();
    const auto fresh =
        sample_attributes(db.p(), need, excluded, rng, [&](std::size_t a) { return non_constant(db, d, a); });
    auto stats = attribute_stats(db, d, fresh, params.k, rng);
    ev.resamples += invalid_attributes.size();
    for (auto& as : stats) split.attributes.push_back(std::move(as));
    sort_attributes(split.attributes);
  }

  if (split.attributes.empty()) {
    ev.verdict = Verdict::kRebuildSubtree;
    return ev;
  }

  const auto scored = score_candidates(split, counts, params.criterion);
  const SplitCandidate best = select_best(scored);
  if (best.attribute != split.attribute || best.threshold != split.threshold) {
    split.attribute = best.attribute;
    split.threshold = best.threshold;
    ev.verdict = Verdict::kRebuildChildren;
  }
  return ev;
}

inline Evaluation evaluate_random(const Database& db, std::span<const Slot> removed, std::size_t depth,
                                  const TreeParams& params, NodeCounts& counts, RandomSplit& split) {
  Evaluation ev;
  for (Slot s : removed) {
    const std::uint8_t y = db.label(s);
    --counts.n;
    counts.n_pos -= y;
    if (db.value(s, split.attribute) <= split.threshold)
      --split.n_left;
    else
      --split.n_right;
  }
  if (counts.n == 0 || stop_here(counts, depth, params))
    ev.verdict = Verdict::kRebuildSubtree;
  else if (split.n_left == 0 || split.n_right == 0)
    ev.verdict = Verdict::kRebuildRandom;
  return ev;
}

class Eraser {
 public:
  Eraser(const Database& db, const TreeParams& params, Rng& rng, TreeDeletionStats& stats)
      : db_(db), params_(params), rng_(rng), stats_(stats) {}

  void erase(std::unique_ptr<Node>& node, std::size_t depth, std::span<const Slot> removed) {
    if (node->is_leaf()) {
      auto& slots = node->leaf().slots;
      for (Slot s : removed) {
        --node->counts.n;
        node->counts.n_pos -= db_.label(s);
      }
      std::erase_if(slots, [&](Slot s) { return std::binary_search(removed.begin(), removed.end(), s); });
      return;
    }

    Evaluation ev = node->kind() == NodeKind::kGreedy
                        ? evaluate_greedy(db_, *node, removed, depth, params_, rng_, node->counts, node->greedy())
                        : evaluate_random(db_, removed, depth, params_, node->counts, node->random());
    stats_.resamples += ev.resamples;

    auto remaining = [&]() {
      if (ev.remaining) return std::move(*ev.remaining);
      return gather_slots(*node, removed);
    };

    switch (ev.verdict) {
      case Verdict::kDescend: {
        const auto [left, right] = partition(db_, removed, node->split_attribute(), node->split_threshold());
        if (!left.empty()) erase(node->left, depth + 1, left);
        if (!right.empty()) erase(node->right, depth + 1, right);
        return;
      }
      case Verdict::kRebuildSubtree: {
        auto data = remaining();
        stats_.retrains.push_back({depth, static_cast<Count>(data.size())});
        node = train_tree(db_, std::move(data), depth, params_, rng_);
        return;
      }
      case Verdict::kRebuildRandom: {
        auto data = remaining();
        stats_.retrains.push_back({depth, static_cast<Count>(data.size())});
        auto& split = node->random();
        if (!non_constant(db_, data, split.attribute)) {
          node = train_tree(db_, std::move(data), depth, params_, rng_);
          return;
        }
        const auto [lo, hi] = value_range(db_, data, split.attribute);
        split.threshold = rng_.uniform_real(lo, hi);
        ++stats_.resamples;
        rebuild_children(*node, std::move(data), depth);
        return;
      }
      case Verdict::kRebuildChildren: {
        auto data = remaining();
        stats_.retrains.push_back({depth, static_cast<Count>(data.size())});
        rebuild_children(*node, std::move(data), depth);
        return;
      }
    }
  }

 private:
  void rebuild_children(Node& node, std::vector<Slot> data, std::size_t depth) {
    auto [left, right] = partition(db_, data, node.split_attribute(), node.split_threshold());
    if (node.kind() == NodeKind::kRandom) {
      node.random().n_left = static_cast<Count>(left.size());
      node.random().n_right = static_cast<Count>(right.size());
    }
    node.left = train_tree(db_, std::move(left), depth + 1, params_, rng_);
    node.right = train_tree(db_, std::move(right), depth + 1, params_, rng_);
  }

  const Database& db_;
  const TreeParams& params_;
  Rng& rng_;
  TreeDeletionStats& stats_;
};

inline std::vector<Slot> resolve_slots(const Database& db, std::span<const InstanceId> ids) {
  std::vector<Slot> slots;
  slots.reserve(ids.size());
  for (InstanceId id : ids) slots.push_back(db.slot_of(id));
  std::sort(slots.begin(), slots.end());
  slots.erase(std::unique(slots.begin(), slots.end()), slots.end());
  return slots;
}

}  // namespace detail

inline std::vector<InstanceId> unknown_ids(const Forest& f, std::span<const InstanceId> ids) {
  std::vector<InstanceId> out;
  for (InstanceId id : ids)
    if (!f.database().contains(id)) out.push_back(id);
  return out;
}

// Removes every instance in `ids` from every tree, retraining each affected
// node at most once, then drops the rows from the database. Nothing is
// modified if any id is unknown.
inline DeletionReport remove_batch(Forest& f, std::span<const InstanceId> ids) {
  using Clock = std::chrono::steady_clock;
  const auto missing = unknown_ids(f, ids);
  if (!missing.empty()) throw UnknownIdError(missing.front());
  const auto start = Clock::now();
  DeletionReport report;
  const auto slots = detail::resolve_slots(f.database(), ids);
  for (Slot s : slots) report.ids.push_back(f.database().id(s));
  report.trees.resize(f.n_trees());
  if (!slots.empty()) {
    for (std::size_t t = 0; t < f.n_trees(); ++t) {
      const auto tree_start = Clock::now();
      Tree& tree = f.trees()[t];
      detail::Eraser eraser(f.database(), f.params(), tree.rng, report.trees[t]);
      eraser.erase(tree.root, 0, slots);
      report.trees[t].seconds = std::chrono::duration<double>(Clock::now() - tree_start).count();
    }
    for (InstanceId id : report.ids) f.database().remove(id);
  }
  report.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return report;
}

// Exact removal of one training instance.
inline DeletionReport remove_instance(Forest& f, InstanceId id) {
  const InstanceId ids[] = {id};
  return remove_batch(f, ids);
}

// Total instances that remove_instance(f, id) would retrain right now,
// without modifying f. Each tree is evaluated along the instance's path on
// copies of the node statistics with a copy of that tree's random stream.
inline Count dry_run_cost(const Forest& f, InstanceId id) {
  const Database& db = f.database();
  const Slot slot = db.slot_of(id);
  const Slot removed[] = {slot};
  Count cost = 0;
  for (const auto& tree : f.trees()) {
    Rng rng = tree.rng;
    const Node* node = tree.root.get();
    std::size_t depth = 0;
    while (!node->is_leaf()) {
      NodeCounts counts = node->counts;
      detail::Evaluation ev;
      if (node->kind() == NodeKind::kGreedy) {
        GreedySplit split = node->greedy();
        ev = detail::evaluate_greedy(db, *node, removed, depth, f.params(), rng, counts, split);
      } else {
        RandomSplit split = node->random();
        ev = detail::evaluate_random(db, removed, depth, f.params(), counts, split);
      }
      if (ev.verdict != detail::Verdict::kDescend) {
        cost += counts.n;
        break;
      }
      node = db.value(slot, node->split_attribute()) <= node->split_threshold() ? node->left.get()
                                                                                 : node->right.get();
      ++depth;
    }
  }
  return cost;
}

// Baseline: discard the model and train a fresh forest on the database
// without `id`.
inline Forest naive_retrain(const Forest& f, InstanceId id, std::uint64_t seed) {
  if (!f.database().contains(id)) throw UnknownIdError(id);
  Database db = f.database();
  db.remove(id);
  return train_forest_on(std::move(db), f.params(), f.n_trees(), seed);
}

}  // namespace dare

#endif  // DARE_UNLEARN_HPP_
