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

#ifndef DARE_TREE_HPP_
#define DARE_TREE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dare/common.hpp"
#include "dare/dataset.hpp"
#include "dare/rng.hpp"
#include "dare/splitcrit.hpp"

namespace dare {

struct TreeParams {
  std::size_t max_depth = 10;
  std::size_t random_depth = 0;  // layers of random nodes from the top (d_rmax)
  std::size_t k = 5;             // thresholds per attribute at greedy nodes
  std::size_t p_tilde = 0;       // attributes per greedy node; 0 = floor(sqrt(p))
  Criterion criterion = Criterion::kGini;
  std::size_t min_support = 2;

  std::size_t resolved_p_tilde(std::size_t p) const {
    if (p_tilde != 0) return p_tilde;
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(p)))));
  }

  void validate(std::size_t p) const {
    if (random_depth > max_depth) throw InvalidArgument("random_depth must not exceed max_depth");
    if (k < 1) throw InvalidArgument("k must be >= 1");
    if (min_support < 1) throw InvalidArgument("min_support must be >= 1");
    const std::size_t pt = resolved_p_tilde(p);
    if (pt < 1 || pt > p) throw InvalidArgument("p_tilde must be in [1, p]");
  }

  friend bool operator==(const TreeParams&, const TreeParams&) = default;
};

struct AttributeStats {
  std::size_t attribute = 0;
  std::vector<ThresholdStats> thresholds;  // sorted by value

  friend bool operator==(const AttributeStats&, const AttributeStats&) = default;
};

struct GreedySplit {
  std::vector<AttributeStats> attributes;  // sorted by attribute index
  std::size_t attribute = 0;               // chosen split
  double threshold = 0.0;

  friend bool operator==(const GreedySplit&, const GreedySplit&) = default;
};

struct RandomSplit {
  std::size_t attribute = 0;
  double threshold = 0.0;
  Count n_left = 0;
  Count n_right = 0;

  friend bool operator==(const RandomSplit&, const RandomSplit&) = default;
};

struct LeafData {
  std::vector<Slot> slots;
};

enum class NodeKind : std::uint8_t { kLeaf = 0, kRandom = 1, kGreedy = 2 };

class Node {
 public:
  NodeCounts counts;
  std::variant<LeafData, RandomSplit, GreedySplit> data;
  std::unique_ptr<Node> left;
  std::unique_ptr<Node> right;

  Node() = default;
  Node(const Node& o)
      : counts(o.counts),
        data(o.data),
        left(o.left ? std::make_unique<Node>(*o.left) : nullptr),
        right(o.right ? std::make_unique<Node>(*o.right) : nullptr) {}
  Node(Node&&) noexcept = default;
  Node& operator=(const Node& o) {
    if (this != &o) {
      Node tmp(o);
      *this = std::move(tmp);
    }
    return *this;
  }
  Node& operator=(Node&&) noexcept = default;

  NodeKind kind() const { return static_cast<NodeKind>(data.index()); }
  bool is_leaf() const { return kind() == NodeKind::kLeaf; }

  LeafData& leaf() { return std::get<LeafData>(data); }
  const LeafData& leaf() const { return std::get<LeafData>(data); }
  RandomSplit& random() { return std::get<RandomSplit>(data); }
  const RandomSplit& random() const { return std::get<RandomSplit>(data); }
  GreedySplit& greedy() { return std::get<GreedySplit>(data); }
  const GreedySplit& greedy() const { return std::get<GreedySplit>(data); }

  std::size_t split_attribute() const {
    return kind() == NodeKind::kRandom ? random().attribute : greedy().attribute;
  }
  double split_threshold() const { return kind() == NodeKind::kRandom ? random().threshold : greedy().threshold; }

  // Positive fraction; 0 for the degenerate empty leaf.
  double value() const {
    return counts.n == 0 ? 0.0 : static_cast<double>(counts.n_pos) / static_cast<double>(counts.n);
  }
};

struct Tree {
  std::unique_ptr<Node> root;
  Rng rng;

  Tree() = default;
  Tree(const Tree& o) : root(o.root ? std::make_unique<Node>(*o.root) : nullptr), rng(o.rng) {}
  Tree(Tree&&) noexcept = default;
  Tree& operator=(const Tree& o) {
    if (this != &o) {
      Tree tmp(o);
      *this = std::move(tmp);
    }
    return *this;
  }
  Tree& operator=(Tree&&) noexcept = default;

  bool empty() const { return !root || root->counts.n == 0; }
};

class Forest {
 public:
  Forest() = default;
  Forest(TreeParams params, std::uint64_t seed, Database db, std::vector<Tree> trees)
      : params_(params), seed_(seed), db_(std::move(db)), trees_(std::move(trees)) {}

  const TreeParams& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t n_trees() const { return trees_.size(); }
  const Database& database() const { return db_; }
  Database& database() { return db_; }
  const std::vector<Tree>& trees() const { return trees_; }
  std::vector<Tree>& trees() { return trees_; }

 private:
  TreeParams params_;
  std::uint64_t seed_ = 0;
  Database db_;
  std::vector<Tree> trees_;
};

namespace detail {

inline NodeCounts count_slots(const Database& db, std::span<const Slot> slots) {
  NodeCounts c;
  c.n = static_cast<Count>(slots.size());
  for (Slot s : slots) c.n_pos += db.label(s);
  return c;
}

inline bool non_constant(const Database& db, std::span<const Slot> slots, std::size_t attribute) {
  if (slots.empty()) return false;
  const auto& col = db.column(attribute);
  const double first = col[slots.front()];
  for (Slot s : slots)
    if (col[s] != first) return true;
  return false;
}

inline std::pair<double, double> value_range(const Database& db, std::span<const Slot> slots, std::size_t attribute) {
  const auto& col = db.column(attribute);
  double lo = col[slots.front()], hi = lo;
  for (Slot s : slots) {
    lo = std::min(lo, col[s]);
    hi = std::max(hi, col[s]);
  }
  return {lo, hi};
}

// Draws attributes in uniformly random order (never repeating, skipping
// `excluded`) and returns the first `want` accepted by `accept`. The result
// is a uniform subset of the accepted attributes.
template <typename Accept>
std::vector<std::size_t> sample_attributes(std::size_t p, std::size_t want, const std::vector<std::size_t>& excluded,
                                           Rng& rng, Accept accept) {
  std::vector<std::size_t> remaining;
  remaining.reserve(p);
  for (std::size_t a = 0; a < p; ++a)
    if (std::find(excluded.begin(), excluded.end(), a) == excluded.end()) remaining.push_back(a);
  std::vector<std::size_t> out;
  std::size_t left = remaining.size();
  while (out.size() < want && left > 0) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform_index(left));
    const std::size_t a = remaining[j];
    remaining[j] = remaining[left - 1];
    --left;
    if (accept(a)) out.push_back(a);
  }
  return out;
}

inline std::vector<ThresholdStats> attribute_pool(const Database& db, std::span<const Slot> slots,
                                                  std::size_t attribute, std::vector<ValueLabel>& scratch) {
  scratch.resize(slots.size());
  const auto& col = db.column(attribute);
  for (std::size_t i = 0; i < slots.size(); ++i) scratch[i] = {col[slots[i]], db.label(slots[i])};
  sort_by_value(scratch);
  return enumerate_sorted(scratch);
}

inline std::vector<SplitCandidate> score_candidates(const GreedySplit& split, const NodeCounts& counts,
                                                    Criterion criterion) {
  std::vector<SplitCandidate> scored;
  for (const auto& as : split.attributes)
    for (const auto& t : as.thresholds) scored.push_back({as.attribute, t.value, split_score(criterion, counts, t)});
  return scored;
}

// Builds greedy-node statistics for `attributes`; attributes whose valid
// threshold pool is empty are dropped.
inline std::vector<AttributeStats> attribute_stats(const Database& db, std::span<const Slot> slots,
                                                   const std::vector<std::size_t>& attributes, std::size_t k,
                                                   Rng& rng) {
  std::vector<AttributeStats> out;
  std::vector<ValueLabel> scratch;
  for (std::size_t a : attributes) {
    auto pool = attribute_pool(db, slots, a, scratch);
    if (pool.empty()) continue;
    out.push_back({a, sample_thresholds(pool, k, rng)});
  }
  return out;
}

inline void sort_attributes(std::vector<AttributeStats>& attrs) {
  std::sort(attrs.begin(), attrs.end(),
            [](const AttributeStats& a, const AttributeStats& b) { return a.attribute < b.attribute; });
}

inline void choose_split(GreedySplit& split, const NodeCounts& counts, Criterion criterion) {
  const auto scored = score_candidates(split, counts, criterion);
  const SplitCandidate best = select_best(scored);
  split.attribute = best.attribute;
  split.threshold = best.threshold;
}

inline std::pair<std::vector<Slot>, std::vector<Slot>> partition(const Database& db, std::span<const Slot> slots,
                                                                 std::size_t attribute, double threshold) {
  std::pair<std::vector<Slot>, std::vector<Slot>> out;
  const auto& col = db.column(attribute);
  for (Slot s : slots) (col[s] <= threshold ? out.first : out.second).push_back(s);
  return out;
}

inline bool stop_here(const NodeCounts& counts, std::size_t depth, const TreeParams& params) {
  return counts.pure() || depth >= params.max_depth || counts.n < static_cast<Count>(params.min_support);
}

inline std::unique_ptr<Node> make_leaf(std::vector<Slot> slots, NodeCounts counts) {
  auto node = std::make_unique<Node>();
  node->counts = counts;
  node->data = LeafData{std::move(slots)};
  return node;
}

}  // namespace detail

// Builds a tree (or subtree rooted at `depth`) over the given instances.
// params.p_tilde must already be resolved.
inline std::unique_ptr<Node> train_tree(const Database& db, std::vector<Slot> slots, std::size_t depth,
                                        const TreeParams& params, Rng& rng) {
  const NodeCounts counts = detail::count_slots(db, slots);
  if (counts.n == 0 || detail::stop_here(counts, depth, params)) return detail::make_leaf(std::move(slots), counts);

  auto node = std::make_unique<Node>();
  node->counts = counts;
  std::size_t attribute = 0;
  double threshold = 0.0;
  if (depth < params.random_depth) {
    const auto picked = detail::sample_attributes(db.p(), 1, {}, rng,
                                                  [&](std::size_t a) { return detail::non_constant(db, slots, a); });
    if (picked.empty()) return detail::make_leaf(std::move(slots), counts);
    attribute = picked.front();
    const auto [lo, hi] = detail::value_range(db, slots, attribute);
    threshold = rng.uniform_real(lo, hi);
    node->data = RandomSplit{attribute, threshold, 0, 0};
  } else {
    // At a non-pure node an attribute has a valid threshold iff it is not
    // constant, so the filter below is the validity filter.
    const auto picked = detail::sample_attributes(db.p(), params.p_tilde, {}, rng, [&](std::size_t a) {
      return detail::non_constant(db, slots, a);
    });
    GreedySplit split;
    split.attributes = detail::attribute_stats(db, slots, picked, params.k, rng);
    if (split.attributes.empty()) return detail::make_leaf(std::move(slots), counts);
    detail::sort_attributes(split.attributes);
    detail::choose_split(split, counts, params.criterion);
    attribute = split.attribute;
    threshold = split.threshold;
    node->data = std::move(split);
  }

  auto [left, right] = detail::partition(db, slots, attribute, threshold);
  slots = {};
  if (node->kind() == NodeKind::kRandom) {
    node->random().n_left = static_cast<Count>(left.size());
    node->random().n_right = static_cast<Count>(right.size());
  }
  node->left = train_tree(db, std::move(left), depth + 1, params, rng);
  node->right = train_tree(db, std::move(right), depth + 1, params, rng);
  return node;
}

inline Forest train_forest_on(Database db, TreeParams params, std::size_t n_trees, std::uint64_t seed) {
  if (db.empty()) throw InvalidArgument("train_forest: empty dataset");
  if (n_trees < 1) throw InvalidArgument("train_forest: need at least one tree");
  params.validate(db.p());
  params.p_tilde = params.resolved_p_tilde(db.p());
  std::vector<Tree> trees(n_trees);
  const auto slots = db.live_slots();
  for (std::size_t t = 0; t < n_trees; ++t) {
    trees[t].rng = Rng::derive(seed, t);
    trees[t].root = train_tree(db, slots, 0, params, trees[t].rng);
  }
  return Forest(params, seed, std::move(db), std::move(trees));
}

// Trains n_trees independent trees on the full dataset (no bootstrapping),
// tree t using the stream derived from (seed, t).
inline Forest train_forest(const Dataset& d, const TreeParams& params, std::size_t n_trees, std::uint64_t seed) {
  if (d.n() == 0) throw InvalidArgument("train_forest: empty dataset");
  return train_forest_on(Database(d), params, n_trees, seed);
}

inline const Node& route(const Node& root, std::span<const double> x) {
  const Node* node = &root;
  while (!node->is_leaf()) node = x[node->split_attribute()] <= node->split_threshold() ? node->left.get() : node->right.get();
  return *node;
}

// Mean of the reached leaf values over all trees.
inline double predict(const Forest& f, std::span<const double> x) {
  if (x.size() != f.database().p())
    throw InvalidArgument("predict: expected " + std::to_string(f.database().p()) + " features, got " +
                          std::to_string(x.size()));
  if (f.database().empty()) throw InvalidArgument("predict: forest has no training data left");
  double sum = 0.0;
  for (const auto& tree : f.trees()) sum += route(*tree.root, x).value();
  return sum / static_cast<double>(f.n_trees());
}

inline std::vector<double> predict(const Forest& f, const Dataset& d) {
  if (d.p() != f.database().p())
    throw InvalidArgument("predict: expected " + std::to_string(f.database().p()) + " features, got " +
                          std::to_string(d.p()));
  std::vector<double> out(d.n());
  std::vector<double> x(d.p());
  for (std::size_t r = 0; r < d.n(); ++r) {
    for (std::size_t a = 0; a < d.p(); ++a) x[a] = d.columns[a][r];
    out[r] = predict(f, x);
  }
  return out;
}

// Every leaf slot list under `node`, concatenated, skipping `excluded`
// (sorted).
inline std::vector<Slot> gather_slots(const Node& node, std::span<const Slot> excluded = {}) {
  std::vector<Slot> out;
  out.reserve(static_cast<std::size_t>(node.counts.n));
  std::vector<const Node*> stack{&node};
  while (!stack.empty()) {
    const Node* cur = stack.back();
    stack.pop_back();
    if (cur->is_leaf()) {
      for (Slot s : cur->leaf().slots)
        if (excluded.empty() || !std::binary_search(excluded.begin(), excluded.end(), s)) out.push_back(s);
    } else {
      stack.push_back(cur->right.get());
      stack.push_back(cur->left.get());
    }
  }
  return out;
}

struct AuditMismatch {
  std::size_t tree = 0;
  std::string path;  // "root", "root/L", "root/L/R", ...
  std::string what;
};

struct AuditReport {
  std::vector<AuditMismatch> mismatches;
  std::size_t nodes_checked = 0;
  bool clean() const { return mismatches.empty(); }
};

namespace detail {

class Auditor {
 public:
  Auditor(const Forest& f, AuditReport& report) : f_(f), db_(f.database()), report_(report) {}

  void tree(std::size_t t) {
    tree_ = t;
    const Node& root = *f_.trees()[t].root;
    std::vector<Slot> all = visit(root, 0, "root");
    std::vector<std::uint8_t> seen(db_.capacity(), 0);
    for (Slot s : all) {
      if (s >= db_.capacity() || !db_.alive(s)) {
        add("root", "leaf lists reference deleted or unknown slot " + std::to_string(s));
        continue;
      }
      if (seen[s]++) add("root", "instance " + std::to_string(db_.id(s)) + " appears in more than one leaf");
    }
    for (Slot s : db_.live_slots())
      if (!seen[s]) add("root", "instance " + std::to_string(db_.id(s)) + " missing from every leaf");
  }

 private:
  void add(const std::string& path, std::string what) { report_.mismatches.push_back({tree_, path, std::move(what)}); }

  NodeCounts recount(const std::vector<Slot>& slots) const {
    NodeCounts c;
    c.n = static_cast<Count>(slots.size());
    for (Slot s : slots)
      if (s < db_.capacity()) c.n_pos += db_.label(s);
    return c;
  }

  static std::string counts_text(const NodeCounts& c) {
    return "(n=" + std::to_string(c.n) + ", n_pos=" + std::to_string(c.n_pos) + ")";
  }

  std::vector<Slot> visit(const Node& node, std::size_t depth, const std::string& path) {
    ++report_.nodes_checked;
    const TreeParams& params = f_.params();
    if (depth > params.max_depth) add(path, "node deeper than max_depth");
    if (node.is_leaf()) {
      const auto& slots = node.leaf().slots;
      const NodeCounts actual = recount(slots);
      if (!(actual == node.counts))
        add(path, "leaf counts " + counts_text(node.counts) + " != recomputed " + counts_text(actual));
      return slots;
    }

    std::vector<Slot> left = visit(*node.left, depth + 1, path + "/L");
    std::vector<Slot> right = visit(*node.right, depth + 1, path + "/R");
    const std::size_t a = node.split_attribute();
    const double v = node.split_threshold();
    bool routed = a < db_.p();
    if (routed) {
      for (Slot s : left)
        if (s < db_.capacity() && !(db_.value(s, a) <= v)) routed = false;
      for (Slot s : right)
        if (s < db_.capacity() && db_.value(s, a) <= v) routed = false;
    }
    if (!routed) add(path, "instances routed to the wrong branch");

    std::vector<Slot> all = left;
    all.insert(all.end(), right.begin(), right.end());
    std::sort(all.begin(), all.end());
    const NodeCounts actual = recount(all);
    if (!(actual == node.counts))
      add(path, "node counts " + counts_text(node.counts) + " != recomputed " + counts_text(actual));
    if (stop_here(actual, depth, params)) add(path, "decision node where stopping criteria hold");

    if (node.kind() == NodeKind::kRandom) {
      if (depth >= params.random_depth) add(path, "random node below random_depth");
      const auto& r = node.random();
      if (r.n_left != static_cast<Count>(left.size()) || r.n_right != static_cast<Count>(right.size()))
        add(path, "random branch counts (" + std::to_string(r.n_left) + ", " + std::to_string(r.n_right) +
                      ") != recomputed (" + std::to_string(left.size()) + ", " + std::to_string(right.size()) + ")");
      if (left.empty() || right.empty()) add(path, "random node with an empty branch");
      if (!all.empty()) {
        const auto [lo, hi] = value_range(db_, all, a);
        if (!(v >= lo && v < hi)) add(path, "random threshold outside [a_min, a_max)");
      }
    } else {
      if (depth < params.random_depth) add(path, "greedy node above random_depth");
      greedy(node, all, path);
    }
    return all;
  }

  void greedy(const Node& node, const std::vector<Slot>& all, const std::string& path) {
    const TreeParams& params = f_.params();
    const GreedySplit& split = node.greedy();
    std::vector<ValueLabel> scratch;
    std::size_t valid_attributes = 0;
    for (std::size_t a = 0; a < db_.p(); ++a) valid_attributes += non_constant(db_, all, a) ? 1 : 0;
    if (split.attributes.size() != std::min(params.p_tilde, valid_attributes))
      add(path, "stores " + std::to_string(split.attributes.size()) + " attributes, expected " +
                    std::to_string(std::min(params.p_tilde, valid_attributes)));
    for (std::size_t i = 0; i < split.attributes.size(); ++i) {
      const auto& as = split.attributes[i];
      if (i > 0 && split.attributes[i - 1].attribute >= as.attribute) add(path, "attributes not sorted/unique");
      if (as.attribute >= db_.p()) {
        add(path, "attribute index out of range");
        continue;
      }
      const auto pool = attribute_pool(db_, all, as.attribute, scratch);
      if (as.thresholds.size() != std::min(params.k, pool.size()))
        add(path, "attribute " + std::to_string(as.attribute) + " stores " + std::to_string(as.thresholds.size()) +
                      " thresholds, expected " + std::to_string(std::min(params.k, pool.size())));
      for (const auto& t : as.thresholds) {
        auto it = std::find_if(pool.begin(), pool.end(), [&](const ThresholdStats& c) { return c.value == t.value; });
        if (it == pool.end())
          add(path, "attribute " + std::to_string(as.attribute) + " threshold " + std::to_string(t.value) +
                        " is not a valid threshold of the node data");
        else if (!(*it == t))
          add(path, "attribute " + std::to_string(as.attribute) + " threshold " + std::to_string(t.value) +
                        " statistics differ from recomputation");
      }
    }
    const auto scored = score_candidates(split, node.counts, params.criterion);
    if (scored.empty()) {
      add(path, "greedy node without candidates");
      return;
    }
    const auto best = select_best(scored);
    if (best.attribute != split.attribute || best.threshold != split.threshold)
      add(path, "chosen split is not the best stored candidate");
  }

  const Forest& f_;
  const Database& db_;
  AuditReport& report_;
  std::size_t tree_ = 0;
};

}  // namespace detail

// Recomputes every cached statistic from the leaf instance lists and the
// database and reports each disagreement.
inline AuditReport audit(const Forest& f) {
  AuditReport report;
  detail::Auditor auditor(f, report);
  for (std::size_t t = 0; t < f.n_trees(); ++t) auditor.tree(t);
  return report;
}

struct MemoryReport {
  std::size_t structure_bytes = 0;
  std::size_t decision_stats_bytes = 0;
  std::size_t leaf_stats_bytes = 0;
  std::size_t total_bytes = 0;
  std::size_t database_bytes = 0;  // not part of total
  std::size_t nodes = 0;
  std::size_t leaves = 0;
};

// Structure: split attribute/threshold and child links of decision nodes,
// the value of leaves. Decision stats: node counts, random branch counts,
// candidate attributes and threshold statistics. Leaf stats: instance lists
// and leaf counts.
inline MemoryReport memory_report(const Forest& f) {
  MemoryReport m;
  for (const auto& tree : f.trees()) {
    std::vector<const Node*> stack{tree.root.get()};
    while (!stack.empty()) {
      const Node* node = stack.back();
      stack.pop_back();
      ++m.nodes;
      if (node->is_leaf()) {
        ++m.leaves;
        m.structure_bytes += sizeof(double);
        m.leaf_stats_bytes += sizeof(NodeCounts) + node->leaf().slots.size() * sizeof(Slot);
        continue;
      }
      m.structure_bytes += sizeof(std::size_t) + sizeof(double) + 2 * sizeof(Node*);
      m.decision_stats_bytes += sizeof(NodeCounts);
      if (node->kind() == NodeKind::kRandom) {
        m.decision_stats_bytes += 2 * sizeof(Count);
      } else {
        for (const auto& as : node->greedy().attributes)
          m.decision_stats_bytes += sizeof(std::size_t) + as.thresholds.size() * sizeof(ThresholdStats);
      }
      stack.push_back(node->left.get());
      stack.push_back(node->right.get());
    }
  }
  m.total_bytes = m.structure_bytes + m.decision_stats_bytes + m.leaf_stats_bytes;
  m.database_bytes = f.database().memory_bytes();
  return m;
}

namespace detail {

inline bool nodes_equal(const Node& a, const Database& da, const Node& b, const Database& dbb, const std::string& path,
                        std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = path + ": " + msg;
    return false;
  };
  if (a.kind() != b.kind()) return fail("node kind differs");
  if (!(a.counts == b.counts)) return fail("counts differ");
  switch (a.kind()) {
    case NodeKind::kLeaf: {
      std::vector<InstanceId> ia, ib;
      for (Slot s : a.leaf().slots) ia.push_back(da.id(s));
      for (Slot s : b.leaf().slots) ib.push_back(dbb.id(s));
      std::sort(ia.begin(), ia.end());
      std::sort(ib.begin(), ib.end());
      if (ia != ib) return fail("leaf instance sets differ");
      return true;
    }
    case NodeKind::kRandom:
      if (!(a.random() == b.random())) return fail("random split differs");
      break;
    case NodeKind::kGreedy:
      if (a.greedy().attribute != b.greedy().attribute || a.greedy().threshold != b.greedy().threshold)
        return fail("chosen split differs");
      if (!(a.greedy() == b.greedy())) return fail("candidate statistics differ");
      break;
  }
  return nodes_equal(*a.left, da, *b.left, dbb, path + "/L", why) &&
         nodes_equal(*a.right, da, *b.right, dbb, path + "/R", why);
}

}  // namespace detail

// Same node kinds, splits, cached statistics and leaf instance sets (by
// instance id) in every tree. Random stream states are not compared.
inline bool structurally_equal(const Forest& a, const Forest& b, std::string* why = nullptr) {
  if (a.n_trees() != b.n_trees()) {
    if (why) *why = "tree count differs";
    return false;
  }
  for (std::size_t t = 0; t < a.n_trees(); ++t)
    if (!detail::nodes_equal(*a.trees()[t].root, a.database(), *b.trees()[t].root, b.database(),
                             "tree " + std::to_string(t) + " root", why))
      return false;
  return true;
}

}  // namespace dare

#endif  // DARE_TREE_HPP_
