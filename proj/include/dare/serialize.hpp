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

#ifndef DARE_SERIALIZE_HPP_
#define DARE_SERIALIZE_HPP_

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "dare/common.hpp"
#include "dare/dataset.hpp"
#include "dare/tree.hpp"

namespace dare {

// Model file layout (all integers little-endian):
//   "DAREFRST" | u32 version | payload | u64 FNV-1a(payload)
// The payload holds the parameters, the compacted database snapshot (live
// rows only), and for every tree its random stream state followed by the
// nodes in pre-order with all cached statistics.
inline constexpr char kModelMagic[8] = {'D', 'A', 'R', 'E', 'F', 'R', 'S', 'T'};
inline constexpr std::uint32_t kModelVersion = 1;

static_assert(std::endian::native == std::endian::little, "model files assume a little-endian host");

namespace detail {

inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  template <typename T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out_.append(buf, sizeof(T));
  }
  void u64(std::uint64_t v) { put(v); }
  void i64(std::int64_t v) { put(v); }
  void f64(double v) { put(v); }
  void u8(std::uint8_t v) { put(v); }
  void str(std::string_view s) {
    u64(s.size());
    out_.append(s.data(), s.size());
  }
  std::string& bytes() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::uint64_t u64() { return get<std::uint64_t>(); }
  std::int64_t i64() { return get<std::int64_t>(); }
  double f64() { return get<double>(); }
  std::uint8_t u8() { return get<std::uint8_t>(); }
  std::string str() {
    const std::uint64_t n = u64();
    need(n);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  // Element count that must fit in the remaining bytes at `min_size` each.
  std::uint64_t count(std::size_t min_size) {
    const std::uint64_t n = u64();
    if (min_size > 0 && n > (in_.size() - pos_) / min_size) throw FormatError("model file: implausible element count");
    return n;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (n > in_.size() - pos_) throw FormatError("model file truncated");
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

inline void write_node(Writer& w, const Node& node, const std::vector<Slot>& remap) {
  w.u8(static_cast<std::uint8_t>(node.kind()));
  w.i64(node.counts.n);
  w.i64(node.counts.n_pos);
  switch (node.kind()) {
    case NodeKind::kLeaf:
      w.u64(node.leaf().slots.size());
      for (Slot s : node.leaf().slots) w.put<std::uint32_t>(remap[s]);
      return;
    case NodeKind::kRandom: {
      const auto& r = node.random();
      w.u64(r.attribute);
      w.f64(r.threshold);
      w.i64(r.n_left);
      w.i64(r.n_right);
      break;
    }
    case NodeKind::kGreedy: {
      const auto& g = node.greedy();
      w.u64(g.attribute);
      w.f64(g.threshold);
      w.u64(g.attributes.size());
      for (const auto& as : g.attributes) {
        w.u64(as.attribute);
        w.u64(as.thresholds.size());
        for (const auto& t : as.thresholds) {
          w.f64(t.value);
          w.f64(t.v1);
          w.f64(t.v2);
          w.i64(t.n_left);
          w.i64(t.n_left_pos);
          w.i64(t.n_v1);
          w.i64(t.pos_v1);
          w.i64(t.n_v2);
          w.i64(t.pos_v2);
        }
      }
      break;
    }
  }
  write_node(w, *node.left, remap);
  write_node(w, *node.right, remap);
}

inline std::unique_ptr<Node> read_node(Reader& r, std::size_t n_slots, std::size_t p, std::size_t depth) {
  if (depth > 4096) throw FormatError("model file: tree too deep");
  auto node = std::make_unique<Node>();
  const auto kind = r.u8();
  node->counts.n = r.i64();
  node->counts.n_pos = r.i64();
  auto check_attr = [&](std::uint64_t a) {
    if (a >= p) throw FormatError("model file: attribute index out of range");
    return static_cast<std::size_t>(a);
  };
  switch (kind) {
    case static_cast<std::uint8_t>(NodeKind::kLeaf): {
      LeafData leaf;
      const auto n = r.count(sizeof(std::uint32_t));
      leaf.slots.reserve(n);
      for (std::uint64_t i = 0; i < n; ++i) {
        const auto s = r.get<std::uint32_t>();
        if (s >= n_slots) throw FormatError("model file: leaf references unknown instance");
        leaf.slots.push_back(s);
      }
      node->data = std::move(leaf);
      return node;
    }
    case static_cast<std::uint8_t>(NodeKind::kRandom): {
      RandomSplit s;
      s.attribute = check_attr(r.u64());
      s.threshold = r.f64();
      s.n_left = r.i64();
      s.n_right = r.i64();
      node->data = s;
      break;
    }
    case static_cast<std::uint8_t>(NodeKind::kGreedy): {
      GreedySplit g;
      g.attribute = check_attr(r.u64());
      g.threshold = r.f64();
      const auto n_attr = r.count(16);
      for (std::uint64_t i = 0; i < n_attr; ++i) {
        AttributeStats as;
        as.attribute = check_attr(r.u64());
        const auto n_thr = r.count(72);
        for (std::uint64_t j = 0; j < n_thr; ++j) {
          ThresholdStats t;
          t.value = r.f64();
          t.v1 = r.f64();
          t.v2 = r.f64();
          t.n_left = r.i64();
          t.n_left_pos = r.i64();
          t.n_v1 = r.i64();
          t.pos_v1 = r.i64();
          t.n_v2 = r.i64();
          t.pos_v2 = r.i64();
          as.thresholds.push_back(t);
        }
        g.attributes.push_back(std::move(as));
      }
      node->data = std::move(g);
      break;
    }
    default:
      throw FormatError("model file: unknown node kind");
  }
  node->left = read_node(r, n_slots, p, depth + 1);
  node->right = read_node(r, n_slots, p, depth + 1);
  return node;
}

}  // namespace detail

inline std::string serialize(const Forest& f) {
  detail::Writer w;
  const TreeParams& params = f.params();
  w.u64(params.max_depth);
  w.u64(params.random_depth);
  w.u64(params.k);
  w.u64(params.p_tilde);
  w.u8(static_cast<std::uint8_t>(params.criterion));
  w.u64(params.min_support);
  w.u64(f.seed());

  const Database& db = f.database();
  const Dataset snapshot = db.to_dataset();
  std::vector<Slot> remap(db.capacity(), std::numeric_limits<Slot>::max());
  {
    Slot next = 0;
    for (Slot s : db.live_slots()) remap[s] = next++;
  }
  w.u64(snapshot.n());
  w.u64(snapshot.p());
  w.u64(snapshot.feature_names.size());
  for (const auto& name : snapshot.feature_names) w.str(name);
  w.u8(snapshot.schema ? 1 : 0);
  if (snapshot.schema) {
    const Schema& s = *snapshot.schema;
    w.str(s.label_column);
    w.str(s.label_values[0]);
    w.str(s.label_values[1]);
    w.u64(s.columns.size());
    for (const auto& c : s.columns) {
      w.str(c.name);
      w.u8(c.categorical ? 1 : 0);
      w.u64(c.categories.size());
      for (const auto& cat : c.categories) w.str(cat);
    }
  }
  for (InstanceId id : snapshot.ids) w.i64(id);
  for (auto y : snapshot.labels) w.u8(y);
  for (const auto& col : snapshot.columns)
    for (double v : col) w.f64(v);

  w.u64(f.n_trees());
  for (const auto& tree : f.trees()) {
    w.str(tree.rng.state());
    detail::write_node(w, *tree.root, remap);
  }

  std::string out(kModelMagic, sizeof(kModelMagic));
  detail::Writer header;
  header.put<std::uint32_t>(kModelVersion);
  out += header.bytes();
  out += w.bytes();
  detail::Writer trailer;
  trailer.u64(detail::fnv1a(w.bytes()));
  out += trailer.bytes();
  return out;
}

inline Forest deserialize(std::string_view bytes) {
  constexpr std::size_t kHeader = sizeof(kModelMagic) + sizeof(std::uint32_t);
  if (bytes.size() < kHeader + sizeof(std::uint64_t)) throw FormatError("model file truncated");
  if (std::memcmp(bytes.data(), kModelMagic, sizeof(kModelMagic)) != 0) throw FormatError("not a model file (bad magic)");
  std::uint32_t version;
  std::memcpy(&version, bytes.data() + sizeof(kModelMagic), sizeof(version));
  if (version != kModelVersion)
    throw FormatError("unsupported model file version " + std::to_string(version) + " (expected " +
                      std::to_string(kModelVersion) + ")");
  const std::string_view payload = bytes.substr(kHeader, bytes.size() - kHeader - sizeof(std::uint64_t));
  std::uint64_t checksum;
  std::memcpy(&checksum, bytes.data() + bytes.size() - sizeof(checksum), sizeof(checksum));
  if (checksum != detail::fnv1a(payload)) throw FormatError("model file checksum mismatch");

  detail::Reader r(payload);
  TreeParams params;
  params.max_depth = r.u64();
  params.random_depth = r.u64();
  params.k = r.u64();
  params.p_tilde = r.u64();
  const auto criterion = r.u8();
  if (criterion > 1) throw FormatError("model file: unknown criterion");
  params.criterion = static_cast<Criterion>(criterion);
  params.min_support = r.u64();
  const std::uint64_t seed = r.u64();

  Dataset d;
  const auto n = r.u64();
  const auto p = r.u64();
  if (n > std::numeric_limits<Slot>::max() || (p > 0 && n > payload.size() / (8 * p))) throw FormatError("model file: bad dimensions");
  const auto n_names = r.count(8);
  for (std::uint64_t i = 0; i < n_names; ++i) d.feature_names.push_back(r.str());
  if (r.u8()) {
    Schema s;
    s.label_column = r.str();
    s.label_values[0] = r.str();
    s.label_values[1] = r.str();
    const auto n_cols = r.count(17);
    for (std::uint64_t i = 0; i < n_cols; ++i) {
      ColumnSpec c;
      c.name = r.str();
      c.categorical = r.u8() != 0;
      const auto n_cat = r.count(8);
      for (std::uint64_t j = 0; j < n_cat; ++j) c.categories.push_back(r.str());
      s.columns.push_back(std::move(c));
    }
    d.schema = std::move(s);
  }
  d.ids.resize(n);
  for (auto& id : d.ids) id = r.i64();
  d.labels.resize(n);
  for (auto& y : d.labels) y = r.u8();
  d.columns.assign(p, std::vector<double>(n));
  for (auto& col : d.columns)
    for (auto& v : col) v = r.f64();
  Database db;
  try {
    db = Database(d);
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("model file: ") + e.what());
  }

  const auto n_trees = r.count(9);
  std::vector<Tree> trees(n_trees);
  for (auto& tree : trees) {
    tree.rng.set_state(r.str());
    tree.root = detail::read_node(r, n, p, 0);
  }
  if (!r.done()) throw FormatError("model file: trailing bytes");
  try {
    params.validate(p);
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("model file: ") + e.what());
  }
  return Forest(params, seed, std::move(db), std::move(trees));
}

// Writes to a temporary file next to `path` and renames it into place.
inline void save_model(const Forest& f, const std::string& path) {
  const std::string bytes = serialize(f);
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot replace " + path);
  }
}

inline Forest load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace dare

#endif  // DARE_SERIALIZE_HPP_
