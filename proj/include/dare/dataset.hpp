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

#ifndef DARE_DATASET_HPP_
#define DARE_DATASET_HPP_

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dare/common.hpp"
#include "dare/rng.hpp"

namespace dare {

// How raw CSV columns map onto encoded numeric attributes. Kept with a model
// so prediction inputs can be encoded the same way as training data.
struct ColumnSpec {
  std::string name;
  bool categorical = false;
  std::vector<std::string> categories;  // sorted; one output column each
};

struct Schema {
  std::vector<ColumnSpec> columns;  // raw feature columns, in file order
  std::string label_column;
  std::array<std::string, 2> label_values;  // {negative, positive}

  std::size_t encoded_width() const {
    std::size_t width = 0;
    for (const auto& c : columns) width += c.categorical ? c.categories.size() : 1;
    return width;
  }
};

// Columnar binary-classification dataset. Labels are stored as {0, 1}.
struct Dataset {
  std::vector<std::vector<double>> columns;  // p columns of n values
  std::vector<std::uint8_t> labels;
  std::vector<InstanceId> ids;
  std::vector<std::string> feature_names;
  std::optional<Schema> schema;

  std::size_t n() const { return labels.size(); }
  std::size_t p() const { return columns.size(); }
  double value(std::size_t row, std::size_t attribute) const { return columns[attribute][row]; }

  std::vector<double> row(std::size_t r) const {
    std::vector<double> x(p());
    for (std::size_t a = 0; a < p(); ++a) x[a] = columns[a][r];
    return x;
  }

  Count positives() const {
    Count pos = 0;
    for (auto y : labels) pos += y;
    return pos;
  }

  // Throws InvalidArgument on any broken invariant.
  void validate() const {
    const std::size_t rows = labels.size();
    if (ids.size() != rows) throw InvalidArgument("dataset: ids/labels size mismatch");
    if (!feature_names.empty() && feature_names.size() != columns.size())
      throw InvalidArgument("dataset: feature name count mismatch");
    for (std::size_t a = 0; a < columns.size(); ++a) {
      if (columns[a].size() != rows) throw InvalidArgument("dataset: ragged column " + std::to_string(a));
      for (double v : columns[a])
        if (!std::isfinite(v)) throw InvalidArgument("dataset: non-finite value in column " + std::to_string(a));
    }
    for (auto y : labels)
      if (y > 1) throw InvalidArgument("dataset: label outside {0,1}");
    std::set<InstanceId> seen(ids.begin(), ids.end());
    if (seen.size() != ids.size()) throw InvalidArgument("dataset: duplicate instance ids");
  }

  // Rows at `rows`, in the given order. Ids are preserved.
  Dataset subset(const std::vector<std::size_t>& rows) const {
    Dataset out;
    out.columns.assign(p(), {});
    for (std::size_t a = 0; a < p(); ++a) {
      out.columns[a].reserve(rows.size());
      for (auto r : rows) out.columns[a].push_back(columns[a][r]);
    }
    out.labels.reserve(rows.size());
    out.ids.reserve(rows.size());
    for (auto r : rows) {
      out.labels.push_back(labels[r]);
      out.ids.push_back(ids[r]);
    }
    out.feature_names = feature_names;
    out.schema = schema;
    return out;
  }
};

namespace csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  if (quoted) throw ParseError("unterminated quoted field");
  cells.push_back(std::move(cell));
  return cells;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return std::string(s.substr(b, e - b));
}

inline Table read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  Table table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (line.empty()) continue;
    auto cells = split_line(line);
    for (auto& c : cells) c = trim(c);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size())
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(table.header.size()) + " cells, got " + std::to_string(cells.size()));
    table.rows.push_back(std::move(cells));
  }
  if (table.header.empty()) throw ParseError(path + ": missing header row");
  return table;
}

inline std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

}  // namespace csv

namespace detail {

inline std::size_t column_index(const csv::Table& table, const std::string& name) {
  auto it = std::find(table.header.begin(), table.header.end(), name);
  if (it == table.header.end()) throw ParseError("column not found: " + name);
  return static_cast<std::size_t>(it - table.header.begin());
}

// Numeric label values order numerically, anything else lexicographically;
// the larger of the two is the positive class.
inline std::array<std::string, 2> order_label_values(const std::set<std::string>& values) {
  std::array<std::string, 2> out{*values.begin(), *std::next(values.begin())};
  auto a = csv::parse_number(out[0]);
  auto b = csv::parse_number(out[1]);
  if (a && b && *a > *b) std::swap(out[0], out[1]);
  return out;
}

}  // namespace detail

// Encodes table rows with an existing schema. Unseen categories encode as an
// all-zero block. When the label column is absent, labels are left as 0.
inline Dataset encode_table(const csv::Table& table, const Schema& schema, bool require_label) {
  std::vector<std::size_t> source;
  for (const auto& col : schema.columns) source.push_back(detail::column_index(table, col.name));
  std::optional<std::size_t> label_index;
  if (std::find(table.header.begin(), table.header.end(), schema.label_column) != table.header.end())
    label_index = detail::column_index(table, schema.label_column);
  else if (require_label)
    throw ParseError("label column not found: " + schema.label_column);

  Dataset d;
  d.schema = schema;
  const std::size_t n = table.rows.size();
  for (const auto& col : schema.columns) {
    if (col.categorical) {
      for (const auto& cat : col.categories) d.feature_names.push_back(col.name + "=" + cat);
    } else {
      d.feature_names.push_back(col.name);
    }
  }
  d.columns.assign(schema.encoded_width(), std::vector<double>(n, 0.0));
  d.labels.assign(n, 0);
  d.ids.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& cells = table.rows[r];
    std::size_t out = 0;
    for (std::size_t c = 0; c < schema.columns.size(); ++c) {
      const auto& col = schema.columns[c];
      const std::string& cell = cells[source[c]];
      if (col.categorical) {
        auto it = std::lower_bound(col.categories.begin(), col.categories.end(), cell);
        if (it != col.categories.end() && *it == cell) d.columns[out + (it - col.categories.begin())][r] = 1.0;
        out += col.categories.size();
      } else {
        auto v = csv::parse_number(cell);
        if (!v)
          throw ParseError("row " + std::to_string(r + 1) + ": non-numeric value '" + cell + "' in numeric column " +
                           col.name);
        d.columns[out++][r] = *v;
      }
    }
    if (label_index) {
      const std::string& y = cells[*label_index];
      if (y == schema.label_values[1]) {
        d.labels[r] = 1;
      } else if (y != schema.label_values[0]) {
        throw LabelCardinalityError("row " + std::to_string(r + 1) + ": label '" + y + "' is not one of the two classes");
      }
    }
    d.ids[r] = static_cast<InstanceId>(r);
  }
  return d;
}

// Loads a CSV with a header row. Categorical columns are one-hot expanded
// (one column per distinct value, sorted), everything else must be numeric.
inline Dataset load_csv(const std::string& path, const std::string& label_column,
                        const std::vector<std::string>& categorical_columns = {}) {
  const csv::Table table = csv::read(path);
  const std::size_t label_index = detail::column_index(table, label_column);
  for (const auto& name : categorical_columns) detail::column_index(table, name);

  std::set<std::string> label_values;
  for (const auto& row : table.rows) label_values.insert(row[label_index]);
  if (label_values.size() != 2)
    throw LabelCardinalityError("label column '" + label_column + "' has " + std::to_string(label_values.size()) +
                                " distinct values, expected 2");

  Schema schema;
  schema.label_column = label_column;
  schema.label_values = detail::order_label_values(label_values);
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == label_index) continue;
    ColumnSpec spec;
    spec.name = table.header[c];
    spec.categorical =
        std::find(categorical_columns.begin(), categorical_columns.end(), spec.name) != categorical_columns.end();
    if (spec.categorical) {
      std::set<std::string> cats;
      for (const auto& row : table.rows) cats.insert(row[c]);
      spec.categories.assign(cats.begin(), cats.end());
    }
    schema.columns.push_back(std::move(spec));
  }
  Dataset d = encode_table(table, schema, true);
  if (d.n() == 0) throw ParseError(path + ": no data rows");
  return d;
}

inline void write_csv(const Dataset& d, const std::string& path, const std::string& label_column = "label") {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out.precision(17);
  for (std::size_t a = 0; a < d.p(); ++a)
    out << (d.feature_names.size() == d.p() ? d.feature_names[a] : "x" + std::to_string(a)) << ',';
  out << label_column << '\n';
  for (std::size_t r = 0; r < d.n(); ++r) {
    for (std::size_t a = 0; a < d.p(); ++a) out << d.columns[a][r] << ',';
    out << static_cast<int>(d.labels[r]) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

// Disjoint random partition with sizes floor(n * f) and the rest. Each part
// keeps the input's relative row order.
inline std::pair<Dataset, Dataset> train_test_split(const Dataset& d, double train_fraction, std::uint64_t seed) {
  if (d.n() == 0) throw InvalidArgument("train_test_split: empty dataset");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InvalidArgument("train_test_split: train_fraction must be in (0, 1)");
  const std::size_t n = d.n();
  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.partial_shuffle(order, n_train);
  std::vector<std::size_t> train(order.begin(), order.begin() + n_train);
  std::vector<std::size_t> test(order.begin() + n_train, order.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {d.subset(train), d.subset(test)};
}

struct SyntheticData {
  Dataset data;
  std::vector<std::uint8_t> clean_labels;  // labels before the flip step
};

inline constexpr std::size_t kSyntheticInformative = 5;
inline constexpr std::size_t kSyntheticRedundant = 5;
inline constexpr std::size_t kSyntheticNoise = 30;
inline constexpr double kSyntheticFlipRate = 0.05;

// Gaussian clusters around vertices of a 5-d hypercube (two clusters per
// class), 5 redundant linear combinations of the informative attributes and
// 30 noise attributes; exactly floor(0.05 n) labels are flipped.
inline SyntheticData make_synthetic_with_truth(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("make_synthetic: n must be positive");
  constexpr std::size_t kInf = kSyntheticInformative;
  constexpr std::size_t kClusters = 4;
  constexpr double kClassSep = 1.0;
  const std::size_t p = kInf + kSyntheticRedundant + kSyntheticNoise;

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gauss = [&] { return normal(rng.engine()); };
  auto unit = [&] { return rng.uniform_real(-1.0, 1.0); };

  std::vector<std::uint32_t> vertices(1u << kInf);
  for (std::uint32_t v = 0; v < vertices.size(); ++v) vertices[v] = v;
  rng.partial_shuffle(vertices, kClusters);

  std::array<std::array<double, kInf>, kClusters> centroid{};
  std::array<std::array<std::array<double, kInf>, kInf>, kClusters> transform{};
  for (std::size_t k = 0; k < kClusters; ++k) {
    for (std::size_t j = 0; j < kInf; ++j) centroid[k][j] = ((vertices[k] >> j) & 1u) ? kClassSep : -kClassSep;
    for (auto& r : transform[k])
      for (auto& c : r) c = unit();
  }
  std::array<std::array<double, kSyntheticRedundant>, kInf> mixing{};
  for (auto& r : mixing)
    for (auto& c : r) c = unit();

  // Row r of the generated sequence lands at position placement[r].
  std::vector<std::size_t> placement(n);
  for (std::size_t i = 0; i < n; ++i) placement[i] = i;
  rng.shuffle(placement);

  SyntheticData out;
  Dataset& d = out.data;
  d.columns.assign(p, std::vector<double>(n));
  d.labels.resize(n);
  d.ids.resize(n);
  std::size_t r = 0;
  for (std::size_t k = 0; k < kClusters; ++k) {
    const std::size_t size = n / kClusters + (k < n % kClusters ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i, ++r) {
      const std::size_t at = placement[r];
      std::array<double, kInf> z{};
      for (auto& v : z) v = gauss();
      std::array<double, kInf> x{};
      for (std::size_t j = 0; j < kInf; ++j) {
        double s = centroid[k][j];
        for (std::size_t m = 0; m < kInf; ++m) s += z[m] * transform[k][m][j];
        x[j] = s;
        d.columns[j][at] = s;
      }
      for (std::size_t j = 0; j < kSyntheticRedundant; ++j) {
        double s = 0.0;
        for (std::size_t m = 0; m < kInf; ++m) s += x[m] * mixing[m][j];
        d.columns[kInf + j][at] = s;
      }
      for (std::size_t j = kInf + kSyntheticRedundant; j < p; ++j) d.columns[j][at] = gauss();
      d.labels[at] = static_cast<std::uint8_t>(k % 2);
    }
  }
  for (std::size_t i = 0; i < n; ++i) d.ids[i] = static_cast<InstanceId>(i);
  out.clean_labels = d.labels;

  std::vector<std::size_t> flip(n);
  for (std::size_t i = 0; i < n; ++i) flip[i] = i;
  const auto n_flip = static_cast<std::size_t>(std::floor(kSyntheticFlipRate * static_cast<double>(n)));
  rng.partial_shuffle(flip, n_flip);
  for (std::size_t i = 0; i < n_flip; ++i) d.labels[flip[i]] ^= 1u;

  for (std::size_t a = 0; a < p; ++a) d.feature_names.push_back("x" + std::to_string(a));
  return out;
}

inline Dataset make_synthetic(std::size_t n, std::uint64_t seed) { return make_synthetic_with_truth(n, seed).data; }

// Mutable instance store shared by the trees of a forest. Rows live at fixed
// slots; remove() tombstones a row and scrubs its values.
class Database {
 public:
  Database() = default;

  explicit Database(const Dataset& d) : columns_(d.columns), labels_(d.labels), ids_(d.ids) {
    d.validate();
    if (d.n() > UINT32_MAX) throw InvalidArgument("dataset too large");
    alive_.assign(d.n(), 1);
    live_ = d.n();
    index_.reserve(d.n());
    for (std::size_t s = 0; s < d.n(); ++s) index_.emplace(d.ids[s], static_cast<Slot>(s));
    feature_names_ = d.feature_names;
    schema_ = d.schema;
  }

  std::size_t p() const { return columns_.size(); }
  std::size_t size() const { return live_; }
  std::size_t capacity() const { return labels_.size(); }
  bool empty() const { return live_ == 0; }

  double value(Slot s, std::size_t attribute) const { return columns_[attribute][s]; }
  std::uint8_t label(Slot s) const { return labels_[s]; }
  InstanceId id(Slot s) const { return ids_[s]; }
  bool alive(Slot s) const { return alive_[s] != 0; }
  const std::vector<double>& column(std::size_t attribute) const { return columns_[attribute]; }

  bool contains(InstanceId id) const { return index_.count(id) != 0; }

  Slot slot_of(InstanceId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw UnknownIdError(id);
    return it->second;
  }

  std::vector<Slot> live_slots() const {
    std::vector<Slot> out;
    out.reserve(live_);
    for (std::size_t s = 0; s < alive_.size(); ++s)
      if (alive_[s]) out.push_back(static_cast<Slot>(s));
    return out;
  }

  std::vector<InstanceId> live_ids() const {
    std::vector<InstanceId> out;
    out.reserve(live_);
    for (std::size_t s = 0; s < alive_.size(); ++s)
      if (alive_[s]) out.push_back(ids_[s]);
    return out;
  }

  void remove(InstanceId id) {
    const Slot s = slot_of(id);
    index_.erase(id);
    alive_[s] = 0;
    --live_;
    for (auto& col : columns_) col[s] = 0.0;
    labels_[s] = 0;
  }

  // Live rows in slot order as a standalone dataset.
  Dataset to_dataset() const {
    Dataset d;
    d.columns.assign(p(), {});
    for (std::size_t a = 0; a < p(); ++a) d.columns[a].reserve(live_);
    for (std::size_t s = 0; s < alive_.size(); ++s) {
      if (!alive_[s]) continue;
      for (std::size_t a = 0; a < p(); ++a) d.columns[a].push_back(columns_[a][s]);
      d.labels.push_back(labels_[s]);
      d.ids.push_back(ids_[s]);
    }
    d.feature_names = feature_names_;
    d.schema = schema_;
    return d;
  }

  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::optional<Schema>& schema() const { return schema_; }

  std::size_t memory_bytes() const {
    return capacity() * (p() * sizeof(double) + sizeof(std::uint8_t) * 2 + sizeof(InstanceId));
  }

 private:
  std::vector<std::vector<double>> columns_;
  std::vector<std::uint8_t> labels_;
  std::vector<InstanceId> ids_;
  std::vector<std::uint8_t> alive_;
  std::size_t live_ = 0;
  std::unordered_map<InstanceId, Slot> index_;
  std::vector<std::string> feature_names_;
  std::optional<Schema> schema_;
};

}  // namespace dare

#endif  // DARE_DATASET_HPP_
