#pragma once

// Tabular ingestion and booleanization: CSV -> typed columns -> discrete
// levels -> thermometer-coded literal rows with an appended negation block.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "tmbn/bits.hpp"
#include "tmbn/csv.hpp"
#include "tmbn/errors.hpp"
#include "tmbn/random.hpp"

namespace tmbn {

using FeatureId = std::uint32_t;
using Level = std::uint32_t;

enum class ColumnKind { Numeric, Categorical };

struct RawColumn {
  ColumnKind kind = ColumnKind::Categorical;
  std::vector<double> numbers;     // filled when kind == Numeric
  std::vector<std::string> text;   // original cells, always filled
};

struct RawDataset {
  std::vector<std::string> column_names;
  std::vector<RawColumn> columns;
  std::size_t row_count = 0;

  std::optional<std::size_t> find(std::string_view name) const {
    for (std::size_t i = 0; i < column_names.size(); ++i)
      if (column_names[i] == name) return i;
    return std::nullopt;
  }
};

using SchemaHints = std::map<std::string, ColumnKind, std::less<>>;

namespace detail {

inline bool parse_number(std::string_view s, double& out) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace detail

/// Builds a RawDataset from CSV text. The first record is the header.
inline RawDataset parse_csv(std::string_view text, const SchemaHints& hints = {}) {
  auto records = csv::parse(text);
  if (records.empty()) throw Error("empty CSV input: a header row is required");

  RawDataset ds;
  ds.column_names = records.front().fields;
  const std::size_t width = ds.column_names.size();
  {
    std::unordered_set<std::string> seen;
    for (const auto& n : ds.column_names) {
      if (n.empty()) throw ParseError("empty column name in header", records.front().line);
      if (!seen.insert(n).second) throw ParseError("duplicate column name '" + n + "'", records.front().line);
    }
  }
  for (const auto& [name, kind] : hints)
    if (!ds.find(name)) throw Error("schema hint for unknown column '" + name + "'");

  ds.columns.resize(width);
  ds.row_count = records.size() - 1;
  for (auto& c : ds.columns) c.text.reserve(ds.row_count);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != width)
      throw ParseError("row " + std::to_string(r) + " has " + std::to_string(rec.fields.size()) + " cells, expected " +
                           std::to_string(width),
                       rec.line);
    for (std::size_t c = 0; c < width; ++c) {
      if (rec.fields[c].empty())
        throw ParseError("row " + std::to_string(r) + ": missing value in column '" + ds.column_names[c] + "'", rec.line);
      ds.columns[c].text.push_back(rec.fields[c]);
    }
  }

  for (std::size_t c = 0; c < width; ++c) {
    auto& col = ds.columns[c];
    auto hint = hints.find(ds.column_names[c]);
    bool numeric = true;
    std::vector<double> nums;
    nums.reserve(col.text.size());
    for (const auto& cell : col.text) {
      double v = 0;
      if (!detail::parse_number(cell, v)) {
        numeric = false;
        break;
      }
      nums.push_back(v);
    }
    if (hint != hints.end()) {
      if (hint->second == ColumnKind::Numeric && !numeric)
        throw Error("column '" + ds.column_names[c] + "' is hinted numeric but holds non-numeric cells");
      numeric = hint->second == ColumnKind::Numeric;
    }
    // A header-only column has nothing to classify; leave it categorical.
    if (numeric && !col.text.empty()) {
      col.kind = ColumnKind::Numeric;
      col.numbers = std::move(nums);
    } else {
      col.kind = ColumnKind::Categorical;
    }
  }
  return ds;
}

inline RawDataset load_csv(const std::string& path, const SchemaHints& hints = {}) {
  return parse_csv(csv::read_file(path), hints);
}

struct DiscreteColumn {
  std::string name;
  std::uint32_t cardinality = 1;
  std::vector<Level> values;
  std::vector<std::string> labels;  // one per level
  std::vector<double> edges;        // numeric only: level(x) = #{e in edges : e <= x}

  bool degenerate() const { return cardinality < 2; }
};

/// Equal-count quantile binning. Cut points are taken at ranks floor(k*n/levels)
/// of the sorted values; duplicates and cuts at the minimum are dropped, so equal
/// values always share a level and no level is empty.
inline DiscreteColumn discretize_continuous(std::string name, std::span<const double> values, std::uint32_t levels = 4) {
  if (values.empty()) throw Error("cannot discretize empty column '" + name + "'");
  if (levels < 2) throw Error("discretize: levels must be >= 2");

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();

  DiscreteColumn out;
  out.name = std::move(name);
  for (std::uint32_t k = 1; k < levels; ++k) {
    const double cut = sorted[(static_cast<std::size_t>(k) * n) / levels];
    if (cut > sorted.front() && (out.edges.empty() || cut > out.edges.back())) out.edges.push_back(cut);
  }
  out.cardinality = static_cast<std::uint32_t>(out.edges.size() + 1);
  out.values.reserve(n);
  for (double v : values)
    out.values.push_back(static_cast<Level>(std::upper_bound(out.edges.begin(), out.edges.end(), v) - out.edges.begin()));
  for (std::uint32_t l = 0; l < out.cardinality; ++l) out.labels.push_back("q" + std::to_string(l));
  return out;
}

/// Ranks distinct values by ascending frequency (ties: lexicographic), so the
/// rarest value becomes level 0.
inline DiscreteColumn rank_categorical(std::string name, std::span<const std::string> values) {
  if (values.empty()) throw Error("cannot rank empty column '" + name + "'");
  std::map<std::string, std::size_t, std::less<>> freq;
  for (const auto& v : values) ++freq[v];
  std::vector<std::pair<std::size_t, std::string>> order;
  order.reserve(freq.size());
  for (const auto& [v, f] : freq) order.emplace_back(f, v);
  std::sort(order.begin(), order.end());

  DiscreteColumn out;
  out.name = std::move(name);
  out.cardinality = static_cast<std::uint32_t>(order.size());
  std::unordered_map<std::string_view, Level> level_of;
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.labels.push_back(order[i].second);
  }
  for (std::size_t i = 0; i < out.labels.size(); ++i) level_of.emplace(out.labels[i], static_cast<Level>(i));
  out.values.reserve(values.size());
  for (const auto& v : values) out.values.push_back(level_of.at(v));
  return out;
}

/// Discretizes every column of a table: numeric columns by quantile binning,
/// categorical columns by frequency rank.
inline std::vector<DiscreteColumn> discretize(const RawDataset& ds, std::uint32_t levels = 4) {
  std::vector<DiscreteColumn> out;
  out.reserve(ds.columns.size());
  for (std::size_t c = 0; c < ds.columns.size(); ++c) {
    const auto& col = ds.columns[c];
    if (ds.row_count == 0) {
      DiscreteColumn empty;
      empty.name = ds.column_names[c];
      empty.labels = {"q0"};
      out.push_back(std::move(empty));
    } else if (col.kind == ColumnKind::Numeric) {
      out.push_back(discretize_continuous(ds.column_names[c], col.numbers, levels));
    } else {
      out.push_back(rank_categorical(ds.column_names[c], col.text));
    }
  }
  return out;
}

/// Level r of a d-level feature sets bits [0, r].
inline std::vector<std::uint8_t> thermometer_encode(Level level, std::uint32_t cardinality) {
  if (cardinality == 0 || level >= cardinality)
    throw std::out_of_range("thermometer_encode: level " + std::to_string(level) + " outside [0, " +
                            std::to_string(cardinality) + ")");
  std::vector<std::uint8_t> bits(cardinality, 0);
  std::fill_n(bits.begin(), level + 1, std::uint8_t{1});
  return bits;
}

/// Inverse of thermometer_encode. Throws if the bits are not a non-empty prefix of ones.
inline Level thermometer_decode(std::span<const std::uint8_t> bits) {
  std::size_t ones = 0;
  while (ones < bits.size() && bits[ones]) ++ones;
  for (std::size_t i = ones; i < bits.size(); ++i)
    if (bits[i]) throw std::invalid_argument("thermometer_decode: bits are not a prefix of ones");
  if (ones == 0) throw std::invalid_argument("thermometer_decode: level bit 0 must be set");
  return static_cast<Level>(ones - 1);
}

/// Placement of each feature's literal block inside a literal vector of width
/// 2L: blocks tile [0, L) and literal k + L is the negation of literal k.
class LiteralPartition {
 public:
  struct Block {
    FeatureId feature = 0;
    std::string name;
    std::uint32_t begin = 0;
    std::uint32_t size = 0;
  };

  LiteralPartition() = default;

  void add(FeatureId feature, std::string name, std::uint32_t size) {
    if (size == 0) throw std::invalid_argument("literal block must be non-empty");
    blocks_.push_back({feature, std::move(name), total_, size});
    total_ += size;
    owner_.insert(owner_.end(), size, static_cast<std::uint32_t>(blocks_.size() - 1));
  }

  const std::vector<Block>& blocks() const { return blocks_; }
  std::uint32_t total_literals() const { return total_; }
  std::uint32_t width() const { return 2 * total_; }
  std::uint32_t negation(std::uint32_t k) const { return k < total_ ? k + total_ : k - total_; }

  /// Block index owning literal k; negated literals map to their base block.
  std::uint32_t block_of_literal(std::uint32_t k) const { return owner_.at(k < total_ ? k : k - total_); }
  FeatureId feature_of_literal(std::uint32_t k) const { return blocks_[block_of_literal(k)].feature; }

  std::optional<std::size_t> block_of_feature(FeatureId f) const {
    for (std::size_t i = 0; i < blocks_.size(); ++i)
      if (blocks_[i].feature == f) return i;
    return std::nullopt;
  }

  friend bool operator==(const LiteralPartition& a, const LiteralPartition& b) {
    if (a.total_ != b.total_ || a.blocks_.size() != b.blocks_.size()) return false;
    for (std::size_t i = 0; i < a.blocks_.size(); ++i) {
      const auto& x = a.blocks_[i];
      const auto& y = b.blocks_[i];
      if (x.feature != y.feature || x.name != y.name || x.begin != y.begin || x.size != y.size) return false;
    }
    return true;
  }

 private:
  std::vector<Block> blocks_;
  std::vector<std::uint32_t> owner_;
  std::uint32_t total_ = 0;
};

struct BinarizedDataset {
  LiteralPartition partition;  // feature ids are column indices
  BitMatrix rows;              // row_count x 2L

  std::size_t row_count() const { return rows.rows(); }

  /// Level of feature f in row r, decoded from its thermometer block.
  Level level(std::size_t r, FeatureId f) const {
    const auto& b = partition.blocks().at(*partition.block_of_feature(f));
    Level ones = 0;
    while (ones < b.size && rows.get(r, b.begin + ones)) ++ones;
    return ones - 1;
  }
  std::uint32_t cardinality(FeatureId f) const { return partition.blocks().at(*partition.block_of_feature(f)).size; }
  std::size_t feature_count() const { return partition.blocks().size(); }
};

inline BinarizedDataset binarize(std::span<const DiscreteColumn> columns) {
  BinarizedDataset out;
  std::size_t rows = columns.empty() ? 0 : columns.front().values.size();
  for (std::size_t f = 0; f < columns.size(); ++f) {
    if (columns[f].values.size() != rows) throw Error("binarize: column '" + columns[f].name + "' has a different length");
    out.partition.add(static_cast<FeatureId>(f), columns[f].name, columns[f].cardinality);
  }
  const std::uint32_t L = out.partition.total_literals();
  out.rows = BitMatrix(rows, 2 * L);
  for (std::size_t r = 0; r < rows; ++r) {
    auto row = out.rows.row(r);
    for (std::size_t f = 0; f < columns.size(); ++f) {
      const auto& b = out.partition.blocks()[f];
      const Level lv = columns[f].values[r];
      if (lv >= b.size) throw Error("binarize: level out of range in column '" + columns[f].name + "'");
      for (std::uint32_t k = 0; k < b.size; ++k) {
        const bool on = k <= lv;
        set_bit(row, b.begin + k, on);
        set_bit(row, b.begin + k + L, !on);
      }
    }
  }
  return out;
}

/// One target's classification problem. Inputs hold every feature except the
/// target, re-packed with their own negation block; input_partition keeps the
/// original feature ids.
///
/// Bit 0 of a thermometer block is 1 in every row (and its negation 0), so it
/// is left out: a block of cardinality d contributes d - 1 literals, and a
/// cardinality-1 feature contributes none. A constant-0 literal would satisfy
/// Type II feedback on every row and silence any clause that includes it.
struct TrainingSet {
  FeatureId target = 0;
  std::uint32_t class_count = 0;
  LiteralPartition input_partition;
  BitMatrix inputs;
  std::vector<Level> labels;
};

/// Undersamples every class of `target` to the smallest class size, then
/// shuffles. Deterministic given the seed.
inline TrainingSet balanced_sample(const BinarizedDataset& data, FeatureId target, std::uint64_t seed) {
  const auto tb = data.partition.block_of_feature(target);
  if (!tb) throw Error("balanced_sample: unknown target feature " + std::to_string(target));
  const auto& tblock = data.partition.blocks()[*tb];
  if (tblock.size < 2) throw Error("balanced_sample: target '" + tblock.name + "' is degenerate (cardinality 1)");

  std::vector<std::vector<std::size_t>> by_class(tblock.size);
  for (std::size_t r = 0; r < data.row_count(); ++r) by_class[data.level(r, target)].push_back(r);
  std::string empty;
  for (std::size_t c = 0; c < by_class.size(); ++c)
    if (by_class[c].empty()) empty += (empty.empty() ? "" : ", ") + std::to_string(c);
  if (!empty.empty()) throw Error("balanced_sample: target '" + tblock.name + "' has empty class " + empty);

  std::size_t m = by_class.front().size();
  for (const auto& v : by_class) m = std::min(m, v.size());

  Rng rng(seed);
  std::vector<std::pair<std::size_t, Level>> picked;
  picked.reserve(m * by_class.size());
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& idx = by_class[c];
    // Partial Fisher-Yates: the first m slots become a uniform m-subset.
    for (std::size_t i = 0; i < m; ++i) std::swap(idx[i], idx[i + uniform_below(rng, idx.size() - i)]);
    for (std::size_t i = 0; i < m; ++i) picked.emplace_back(idx[i], static_cast<Level>(c));
  }
  for (std::size_t i = picked.size(); i > 1; --i) std::swap(picked[i - 1], picked[uniform_below(rng, i)]);

  TrainingSet ts;
  ts.target = target;
  ts.class_count = tblock.size;
  std::vector<const LiteralPartition::Block*> kept;
  for (const auto& b : data.partition.blocks())
    if (b.feature != target && b.size > 1) {
      ts.input_partition.add(b.feature, b.name, b.size - 1);
      kept.push_back(&b);
    }
  const std::uint32_t L = data.partition.total_literals();
  const std::uint32_t Lin = ts.input_partition.total_literals();
  ts.inputs = BitMatrix(picked.size(), 2 * Lin);
  ts.labels.reserve(picked.size());
  for (std::size_t i = 0; i < picked.size(); ++i) {
    auto src = data.rows.row(picked[i].first);
    auto dst = ts.inputs.row(i);
    for (std::size_t bi = 0; bi < kept.size(); ++bi) {
      const auto& from = *kept[bi];
      const auto& to = ts.input_partition.blocks()[bi];
      for (std::uint32_t k = 0; k < to.size; ++k) {
        set_bit(dst, to.begin + k, test_bit(src, from.begin + 1 + k));
        set_bit(dst, to.begin + k + Lin, test_bit(src, from.begin + 1 + k + L));
      }
    }
    ts.labels.push_back(picked[i].second);
  }
  return ts;
}

// ---------------------------------------------------------------------------
// JSON layout for a binarized dataset:
//
//   { "format": "tmbn-binarized", "version": 1,
//     "rows": <n>, "total_literals": <L>,
//     "features": [ {"id": f, "name": "...", "begin": b, "size": d}, ... ],
//     "bits": "<base64>" }
//
// "bits" packs the n x 2L matrix row-major with no row padding; flat bit i is
// bit (i % 8), least significant first, of byte i / 8.

namespace base64 {

inline constexpr std::string_view kAlphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline std::string encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  for (std::size_t i = 0; i < bytes.size(); i += 3) {
    std::uint32_t chunk = std::uint32_t{bytes[i]} << 16;
    if (i + 1 < bytes.size()) chunk |= std::uint32_t{bytes[i + 1]} << 8;
    if (i + 2 < bytes.size()) chunk |= bytes[i + 2];
    out.push_back(kAlphabet[(chunk >> 18) & 63]);
    out.push_back(kAlphabet[(chunk >> 12) & 63]);
    out.push_back(i + 1 < bytes.size() ? kAlphabet[(chunk >> 6) & 63] : '=');
    out.push_back(i + 2 < bytes.size() ? kAlphabet[chunk & 63] : '=');
  }
  return out;
}

inline std::vector<std::uint8_t> decode(std::string_view text) {
  if (text.size() % 4 != 0) throw Error("base64: length is not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  auto value = [](char c) -> std::uint32_t {
    auto p = kAlphabet.find(c);
    if (p == std::string_view::npos) throw Error(std::string("base64: invalid character '") + c + "'");
    return static_cast<std::uint32_t>(p);
  };
  for (std::size_t i = 0; i < text.size(); i += 4) {
    const bool pad2 = text[i + 2] == '=';
    const bool pad3 = text[i + 3] == '=';
    if ((pad2 && !pad3) || ((pad2 || pad3) && i + 4 != text.size())) throw Error("base64: misplaced padding");
    std::uint32_t chunk = value(text[i]) << 18 | value(text[i + 1]) << 12;
    if (!pad2) chunk |= value(text[i + 2]) << 6;
    if (!pad3) chunk |= value(text[i + 3]);
    out.push_back(static_cast<std::uint8_t>(chunk >> 16));
    if (!pad2) out.push_back(static_cast<std::uint8_t>(chunk >> 8));
    if (!pad3) out.push_back(static_cast<std::uint8_t>(chunk));
  }
  return out;
}

}  // namespace base64

inline nlohmann::json to_json(const BinarizedDataset& d) {
  nlohmann::json j;
  j["format"] = "tmbn-binarized";
  j["version"] = 1;
  j["rows"] = d.row_count();
  j["total_literals"] = d.partition.total_literals();
  auto& feats = j["features"] = nlohmann::json::array();
  for (const auto& b : d.partition.blocks())
    feats.push_back({{"id", b.feature}, {"name", b.name}, {"begin", b.begin}, {"size", b.size}});
  const std::size_t width = d.rows.cols();
  std::vector<std::uint8_t> bytes((d.row_count() * width + 7) / 8, 0);
  std::size_t i = 0;
  for (std::size_t r = 0; r < d.row_count(); ++r)
    for (std::size_t c = 0; c < width; ++c, ++i)
      if (d.rows.get(r, c)) bytes[i / 8] |= static_cast<std::uint8_t>(1U << (i % 8));
  j["bits"] = base64::encode(bytes);
  return j;
}

inline BinarizedDataset binarized_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "tmbn-binarized" || j.value("version", 0) != 1)
    throw Error("not a tmbn-binarized v1 document");
  BinarizedDataset d;
  for (const auto& f : j.at("features")) {
    d.partition.add(f.at("id").get<FeatureId>(), f.at("name").get<std::string>(), f.at("size").get<std::uint32_t>());
    if (d.partition.blocks().back().begin != f.at("begin").get<std::uint32_t>())
      throw Error("binarized document: feature blocks are not contiguous");
  }
  if (d.partition.total_literals() != j.at("total_literals").get<std::uint32_t>())
    throw Error("binarized document: total_literals disagrees with feature blocks");
  const std::size_t rows = j.at("rows").get<std::size_t>();
  const std::size_t width = d.partition.width();
  auto bytes = base64::decode(j.at("bits").get<std::string>());
  if (bytes.size() != (rows * width + 7) / 8) throw Error("binarized document: bitmap size mismatch");
  d.rows = BitMatrix(rows, width);
  std::size_t i = 0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < width; ++c, ++i) d.rows.set(r, c, (bytes[i / 8] >> (i % 8)) & 1U);
  return d;
}

}  // namespace tmbn
