#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "tmbn/csv.hpp"
#include "tmbn/data.hpp"
#include "tmbn/random.hpp"
#include "tmbn/tsetlin.hpp"

namespace tmbn {

using Strength = std::int64_t;
using RankedFeatures = std::vector<std::pair<FeatureId, Strength>>;

/// Strength of every input feature for one target.
struct StrengthMap {
  FeatureId target = 0;
  std::map<FeatureId, Strength> scores;
  std::map<FeatureId, std::uint32_t> top_counts;  // rounds in which the feature made the top K
  std::uint32_t rounds_aggregated = 0;

  /// Merges another map for the same target. Commutative and associative.
  StrengthMap& operator+=(const StrengthMap& o) {
    for (const auto& [f, s] : o.scores) scores[f] += s;
    for (const auto& [f, n] : o.top_counts) top_counts[f] += n;
    rounds_aggregated += o.rounds_aggregated;
    return *this;
  }

  Strength total() const {
    Strength t = 0;
    for (const auto& [f, s] : scores) t += s;
    return t;
  }

  Strength at(FeatureId f) const {
    auto it = scores.find(f);
    return it == scores.end() ? 0 : it->second;
  }

  friend bool operator==(const StrengthMap&, const StrengthMap&) = default;
};

/// g[f] = sum over classes n and clauses c of |w_n[c]| times the number of
/// f's literals (plain or negated) included in c. `partition` describes the
/// machine's input layout.
inline StrengthMap global_strength(const Machine& m, const LiteralPartition& partition, FeatureId target) {
  if (partition.width() != m.literal_count()) throw Error("global_strength: partition does not match the machine's inputs");
  StrengthMap out;
  out.target = target;
  out.rounds_aggregated = 1;
  for (const auto& b : partition.blocks())
    if (b.feature != target) out.scores[b.feature] = 0;

  std::vector<Strength> per_block(partition.blocks().size());
  for (std::uint32_t c = 0; c < m.clause_count(); ++c) {
    if (m.included_count(c) == 0) continue;
    Strength wsum = 0;
    for (std::uint32_t n = 0; n < m.class_count(); ++n) wsum += std::abs(static_cast<Strength>(m.weight(n, c)));
    if (wsum == 0) continue;
    std::fill(per_block.begin(), per_block.end(), 0);
    for (std::uint32_t k = 0; k < m.literal_count(); ++k)
      if (m.included(c, k)) ++per_block[partition.block_of_literal(k)];
    for (std::size_t bi = 0; bi < per_block.size(); ++bi) {
      const FeatureId f = partition.blocks()[bi].feature;
      if (per_block[bi] && f != target) out.scores[f] += wsum * per_block[bi];
    }
  }
  return out;
}

/// Entries sorted by descending strength, ties by ascending feature id, with
/// the target removed. Zero-strength entries are dropped when `skip_zero`.
inline RankedFeatures top_k(const StrengthMap& m, std::size_t k, bool skip_zero = false) {
  RankedFeatures v;
  for (const auto& [f, s] : m.scores)
    if (f != m.target && !(skip_zero && s == 0)) v.emplace_back(f, s);
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second != b.second ? a.second > b.second : a.first < b.first; });
  if (v.size() > k) v.resize(k);
  return v;
}

struct EnsembleConfig {
  std::vector<TmParams> members;
  std::uint32_t rounds = 20;
  std::optional<std::uint32_t> epochs;  // overrides each member's epochs when set
  std::uint32_t top_k = 3;
  std::uint32_t threads = 1;

  void validate() const {
    if (members.empty()) throw Error("EnsembleConfig: at least one member is required");
    if (rounds == 0 || top_k == 0) throw Error("EnsembleConfig: rounds and top_k must be >= 1");
    if (epochs && *epochs == 0) throw Error("EnsembleConfig: epochs must be >= 1");
    for (const auto& p : members) p.validate();
  }
};

/// Seeds used by round r of ensemble member m when learning one target.
struct RoundSeeds {
  std::uint64_t sample;
  std::uint64_t machine;
};

inline RoundSeeds round_seeds(std::uint64_t target_seed, std::uint32_t round, std::uint32_t member) {
  return {derive_seed(target_seed, {round, member, 0}), derive_seed(target_seed, {round, member, 1})};
}

/// Seed handed to run_rounds for a given target by build_top_feature_table.
inline std::uint64_t target_seed(std::uint64_t seed, FeatureId target) { return derive_seed(seed, {0x7461726765ULL, target}); }

/// Trains one fresh machine per (round, member) on a balanced resample and
/// adds the top-K strengths of each into the aggregate.
inline StrengthMap run_rounds(const BinarizedDataset& data, FeatureId target, const EnsembleConfig& config, std::uint64_t seed) {
  config.validate();
  StrengthMap agg;
  agg.target = target;
  for (const auto& b : data.partition.blocks())
    if (b.feature != target) agg.scores[b.feature] = 0;

  for (std::uint32_t r = 0; r < config.rounds; ++r) {
    for (std::uint32_t mi = 0; mi < config.members.size(); ++mi) {
      const auto seeds = round_seeds(seed, r, mi);
      const TrainingSet ts = balanced_sample(data, target, seeds.sample);
      if (ts.input_partition.total_literals() == 0) continue;
      const TmParams& p = config.members[mi];
      Machine m(p, ts.input_partition.width(), ts.class_count, seeds.machine);
      train(m, ts, config.epochs.value_or(p.epochs));
      const StrengthMap g = global_strength(m, ts.input_partition, target);
      StrengthMap round;
      round.target = target;
      round.rounds_aggregated = 1;
      for (const auto& [f, s] : top_k(g, config.top_k)) {
        round.scores[f] = s;
        if (s > 0) round.top_counts[f] = 1;
      }
      agg += round;
    }
  }
  return agg;
}

struct TopFeatureRow {
  FeatureId node = 0;
  std::string name;
  bool skipped = false;  // degenerate target, not learned
  RankedFeatures top;    // at most K entries, strictly positive strengths
  StrengthMap aggregate;
  Strength total = 0;    // sum of the aggregate map
};

struct TopFeatureTable {
  std::uint32_t k = 0;
  std::vector<TopFeatureRow> rows;  // indexed by feature id
  std::vector<std::string> warnings;

  /// Aggregate strength of `feature` observed while learning `target`.
  Strength strength(FeatureId target, FeatureId feature) const { return rows.at(target).aggregate.at(feature); }
};

/// Runs run_rounds with every non-degenerate feature as target. Targets are
/// independent, so they may be spread over `config.threads` workers without
/// affecting the result.
inline TopFeatureTable build_top_feature_table(const BinarizedDataset& data, const EnsembleConfig& config, std::uint64_t seed) {
  config.validate();
  TopFeatureTable table;
  table.k = config.top_k;
  const auto& blocks = data.partition.blocks();
  table.rows.resize(blocks.size());
  std::vector<FeatureId> work;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    auto& row = table.rows[i];
    row.node = blocks[i].feature;
    row.name = blocks[i].name;
    row.aggregate.target = row.node;
    if (blocks[i].feature != i) throw Error("build_top_feature_table: feature ids must equal column positions");
    if (blocks[i].size < 2) {
      row.skipped = true;
      table.warnings.push_back("skipped degenerate target '" + blocks[i].name + "' (cardinality 1)");
    } else if (blocks.size() < 2) {
      row.skipped = true;
      table.warnings.push_back("skipped target '" + blocks[i].name + "': no other features");
    } else {
      work.push_back(static_cast<FeatureId>(i));
    }
  }

  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  auto worker = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < work.size();) {
      const FeatureId t = work[j];
      try {
        table.rows[t].aggregate = run_rounds(data, t, config, target_seed(seed, t));
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  const std::size_t nthreads = std::min<std::size_t>(std::max<std::uint32_t>(config.threads, 1), std::max<std::size_t>(work.size(), 1));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
  }
  if (err) std::rethrow_exception(err);

  for (auto& row : table.rows) {
    if (row.skipped) continue;
    row.top = top_k(row.aggregate, config.top_k, true);
    row.total = row.aggregate.total();
  }
  return table;
}

/// CSV: node,top1,strength1,...,topK,strengthK,total_strength. Short lists
/// leave trailing cells empty.
inline void write_csv(std::ostream& os, const TopFeatureTable& t) {
  std::vector<std::string> header{"node"};
  for (std::uint32_t i = 1; i <= t.k; ++i) {
    header.push_back("top" + std::to_string(i));
    header.push_back("strength" + std::to_string(i));
  }
  header.push_back("total_strength");
  csv::write_row(os, header);
  for (const auto& row : t.rows) {
    std::vector<std::string> cells{row.name};
    for (std::uint32_t i = 0; i < t.k; ++i) {
      if (i < row.top.size()) {
        cells.push_back(t.rows.at(row.top[i].first).name);
        cells.push_back(std::to_string(row.top[i].second));
      } else {
        cells.insert(cells.end(), {"", ""});
      }
    }
    cells.push_back(std::to_string(row.total));
    csv::write_row(os, cells);
  }
}

inline nlohmann::json to_json(const TopFeatureTable& t) {
  nlohmann::json j;
  j["format"] = "tmbn-top-features";
  j["version"] = 1;
  j["k"] = t.k;
  auto& rows = j["nodes"] = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json r{{"node", row.name}, {"skipped", row.skipped}, {"total_strength", row.total}};
    auto& top = r["top"] = nlohmann::json::array();
    for (const auto& [f, s] : row.top)
      top.push_back({{"feature", t.rows.at(f).name}, {"strength", s}, {"rounds", row.aggregate.top_counts.count(f) ? row.aggregate.top_counts.at(f) : 0U}});
    rows.push_back(std::move(r));
  }
  j["warnings"] = t.warnings;
  return j;
}

}  // namespace tmbn
