#pragma once

// The replication experiment: sample a reference network, learn structures
// under several TM parameterisations and score them against the reference.
//
// Config files are flat `key = value` lines; `#` starts a comment. Keys:
//
//   network      path to a network JSON or .bif file (relative to the config)
//   samples      rows drawn per model                         (default 5000)
//   model        one explicit model: clauses threshold specificity max_literals
//                where clauses and max_literals may be written as L, L+k or kL
//                (L = total literals of the sampled data); repeatable
//   models       random:N draws N parameterisations from the ranges used by
//                random_params; may be combined with explicit lines
//   generations  networks learned per model                   (default 10)
//   rounds       rounds per target                            (default 20)
//   top_k        features kept per round                      (default 3)
//   epochs       training epochs per machine                  (default 10)
//   levels       bins for numeric columns                     (default 4)
//   seed         base seed (required, may come from the command line)
//   threads      worker threads for targets                   (default 1)
//
// `learn` reads the same format and ignores network, samples and generations;
// its models form one ensemble (five random members when none are given).

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "tmbn/bayesnet.hpp"
#include "tmbn/csv.hpp"
#include "tmbn/kernel.hpp"
#include "tmbn/structure.hpp"

namespace tmbn {

/// A clause or literal count that may depend on the data's literal total.
struct LiteralExpr {
  std::uint32_t times = 0;  // coefficient of L
  std::int64_t plus = 0;

  std::uint32_t resolve(std::uint32_t L) const {
    const std::int64_t v = static_cast<std::int64_t>(times) * L + plus;
    if (v < 1) throw Error("model count resolves to " + std::to_string(v) + " for L=" + std::to_string(L));
    return static_cast<std::uint32_t>(v);
  }
  friend bool operator==(const LiteralExpr&, const LiteralExpr&) = default;
};

inline LiteralExpr parse_literal_expr(std::string_view s) {
  LiteralExpr e;
  const auto lpos = s.find('L');
  auto to_int = [&](std::string_view t) -> std::int64_t {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || p != t.data() + t.size()) throw Error("bad count '" + std::string(s) + "'");
    return v;
  };
  if (lpos == std::string_view::npos) {
    e.plus = to_int(s);
    return e;
  }
  const auto coef = s.substr(0, lpos);
  e.times = coef.empty() ? 1 : static_cast<std::uint32_t>(to_int(coef));
  auto rest = s.substr(lpos + 1);
  if (!rest.empty()) {
    if (rest.front() == '+') rest.remove_prefix(1);
    else if (rest.front() != '-') throw Error("bad count '" + std::string(s) + "'");
    e.plus = to_int(rest);
  }
  return e;
}

struct ModelSpec {
  LiteralExpr clauses;
  std::uint32_t threshold = 10;
  double specificity = 3.9;
  LiteralExpr max_literals;

  TmParams resolve(std::uint32_t L, std::uint32_t epochs) const {
    TmParams p;
    p.clause_count = clauses.resolve(L);
    p.threshold = threshold;
    p.specificity = specificity;
    p.max_literals = max_literals.resolve(L);
    p.epochs = epochs;
    p.validate();
    return p;
  }
};

struct ExperimentConfig {
  std::string network;
  std::size_t samples = 5000;
  std::vector<ModelSpec> models;
  std::uint32_t random_models = 0;
  std::uint32_t generations = 10;
  std::uint32_t rounds = 20;
  std::uint32_t top_k = 3;
  std::uint32_t epochs = 10;
  std::uint32_t levels = 4;
  std::uint32_t threads = 1;
  std::optional<std::uint64_t> seed;

  void validate() const {
    if (network.empty()) throw Error("experiment: 'network' is required");
    if (samples == 0 || generations == 0 || rounds == 0 || top_k == 0 || epochs == 0 || levels < 2)
      throw Error("experiment: counts must be positive and levels >= 2");
    if (models.empty() && random_models == 0) throw Error("experiment: no models configured");
    if (!seed) throw Error("experiment: a seed is required");
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_value(const std::string& key, const std::string& v, std::size_t line) {
  T out{};
  std::istringstream is(v);
  if (!(is >> out) || !(is >> std::ws).eof()) throw ParseError("bad value for '" + key + "': '" + v + "'", line);
  return out;
}

}  // namespace detail

/// Parses the key-value format. Relative network paths resolve against `base_dir`.
inline ExperimentConfig parse_experiment(std::string_view text, const std::filesystem::path& base_dir = {}) {
  ExperimentConfig cfg;
  std::istringstream in{std::string(text)};
  std::size_t line_no = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = detail::trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line_no);
    const std::string key = detail::trim(std::string_view(line).substr(0, eq));
    const std::string val = detail::trim(std::string_view(line).substr(eq + 1));
    if (val.empty()) throw ParseError("empty value for '" + key + "'", line_no);

    if (key == "network") {
      std::filesystem::path p(val);
      cfg.network = (p.is_relative() && !base_dir.empty() ? base_dir / p : p).lexically_normal().string();
    } else if (key == "samples") {
      cfg.samples = detail::parse_value<std::size_t>(key, val, line_no);
    } else if (key == "generations") {
      cfg.generations = detail::parse_value<std::uint32_t>(key, val, line_no);
    } else if (key == "rounds") {
      cfg.rounds = detail::parse_value<std::uint32_t>(key, val, line_no);
    } else if (key == "top_k") {
      cfg.top_k = detail::parse_value<std::uint32_t>(key, val, line_no);
    } else if (key == "epochs") {
      cfg.epochs = detail::parse_value<std::uint32_t>(key, val, line_no);
    } else if (key == "levels") {
      cfg.levels = detail::parse_value<std::uint32_t>(key, val, line_no);
    } else if (key == "threads") {
      cfg.threads = detail::parse_value<std::uint32_t>(key, val, line_no);
    } else if (key == "seed") {
      cfg.seed = detail::parse_value<std::uint64_t>(key, val, line_no);
    } else if (key == "models") {
      if (val.rfind("random:", 0) != 0) throw ParseError("models expects random:N", line_no);
      cfg.random_models = detail::parse_value<std::uint32_t>(key, val.substr(7), line_no);
    } else if (key == "model") {
      std::istringstream fields(val);
      std::string c, t, s, m, extra;
      if (!(fields >> c >> t >> s >> m) || (fields >> extra))
        throw ParseError("model expects: clauses threshold specificity max_literals", line_no);
      try {
        ModelSpec ms;
        ms.clauses = parse_literal_expr(c);
        ms.threshold = detail::parse_value<std::uint32_t>("threshold", t, line_no);
        ms.specificity = detail::parse_value<double>("specificity", s, line_no);
        ms.max_literals = parse_literal_expr(m);
        cfg.models.push_back(ms);
      } catch (const ParseError&) {
        throw;
      } catch (const Error& e) {
        throw ParseError(e.what(), line_no);
      }
    } else {
      throw ParseError("unknown key '" + key + "'", line_no);
    }
  }
  return cfg;
}

inline ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("experiment config not found: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_experiment(ss.str(), std::filesystem::path(path).parent_path());
}

/// Loads a network from JSON or, by extension, the BIF subset.
inline BayesNet load_network(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("network not found: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  if (std::filesystem::path(path).extension() == ".bif") return parse_bif(ss.str());
  return network_from_json(nlohmann::json::parse(ss.str()));
}

/// Raw text columns of a discrete table, as if it had been read from CSV.
inline RawDataset to_raw(const DiscreteTable& t) {
  RawDataset ds;
  ds.column_names = t.names;
  ds.row_count = t.rows();
  for (std::size_t c = 0; c < t.names.size(); ++c) {
    RawColumn col;
    col.kind = ColumnKind::Categorical;
    col.text.reserve(t.rows());
    for (Level v : t.columns[c]) col.text.push_back(t.labels[c][v]);
    ds.columns.push_back(std::move(col));
  }
  return ds;
}

/// Ensemble members for data with L literals: explicit models first, then
/// `random_models` draws. A config with neither gets five random members.
inline EnsembleConfig ensemble_for(const ExperimentConfig& cfg, std::uint32_t L, std::uint64_t seed) {
  EnsembleConfig ens;
  ens.rounds = cfg.rounds;
  ens.top_k = cfg.top_k;
  ens.threads = cfg.threads;
  for (const auto& m : cfg.models) ens.members.push_back(m.resolve(L, cfg.epochs));
  const std::uint32_t draws = cfg.models.empty() && cfg.random_models == 0 ? 5 : cfg.random_models;
  for (std::uint32_t i = 0; i < draws; ++i)
    ens.members.push_back(random_params(L, derive_seed(seed, {0x6d656d626572ULL, i}), cfg.epochs));
  return ens;
}

/// Roles sidecar: CSV rows `column,role` with an optional `column,role` header.
/// Every data column needs exactly one entry.
inline std::vector<NodeRole> parse_roles(std::string_view text, const std::vector<std::string>& columns) {
  std::map<std::string, NodeRole> given;
  const auto records = csv::parse(text);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (i == 0 && r.fields.size() == 2 && r.fields[0] == "column" && r.fields[1] == "role") continue;
    if (r.fields.size() != 2) throw ParseError("roles: expected 'column,role'", r.line);
    NodeRole role;
    try {
      role = parse_role(r.fields[1]);
    } catch (const Error& e) {
      throw ParseError(e.what(), r.line);
    }
    if (!given.emplace(r.fields[0], role).second) throw ParseError("roles: duplicate entry for '" + r.fields[0] + "'", r.line);
  }
  std::string missing;
  std::vector<NodeRole> out;
  for (const auto& c : columns) {
    auto it = given.find(c);
    if (it == given.end()) {
      missing += (missing.empty() ? "" : ", ") + c;
      continue;
    }
    out.push_back(it->second);
    given.erase(it);
  }
  if (!missing.empty()) throw Error("roles file has no entry for column(s): " + missing);
  if (!given.empty()) {
    std::string extra;
    for (const auto& [k, v] : given) extra += (extra.empty() ? "" : ", ") + k;
    throw Error("roles file names unknown column(s): " + extra);
  }
  return out;
}

struct LearnOutput {
  std::vector<DiscreteColumn> columns;
  EnsembleConfig ensemble;
  NetworkResult result;
};

/// Discretize, binarize and learn a structure from a raw table.
inline LearnOutput learn_structure(const RawDataset& raw, const std::vector<NodeRole>& roles, const ExperimentConfig& cfg,
                                   std::uint64_t seed) {
  LearnOutput out;
  out.columns = discretize(raw, cfg.levels);
  const auto data = binarize(out.columns);
  out.ensemble = ensemble_for(cfg, std::max<std::uint32_t>(data.partition.total_literals(), 4), seed);
  out.result = generate_network_detailed(data, roles, out.ensemble, derive_seed(seed, {0x6c6561726eULL}));
  return out;
}

struct ModelResult {
  TmParams params;
  std::vector<double> scores;
  double mean = 0, stddev = 0, min = 0, max = 0;
};

struct EvalResult {
  std::string network;
  std::vector<ModelResult> models;
};

/// Seeds: data for model i from (seed, 'data', i); the random parameters of
/// model i from (seed, 'model', i); generation g of model i from (seed, 'gen', i, g).
inline EvalResult run_eval(const ExperimentConfig& cfg, const BayesNet& truth, std::ostream* progress = nullptr) {
  cfg.validate();
  const std::uint64_t seed = *cfg.seed;
  const LabeledGraph reference = labeled(truth);
  std::vector<NodeRole> roles;
  for (const auto& v : truth.variables()) roles.push_back(v.role);

  EvalResult out;
  out.network = truth.name;
  const std::size_t model_count = cfg.models.size() + cfg.random_models;
  for (std::size_t i = 0; i < model_count; ++i) {
    const auto table = forward_sample(truth, cfg.samples, derive_seed(seed, {0x64617461ULL, i}));
    const auto columns = discretize(to_raw(table), cfg.levels);
    const auto data = binarize(columns);
    const std::uint32_t L = static_cast<std::uint32_t>(data.partition.total_literals());

    ModelResult mr;
    mr.params = i < cfg.models.size() ? cfg.models[i].resolve(L, cfg.epochs)
                                      : random_params(L, derive_seed(seed, {0x6d6f64656cULL, i}), cfg.epochs);
    EnsembleConfig ens;
    ens.members = {mr.params};
    ens.rounds = cfg.rounds;
    ens.top_k = cfg.top_k;
    ens.threads = cfg.threads;
    for (std::uint32_t g = 0; g < cfg.generations; ++g) {
      const auto graph = generate_network(data, roles, ens, derive_seed(seed, {0x67656eULL, i, g}));
      mr.scores.push_back(similarity_score(labeled(graph), reference));
      if (progress) *progress << "model " << i + 1 << " generation " << g + 1 << ": " << mr.scores.back() << '\n';
    }
    double sum = 0;
    mr.min = mr.max = mr.scores.front();
    for (double s : mr.scores) {
      sum += s;
      mr.min = std::min(mr.min, s);
      mr.max = std::max(mr.max, s);
    }
    mr.mean = sum / static_cast<double>(mr.scores.size());
    double var = 0;
    for (double s : mr.scores) var += (s - mr.mean) * (s - mr.mean);
    mr.stddev = std::sqrt(var / static_cast<double>(mr.scores.size()));
    out.models.push_back(std::move(mr));
  }
  return out;
}

/// One row per model: network,model,clauses,threshold,specificity,max_literals,
/// generations,mean,stddev,min,max.
inline void write_csv(std::ostream& os, const EvalResult& r) {
  os << "network,model,clauses,threshold,specificity,max_literals,generations,mean,stddev,min,max\n";
  char buf[64];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.6f", x);
    return std::string(buf);
  };
  for (std::size_t i = 0; i < r.models.size(); ++i) {
    const auto& m = r.models[i];
    os << r.network << ',' << i + 1 << ',' << m.params.clause_count << ',' << m.params.threshold << ','
       << num(m.params.specificity) << ',' << m.params.max_literals << ',' << m.scores.size() << ',' << num(m.mean) << ','
       << num(m.stddev) << ',' << num(m.min) << ',' << num(m.max) << '\n';
  }
}

}  // namespace tmbn
