#pragma once

// Discrete Bayesian networks: DAG plus one CPT per node. Loading from a BIF
// subset or the native JSON layout, ancestral sampling, and frequency-based
// CPT estimation on a fixed structure.
//
// CPT layout. A node with parents (p_1, ..., p_k) in declaration order has
// prod |p_i| rows. Row index is row-major over parent outcomes, the last
// parent varying fastest; each row is a distribution over the node's outcomes.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tmbn/csv.hpp"
#include "tmbn/data.hpp"
#include "tmbn/errors.hpp"
#include "tmbn/graph.hpp"
#include "tmbn/random.hpp"

namespace tmbn {

struct Variable {
  std::string name;
  std::vector<std::string> outcomes;
  std::vector<NodeId> parents;  // declaration order
  std::vector<double> cpt;      // rows x outcomes, row-major
  NodeRole role = NodeRole::Observed;

  std::size_t row_count() const { return outcomes.empty() ? 0 : cpt.size() / outcomes.size(); }
  std::span<const double> row(std::size_t r) const { return {cpt.data() + r * outcomes.size(), outcomes.size()}; }

  friend bool operator==(const Variable&, const Variable&) = default;
};

class BayesNet {
 public:
  std::string name = "network";

  const std::vector<Variable>& variables() const { return vars_; }
  const Variable& variable(NodeId v) const { return vars_.at(v); }
  std::size_t size() const { return vars_.size(); }

  std::optional<NodeId> find(std::string_view n) const {
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i].name == n) return static_cast<NodeId>(i);
    return std::nullopt;
  }

  /// Adds a node; parents must already exist. Throws on malformed CPTs.
  NodeId add(Variable v) {
    if (find(v.name)) throw Error("duplicate variable '" + v.name + "'");
    if (v.outcomes.empty()) throw Error("variable '" + v.name + "' has no outcomes");
    std::size_t rows = 1;
    for (NodeId p : v.parents) {
      if (p >= vars_.size()) throw Error("variable '" + v.name + "': unknown parent");
      rows *= vars_[p].outcomes.size();
    }
    if (v.cpt.size() != rows * v.outcomes.size())
      throw Error("variable '" + v.name + "': CPT has " + std::to_string(v.cpt.size()) + " entries, expected " +
                  std::to_string(rows * v.outcomes.size()));
    for (std::size_t r = 0; r < rows; ++r) {
      double sum = 0;
      for (std::size_t o = 0; o < v.outcomes.size(); ++o) {
        const double p = v.cpt[r * v.outcomes.size() + o];
        if (!(p >= 0.0 && p <= 1.0 + 1e-12)) throw Error("variable '" + v.name + "': probability outside [0, 1]");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) throw Error("variable '" + v.name + "': row " + std::to_string(r) + " does not sum to 1");
    }
    vars_.push_back(std::move(v));
    return static_cast<NodeId>(vars_.size() - 1);
  }

  std::size_t parent_config(NodeId v, std::span<const Level> assignment) const {
    std::size_t idx = 0;
    for (NodeId p : vars_[v].parents) idx = idx * vars_[p].outcomes.size() + assignment[p];
    return idx;
  }

  NetworkGraph dag() const {
    NetworkGraph g;
    for (const auto& v : vars_) g.add_node(v.name, v.role);
    for (std::size_t i = 0; i < vars_.size(); ++i)
      for (NodeId p : vars_[i].parents) g.add_edge(p, static_cast<NodeId>(i), {0, static_cast<NodeId>(i), 0, 0});
    return g;
  }

  friend bool operator==(const BayesNet&, const BayesNet&) = default;

 private:
  std::vector<Variable> vars_;
};

namespace detail {

inline void normalize_rows(std::vector<double>& cpt, std::size_t width) {
  for (std::size_t r = 0; r * width < cpt.size(); ++r) {
    double sum = 0;
    for (std::size_t o = 0; o < width; ++o) sum += cpt[r * width + o];
    if (std::abs(sum - 1.0) > 1e-9)
      for (std::size_t o = 0; o < width; ++o) cpt[r * width + o] /= sum;
  }
}

struct Token {
  std::string text;
  std::size_t line;
  bool punct;
};

inline std::vector<Token> tokenize_bif(std::string_view s) {
  std::vector<Token> out;
  std::size_t line = 1;
  for (std::size_t i = 0; i < s.size();) {
    const char c = s[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') {
      while (i < s.size() && s[i] != '\n') ++i;
    } else if (c == '/' && i + 1 < s.size() && s[i + 1] == '*') {
      const std::size_t start = line;
      i += 2;
      while (i + 1 < s.size() && !(s[i] == '*' && s[i + 1] == '/')) line += s[i++] == '\n';
      if (i + 1 >= s.size()) throw ParseError("unterminated comment", start);
      i += 2;
    } else if (std::string_view("{}()[];,|").find(c) != std::string_view::npos) {
      out.push_back({std::string(1, c), line, true});
      ++i;
    } else if (c == '"') {
      std::size_t j = i + 1;
      while (j < s.size() && s[j] != '"') line += s[j++] == '\n';
      if (j >= s.size()) throw ParseError("unterminated string", line);
      out.push_back({std::string(s.substr(i + 1, j - i - 1)), line, false});
      i = j + 1;
    } else {
      std::size_t j = i;
      while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && std::string_view("{}()[];,|\"").find(s[j]) == std::string_view::npos)
        ++j;
      out.push_back({std::string(s.substr(i, j - i)), line, false});
      i = j;
    }
  }
  return out;
}

class BifParser {
 public:
  explicit BifParser(std::string_view text) : toks_(tokenize_bif(text)) {}

  BayesNet parse() {
    struct Decl {
      std::vector<std::string> outcomes;
      std::size_t line;
    };
    std::map<std::string, Decl> decls;
    std::vector<std::string> order;
    struct Prob {
      std::string child;
      std::vector<std::string> parents;
      std::vector<double> cpt;
      std::size_t line;
    };
    std::vector<Prob> probs;
    std::string net_name = "network";

    while (!done()) {
      const Token& kw = next();
      if (kw.text == "network") {
        net_name = ident("network name");
        skip_block();
      } else if (kw.text == "variable") {
        const std::string name = ident("variable name");
        const std::size_t line = kw.line;
        if (decls.count(name)) throw ParseError("variable '" + name + "' declared twice", line);
        expect("{");
        std::vector<std::string> outcomes;
        while (!peek_is("}")) {
          const Token& t = next();
          if (t.text == "type") {
            const std::string kind = ident("variable type");
            if (kind != "discrete") throw ParseError("variable '" + name + "': only discrete variables are supported", t.line);
            expect("[");
            const std::string n = ident("outcome count");
            expect("]");
            expect("{");
            outcomes.push_back(ident("outcome"));
            while (peek_is(",")) {
              next();
              outcomes.push_back(ident("outcome"));
            }
            expect("}");
            expect(";");
            if (std::to_string(outcomes.size()) != n)
              throw ParseError("variable '" + name + "': declared " + n + " outcomes but listed " + std::to_string(outcomes.size()), t.line);
          } else if (t.text == "property") {
            skip_statement();
          } else {
            throw ParseError("unexpected '" + t.text + "' in variable block", t.line);
          }
        }
        expect("}");
        if (outcomes.empty()) throw ParseError("variable '" + name + "' has no type declaration", line);
        decls[name] = {outcomes, line};
        order.push_back(name);
      } else if (kw.text == "probability") {
        Prob p;
        p.line = kw.line;
        expect("(");
        p.child = ident("child variable");
        if (peek_is("|")) {
          next();
          p.parents.push_back(ident("parent variable"));
          while (peek_is(",")) {
            next();
            p.parents.push_back(ident("parent variable"));
          }
        }
        expect(")");
        auto find_decl = [&](const std::string& n) -> const Decl& {
          auto it = decls.find(n);
          if (it == decls.end()) throw ParseError("probability block references unknown variable '" + n + "'", p.line);
          return it->second;
        };
        const Decl& child = find_decl(p.child);
        std::vector<const Decl*> parents;
        std::size_t rows = 1;
        for (const auto& pn : p.parents) {
          parents.push_back(&find_decl(pn));
          rows *= parents.back()->outcomes.size();
        }
        const std::size_t width = child.outcomes.size();
        p.cpt.assign(rows * width, 0.0);
        std::vector<bool> seen(rows, false);
        std::size_t seen_count = 0;
        const std::string block = "probability block for '" + p.child + "'";
        expect("{");
        while (!peek_is("}")) {
          const Token& t = peek();
          if (t.text == "table") {
            next();
            if (!p.parents.empty())
              throw ParseError(block + ": 'table' is only supported for nodes without parents", t.line);
            auto vals = numbers(block);
            if (vals.size() != width)
              throw ParseError(block + ": table has " + std::to_string(vals.size()) + " values, expected " + std::to_string(width), t.line);
            check_row(vals, block, t.line);
            std::copy(vals.begin(), vals.end(), p.cpt.begin());
            seen[0] = true;
            seen_count = 1;
          } else if (t.text == "(") {
            const std::size_t line = t.line;
            next();
            std::size_t idx = 0;
            for (std::size_t i = 0; i < parents.size(); ++i) {
              if (i) expect(",");
              const std::string o = ident("parent outcome");
              const auto& outs = parents[i]->outcomes;
              auto it = std::find(outs.begin(), outs.end(), o);
              if (it == outs.end()) throw ParseError(block + ": unknown outcome '" + o + "' of '" + p.parents[i] + "'", line);
              idx = idx * outs.size() + static_cast<std::size_t>(it - outs.begin());
            }
            expect(")");
            auto vals = numbers(block);
            if (vals.size() != width)
              throw ParseError(block + ": row has " + std::to_string(vals.size()) + " values, expected " + std::to_string(width), line);
            if (seen[idx]) throw ParseError(block + ": parent configuration listed twice", line);
            check_row(vals, block, line);
            std::copy(vals.begin(), vals.end(), p.cpt.begin() + static_cast<std::ptrdiff_t>(idx * width));
            seen[idx] = true;
            ++seen_count;
          } else if (t.text == "property") {
            next();
            skip_statement();
          } else {
            throw ParseError(block + ": unsupported entry '" + t.text + "'", t.line);
          }
        }
        expect("}");
        if (seen_count != rows)
          throw ParseError(block + ": " + std::to_string(seen_count) + " rows given, expected " + std::to_string(rows), p.line);
        normalize_rows(p.cpt, width);
        probs.push_back(std::move(p));
      } else {
        throw ParseError("unexpected '" + kw.text + "' at top level", kw.line);
      }
    }

    // Insert in an order where parents come first, keeping declaration order
    // otherwise.
    std::map<std::string, const Prob*> by_child;
    for (const auto& p : probs) {
      if (by_child.count(p.child)) throw ParseError("second probability block for '" + p.child + "'", p.line);
      by_child[p.child] = &p;
    }
    for (const auto& n : order)
      if (!by_child.count(n)) throw ParseError("variable '" + n + "' has no probability block", decls[n].line);

    BayesNet net;
    net.name = net_name;
    std::vector<bool> placed(order.size(), false);
    for (std::size_t done_count = 0; done_count < order.size();) {
      bool progress = false;
      for (std::size_t i = 0; i < order.size(); ++i) {
        if (placed[i]) continue;
        const Prob& p = *by_child[order[i]];
        Variable v;
        bool ready = true;
        for (const auto& pn : p.parents) {
          auto id = net.find(pn);
          if (!id) {
            ready = false;
            break;
          }
          v.parents.push_back(*id);
        }
        if (!ready) continue;
        v.name = order[i];
        v.outcomes = decls[order[i]].outcomes;
        v.cpt = p.cpt;
        v.role = v.parents.empty() ? NodeRole::Parameter : NodeRole::Observed;
        net.add(std::move(v));
        placed[i] = true;
        ++done_count;
        progress = true;
      }
      if (!progress) throw ParseError("probability blocks define a cyclic graph", probs.empty() ? 1 : probs.front().line);
    }
    return net;
  }

 private:
  bool done() const { return pos_ >= toks_.size(); }
  const Token& peek() const {
    if (done()) throw ParseError("unexpected end of input", toks_.empty() ? 1 : toks_.back().line);
    return toks_[pos_];
  }
  bool peek_is(std::string_view s) const { return !done() && toks_[pos_].punct && toks_[pos_].text == s; }
  const Token& next() {
    const Token& t = peek();
    ++pos_;
    return t;
  }
  void expect(std::string_view s) {
    const Token& t = next();
    if (!t.punct || t.text != s) throw ParseError("expected '" + std::string(s) + "' but found '" + t.text + "'", t.line);
  }
  std::string ident(std::string_view what) {
    const Token& t = next();
    if (t.punct) throw ParseError("expected " + std::string(what) + " but found '" + t.text + "'", t.line);
    return t.text;
  }
  void skip_statement() {
    while (!next().punct || toks_[pos_ - 1].text != ";") {
    }
  }
  void skip_block() {
    expect("{");
    int depth = 1;
    while (depth) {
      const Token& t = next();
      if (t.punct && t.text == "{") ++depth;
      if (t.punct && t.text == "}") --depth;
    }
  }
  std::vector<double> numbers(const std::string& block) {
    std::vector<double> v;
    for (;;) {
      const Token& t = next();
      double x = 0;
      if (t.punct || !parse_number(t.text, x)) throw ParseError(block + ": expected a probability, found '" + t.text + "'", t.line);
      v.push_back(x);
      const Token& sep = next();
      if (sep.punct && sep.text == ";") return v;
      if (!sep.punct || sep.text != ",") throw ParseError(block + ": expected ',' or ';' after probability", sep.line);
    }
  }
  static void check_row(const std::vector<double>& vals, const std::string& block, std::size_t line) {
    double sum = 0;
    for (double x : vals) {
      if (x < 0 || x > 1) throw ParseError(block + ": probability outside [0, 1]", line);
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      std::ostringstream os;
      os << block << ": probabilities sum to " << sum << ", not 1";
      throw ParseError(os.str(), line);
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

/// Reads the BIF subset described in docs/bif-subset.md. Each probability row
/// must sum to 1 within 1e-6 and is rescaled when off by more than 1e-9. Roles
/// are not part of BIF: nodes without parents become Parameters, the rest
/// Observed.
inline BayesNet parse_bif(std::string_view text) { return detail::BifParser(text).parse(); }

inline void write_bif(std::ostream& os, const BayesNet& net) {
  os << "network " << net.name << " {\n}\n";
  for (const auto& v : net.variables()) {
    os << "variable " << v.name << " {\n  type discrete [ " << v.outcomes.size() << " ] { ";
    for (std::size_t i = 0; i < v.outcomes.size(); ++i) os << (i ? ", " : "") << v.outcomes[i];
    os << " };\n}\n";
  }
  for (const auto& v : net.variables()) {
    os << "probability ( " << v.name;
    for (std::size_t i = 0; i < v.parents.size(); ++i) os << (i ? ", " : " | ") << net.variable(v.parents[i]).name;
    os << " ) {\n";
    auto write_vals = [&](std::size_t r) {
      for (std::size_t o = 0; o < v.outcomes.size(); ++o) os << (o ? ", " : " ") << detail::format_double(v.row(r)[o]);
      os << ";\n";
    };
    if (v.parents.empty()) {
      os << "  table";
      write_vals(0);
    } else {
      std::vector<std::size_t> idx(v.parents.size(), 0);
      for (std::size_t r = 0; r < v.row_count(); ++r) {
        os << "  (";
        for (std::size_t i = 0; i < idx.size(); ++i) os << (i ? ", " : "") << net.variable(v.parents[i]).outcomes[idx[i]];
        os << ")";
        write_vals(r);
        for (std::size_t i = idx.size(); i-- > 0;) {
          if (++idx[i] < net.variable(v.parents[i]).outcomes.size()) break;
          idx[i] = 0;
        }
      }
    }
    os << "}\n";
  }
}

inline std::string to_bif(const BayesNet& net) {
  std::ostringstream os;
  write_bif(os, net);
  return os.str();
}

// Native JSON:
//   { "format": "tmbn-network", "version": 1, "name": "...",
//     "nodes": [ { "name": "...", "role": "Observed", "outcomes": [...],
//                  "parents": [...], "cpt": [[...], ...] }, ... ] }
// Nodes may appear in any order; "role" defaults as for BIF.

inline nlohmann::json to_json(const BayesNet& net) {
  nlohmann::json j;
  j["format"] = "tmbn-network";
  j["version"] = 1;
  j["name"] = net.name;
  auto& nodes = j["nodes"] = nlohmann::json::array();
  for (const auto& v : net.variables()) {
    nlohmann::json n{{"name", v.name}, {"role", to_string(v.role)}, {"outcomes", v.outcomes}};
    auto& parents = n["parents"] = nlohmann::json::array();
    for (NodeId p : v.parents) parents.push_back(net.variable(p).name);
    auto& cpt = n["cpt"] = nlohmann::json::array();
    for (std::size_t r = 0; r < v.row_count(); ++r) cpt.push_back(std::vector<double>(v.row(r).begin(), v.row(r).end()));
    nodes.push_back(std::move(n));
  }
  return j;
}

inline BayesNet network_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "tmbn-network" || j.value("version", 0) != 1) throw Error("not a tmbn-network v1 document");
  BayesNet net;
  net.name = j.value("name", "network");
  const auto& nodes = j.at("nodes");
  std::vector<bool> placed(nodes.size(), false);
  for (std::size_t done = 0; done < nodes.size();) {
    bool progress = false;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (placed[i]) continue;
      const auto& n = nodes[i];
      Variable v;
      bool ready = true;
      for (const auto& pn : n.at("parents")) {
        auto id = net.find(pn.get<std::string>());
        if (!id) {
          ready = false;
          break;
        }
        v.parents.push_back(*id);
      }
      if (!ready) continue;
      v.name = n.at("name").get<std::string>();
      v.outcomes = n.at("outcomes").get<std::vector<std::string>>();
      for (const auto& row : n.at("cpt")) {
        if (row.size() != v.outcomes.size()) throw Error("network document: CPT row width mismatch for '" + v.name + "'");
        for (const auto& x : row) v.cpt.push_back(x.get<double>());
      }
      v.role = n.contains("role") ? parse_role(n.at("role").get<std::string>())
                                  : (v.parents.empty() ? NodeRole::Parameter : NodeRole::Observed);
      net.add(std::move(v));
      placed[i] = true;
      ++done;
      progress = true;
    }
    if (!progress) throw Error("network document: unknown parent or cyclic parent relation");
  }
  return net;
}

/// Column-oriented table of discrete values with per-column outcome labels.
struct DiscreteTable {
  std::vector<std::string> names;
  std::vector<std::vector<std::string>> labels;
  std::vector<std::vector<Level>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  std::optional<std::size_t> find(std::string_view n) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == n) return i;
    return std::nullopt;
  }
};

inline DiscreteTable to_table(std::span<const DiscreteColumn> cols) {
  DiscreteTable t;
  for (const auto& c : cols) {
    t.names.push_back(c.name);
    t.labels.push_back(c.labels);
    t.columns.push_back(c.values);
  }
  return t;
}

inline void write_csv(std::ostream& os, const DiscreteTable& t) {
  csv::write_row(os, t.names);
  std::vector<std::string> cells(t.names.size());
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t c = 0; c < t.names.size(); ++c) cells[c] = t.labels[c][t.columns[c][r]];
    csv::write_row(os, cells);
  }
}

/// Ancestral sampling in topological order. Each node draws from its own
/// stream derived from (seed, node id) by inverse CDF over its CPT row.
inline DiscreteTable forward_sample(const BayesNet& net, std::size_t n, std::uint64_t seed) {
  const auto order = topological_order(net.dag());
  if (!order) throw Error("forward_sample: network is cyclic");
  DiscreteTable t;
  for (const auto& v : net.variables()) {
    t.names.push_back(v.name);
    t.labels.push_back(v.outcomes);
    t.columns.emplace_back(n);
  }
  std::vector<Rng> streams;
  streams.reserve(net.size());
  for (std::size_t v = 0; v < net.size(); ++v) streams.emplace_back(derive_seed(seed, {0x73616d70ULL, v}));

  std::vector<Level> assignment(net.size());
  for (std::size_t r = 0; r < n; ++r) {
    for (NodeId v : *order) {
      const auto& var = net.variable(v);
      const auto row = var.row(net.parent_config(v, assignment));
      const double u = uniform01(streams[v]);
      double acc = 0;
      Level pick = static_cast<Level>(row.size() - 1);
      for (std::size_t o = 0; o < row.size(); ++o) {
        acc += row[o];
        if (u < acc) {
          pick = static_cast<Level>(o);
          break;
        }
      }
      // Guard against rounding leaving u above the final cumulative sum.
      while (row[pick] == 0.0 && pick > 0) --pick;
      assignment[v] = pick;
      t.columns[v][r] = pick;
    }
  }
  return t;
}

/// CPT entries (count + alpha) / (row_total + alpha * outcomes) per parent
/// configuration; configurations never observed get a uniform row. Parents
/// follow ascending node id in `dag`, outcomes come from the table labels,
/// and nodes are stored in topological order.
inline BayesNet estimate_cpts(const NetworkGraph& dag, const DiscreteTable& data, double alpha = 1.0) {
  if (alpha < 0) throw Error("estimate_cpts: alpha must be non-negative");
  if (!topological_order(dag)) throw Error("estimate_cpts: graph is cyclic");
  std::vector<std::size_t> col(dag.node_count());
  for (NodeId v = 0; v < dag.node_count(); ++v) {
    auto c = data.find(dag.node(v).name);
    if (!c) throw Error("estimate_cpts: no data column for node '" + dag.node(v).name + "'");
    col[v] = *c;
  }
  const auto order = *topological_order(dag);
  BayesNet net;
  std::vector<NodeId> id_in_net(dag.node_count());
  for (NodeId v : order) {
    Variable var;
    var.name = dag.node(v).name;
    var.role = dag.node(v).role;
    var.outcomes = data.labels[col[v]];
    const auto parents = dag.parents(v);
    std::size_t rows = 1;
    for (NodeId p : parents) rows *= data.labels[col[p]].size();
    const std::size_t width = var.outcomes.size();
    std::vector<double> counts(rows * width, 0.0);
    for (std::size_t r = 0; r < data.rows(); ++r) {
      std::size_t idx = 0;
      for (NodeId p : parents) idx = idx * data.labels[col[p]].size() + data.columns[col[p]][r];
      counts[idx * width + data.columns[col[v]][r]] += 1.0;
    }
    var.cpt.resize(rows * width);
    for (std::size_t i = 0; i < rows; ++i) {
      double total = 0;
      for (std::size_t o = 0; o < width; ++o) total += counts[i * width + o];
      const double denom = total + alpha * static_cast<double>(width);
      for (std::size_t o = 0; o < width; ++o)
        var.cpt[i * width + o] = denom > 0 ? (counts[i * width + o] + alpha) / denom : 1.0 / static_cast<double>(width);
    }
    detail::normalize_rows(var.cpt, width);
    for (NodeId p : parents) var.parents.push_back(id_in_net[p]);
    id_in_net[v] = net.add(std::move(var));
  }
  return net;
}

}  // namespace tmbn
