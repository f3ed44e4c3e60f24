#pragma once

// Labelled directed graph with node roles and per-edge strength annotations,
// plus acyclicity checks and the DOT / JSON exports.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tmbn/errors.hpp"

namespace tmbn {

using NodeId = std::uint32_t;

enum class NodeRole { Parameter, Observed, Unobserved };

inline const char* to_string(NodeRole r) {
  switch (r) {
    case NodeRole::Parameter: return "Parameter";
    case NodeRole::Observed: return "Observed";
    case NodeRole::Unobserved: return "Unobserved";
  }
  return "?";
}

inline NodeRole parse_role(std::string_view s) {
  std::string lower(s);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "parameter") return NodeRole::Parameter;
  if (lower == "observed") return NodeRole::Observed;
  if (lower == "unobserved") return NodeRole::Unobserved;
  throw Error("unknown node role '" + std::string(s) + "' (expected Parameter, Observed or Unobserved)");
}

struct GraphNode {
  std::string name;
  NodeRole role = NodeRole::Observed;
  std::int64_t total_strength = 0;
  friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

/// Why an edge exists: which target's top-K list proposed it, at what rank,
/// and in how many rounds the feature reached that list.
struct EdgeInfo {
  std::int64_t strength = 0;
  NodeId proposer = 0;
  std::uint32_t rank = 0;    // 1-based position in the proposer's list
  std::uint32_t rounds = 0;
  friend bool operator==(const EdgeInfo&, const EdgeInfo&) = default;
};

using EdgeKey = std::pair<NodeId, NodeId>;  // (parent, child)

class NetworkGraph {
 public:
  NodeId add_node(std::string name, NodeRole role = NodeRole::Observed, std::int64_t total = 0) {
    if (find(name)) throw Error("duplicate node '" + name + "'");
    nodes_.push_back({std::move(name), role, total});
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  std::size_t node_count() const { return nodes_.size(); }
  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const GraphNode& node(NodeId v) const { return nodes_.at(v); }
  GraphNode& node(NodeId v) { return nodes_.at(v); }

  std::optional<NodeId> find(std::string_view name) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (nodes_[i].name == name) return static_cast<NodeId>(i);
    return std::nullopt;
  }

  /// Inserts (parent, child); returns false when it is already present.
  bool add_edge(NodeId parent, NodeId child, EdgeInfo info = {}) {
    if (parent >= nodes_.size() || child >= nodes_.size()) throw Error("edge endpoint out of range");
    if (parent == child) throw Error("self-loop on '" + nodes_[parent].name + "'");
    return edges_.emplace(EdgeKey{parent, child}, info).second;
  }
  bool remove_edge(NodeId parent, NodeId child) { return edges_.erase({parent, child}) > 0; }
  bool has_edge(NodeId parent, NodeId child) const { return edges_.count({parent, child}) > 0; }
  const EdgeInfo& edge(NodeId parent, NodeId child) const { return edges_.at({parent, child}); }

  /// Edges ordered by (parent, child).
  const std::map<EdgeKey, EdgeInfo>& edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }

  std::vector<NodeId> parents(NodeId v) const {
    std::vector<NodeId> out;
    for (const auto& [k, e] : edges_)
      if (k.second == v) out.push_back(k.first);
    return out;
  }
  std::vector<NodeId> children(NodeId v) const {
    std::vector<NodeId> out;
    for (auto it = edges_.lower_bound({v, 0}); it != edges_.end() && it->first.first == v; ++it) out.push_back(it->first.second);
    return out;
  }
  std::size_t in_degree(NodeId v) const { return parents(v).size(); }

  friend bool operator==(const NetworkGraph&, const NetworkGraph&) = default;

 private:
  std::vector<GraphNode> nodes_;
  std::map<EdgeKey, EdgeInfo> edges_;
};

/// Depth-first search in ascending node order, children ascending. Returns the
/// first cycle closed by a back edge as a node sequence v0 -> v1 -> ... -> v0
/// (v0 not repeated), or nullopt when the graph is acyclic.
inline std::optional<std::vector<NodeId>> find_cycle(const NetworkGraph& g) {
  const std::size_t n = g.node_count();
  std::vector<std::vector<NodeId>> adj(n);
  for (const auto& [k, e] : g.edges()) adj[k.first].push_back(k.second);
  enum : std::uint8_t { White, Grey, Black };
  std::vector<std::uint8_t> colour(n, White);
  std::vector<NodeId> path;
  std::vector<std::size_t> cursor;

  for (NodeId root = 0; root < n; ++root) {
    if (colour[root] != White) continue;
    path = {root};
    cursor = {0};
    colour[root] = Grey;
    while (!path.empty()) {
      const NodeId v = path.back();
      if (cursor.back() == adj[v].size()) {
        colour[v] = Black;
        path.pop_back();
        cursor.pop_back();
        continue;
      }
      const NodeId w = adj[v][cursor.back()++];
      if (colour[w] == Grey) {
        auto start = std::find(path.begin(), path.end(), w);
        return std::vector<NodeId>(start, path.end());
      }
      if (colour[w] == White) {
        colour[w] = Grey;
        path.push_back(w);
        cursor.push_back(0);
      }
    }
  }
  return std::nullopt;
}

/// Kahn topological order (smallest ready node first), or nullopt on a cycle.
inline std::optional<std::vector<NodeId>> topological_order(const NetworkGraph& g) {
  const std::size_t n = g.node_count();
  std::vector<std::size_t> indeg(n, 0);
  std::vector<std::vector<NodeId>> adj(n);
  for (const auto& [k, e] : g.edges()) {
    adj[k.first].push_back(k.second);
    ++indeg[k.second];
  }
  std::vector<NodeId> ready;
  for (NodeId v = 0; v < n; ++v)
    if (!indeg[v]) ready.push_back(v);
  std::vector<NodeId> order;
  while (!ready.empty()) {
    auto it = std::min_element(ready.begin(), ready.end());
    const NodeId v = *it;
    ready.erase(it);
    order.push_back(v);
    for (NodeId w : adj[v])
      if (--indeg[w] == 0) ready.push_back(w);
  }
  if (order.size() != n) return std::nullopt;
  return order;
}

struct DagCheck {
  bool ok = true;
  std::vector<std::string> cycle;  // witness node names when !ok
};

inline DagCheck validate_dag(const NetworkGraph& g) {
  if (topological_order(g)) return {};
  DagCheck r;
  r.ok = false;
  auto cyc = find_cycle(g);
  if (!cyc) throw std::logic_error("validate_dag: topological sort failed but no cycle found");
  for (NodeId v : *cyc) r.cycle.push_back(g.node(v).name);
  return r;
}

namespace detail {

inline std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

}  // namespace detail

/// Graphviz rendering: Parameter nodes are boxes, Observed nodes ovals,
/// Unobserved nodes grey-filled ovals. Output depends only on the graph.
inline void write_dot(std::ostream& os, const NetworkGraph& g, std::string_view name = "network") {
  os << "digraph " << detail::dot_quote(name) << " {\n";
  os << "  rankdir=TB;\n";
  for (const auto& n : g.nodes()) {
    os << "  " << detail::dot_quote(n.name) << " [";
    switch (n.role) {
      case NodeRole::Parameter: os << "shape=box"; break;
      case NodeRole::Observed: os << "shape=oval"; break;
      case NodeRole::Unobserved: os << "shape=oval, style=filled, fillcolor=lightgrey"; break;
    }
    os << "];\n";
  }
  for (const auto& [k, e] : g.edges())
    os << "  " << detail::dot_quote(g.node(k.first).name) << " -> " << detail::dot_quote(g.node(k.second).name)
       << " [label=\"" << e.strength << "\"];\n";
  os << "}\n";
}

inline std::string to_dot(const NetworkGraph& g, std::string_view name = "network") {
  std::ostringstream os;
  write_dot(os, g, name);
  return os.str();
}

inline nlohmann::json to_json(const NetworkGraph& g) {
  nlohmann::json j;
  j["format"] = "tmbn-graph";
  j["version"] = 1;
  auto& nodes = j["nodes"] = nlohmann::json::array();
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const auto& n = g.node(static_cast<NodeId>(i));
    nodes.push_back({{"id", i}, {"name", n.name}, {"role", to_string(n.role)}, {"total_strength", n.total_strength}});
  }
  auto& edges = j["edges"] = nlohmann::json::array();
  for (const auto& [k, e] : g.edges())
    edges.push_back({{"parent", g.node(k.first).name},
                     {"child", g.node(k.second).name},
                     {"strength", e.strength},
                     {"proposer", g.node(e.proposer).name},
                     {"rank", e.rank},
                     {"rounds", e.rounds}});
  return j;
}

inline NetworkGraph graph_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "tmbn-graph" || j.value("version", 0) != 1) throw Error("not a tmbn-graph v1 document");
  NetworkGraph g;
  for (const auto& n : j.at("nodes"))
    g.add_node(n.at("name").get<std::string>(), parse_role(n.value("role", "Observed")), n.value("total_strength", std::int64_t{0}));
  auto lookup = [&](const std::string& name) {
    auto v = g.find(name);
    if (!v) throw Error("graph document: edge references unknown node '" + name + "'");
    return *v;
  };
  for (const auto& e : j.at("edges")) {
    EdgeInfo info;
    info.strength = e.value("strength", std::int64_t{0});
    info.rank = e.value("rank", 0U);
    info.rounds = e.value("rounds", 0U);
    const NodeId p = lookup(e.at("parent").get<std::string>());
    const NodeId c = lookup(e.at("child").get<std::string>());
    info.proposer = e.contains("proposer") ? lookup(e.at("proposer").get<std::string>()) : c;
    if (!g.add_edge(p, c, info)) throw Error("graph document: duplicate edge");
  }
  return g;
}

}  // namespace tmbn
