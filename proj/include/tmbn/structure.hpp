#pragma once

// From per-target top-feature lists to a DAG: propose edges in role order,
// settle anti-parallel pairs by direction strength, then break remaining
// cycles at their weakest edge.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tmbn/data.hpp"
#include "tmbn/graph.hpp"
#include "tmbn/strength.hpp"

namespace tmbn {

/// One edge-level decision, in the order it was taken.
struct EdgeDecision {
  enum class Action { Propose, Duplicate, RemoveIntoParameter, RemoveAntiParallel, RemoveCycle };
  Action action = Action::Propose;
  NodeId parent = 0;
  NodeId child = 0;
  std::int64_t strength = 0;
  NodeId proposer = 0;
  std::uint32_t rank = 0;
  std::vector<NodeId> context;  // the opposing edge (2 ids) or the cycle
};

inline const char* to_string(EdgeDecision::Action a) {
  switch (a) {
    case EdgeDecision::Action::Propose: return "propose";
    case EdgeDecision::Action::Duplicate: return "duplicate";
    case EdgeDecision::Action::RemoveIntoParameter: return "remove_into_parameter";
    case EdgeDecision::Action::RemoveAntiParallel: return "remove_anti_parallel";
    case EdgeDecision::Action::RemoveCycle: return "remove_cycle";
  }
  return "?";
}

using DecisionLog = std::vector<EdgeDecision>;

/// Draft graph from the top-feature table. Targets are visited Parameters
/// first, then Observed, then Unobserved (ascending id within a role); each
/// list is walked from its strongest entry. A top feature f of target t
/// becomes the parent f -> t, except that a Parameter target becomes the
/// parent t -> f. Edge u -> v is annotated with u's aggregate strength from
/// v's target runs.
inline NetworkGraph propose_edges(const TopFeatureTable& table, const std::vector<NodeRole>& roles, DecisionLog* log = nullptr) {
  if (roles.size() != table.rows.size()) throw Error("propose_edges: one role per feature is required");
  NetworkGraph g;
  for (const auto& row : table.rows) g.add_node(row.name, roles[row.node], row.total);

  auto direction_strength = [&](NodeId parent, NodeId child) -> std::int64_t {
    const auto& r = table.rows.at(child);
    return r.skipped ? 0 : r.aggregate.at(parent);
  };

  for (NodeRole pass : {NodeRole::Parameter, NodeRole::Observed, NodeRole::Unobserved}) {
    for (const auto& row : table.rows) {
      if (roles[row.node] != pass || row.skipped) continue;
      for (std::size_t i = 0; i < row.top.size(); ++i) {
        const NodeId f = row.top[i].first;
        const NodeId t = row.node;
        const NodeId parent = pass == NodeRole::Parameter ? t : f;
        const NodeId child = pass == NodeRole::Parameter ? f : t;
        EdgeInfo info;
        info.strength = direction_strength(parent, child);
        info.proposer = t;
        info.rank = static_cast<std::uint32_t>(i + 1);
        auto rc = row.aggregate.top_counts.find(f);
        info.rounds = rc == row.aggregate.top_counts.end() ? 0 : rc->second;
        const bool added = g.add_edge(parent, child, info);
        if (log)
          log->push_back({added ? EdgeDecision::Action::Propose : EdgeDecision::Action::Duplicate, parent, child, info.strength, t,
                          info.rank, {}});
      }
    }
  }
  return g;
}

/// Deletes every edge into a Parameter node, then for each anti-parallel pair
/// keeps the direction with the higher strength (tie: the source with the
/// higher node total, then the lower source id).
inline NetworkGraph resolve_conflicts(NetworkGraph g, DecisionLog* log = nullptr) {
  std::vector<EdgeKey> doomed;
  for (const auto& [k, e] : g.edges())
    if (g.node(k.second).role == NodeRole::Parameter) doomed.push_back(k);
  for (const auto& k : doomed) {
    if (log) {
      const auto& e = g.edge(k.first, k.second);
      log->push_back({EdgeDecision::Action::RemoveIntoParameter, k.first, k.second, e.strength, e.proposer, e.rank, {}});
    }
    g.remove_edge(k.first, k.second);
  }

  std::vector<EdgeKey> pairs;
  for (const auto& [k, e] : g.edges())
    if (k.first < k.second && g.has_edge(k.second, k.first)) pairs.push_back(k);
  for (const auto& [u, v] : pairs) {
    const auto& uv = g.edge(u, v);
    const auto& vu = g.edge(v, u);
    bool keep_uv;
    if (uv.strength != vu.strength)
      keep_uv = uv.strength > vu.strength;
    else if (g.node(u).total_strength != g.node(v).total_strength)
      keep_uv = g.node(u).total_strength > g.node(v).total_strength;
    else
      keep_uv = u < v;
    const NodeId lp = keep_uv ? v : u;
    const NodeId lc = keep_uv ? u : v;
    if (log) {
      const auto& e = g.edge(lp, lc);
      log->push_back({EdgeDecision::Action::RemoveAntiParallel, lp, lc, e.strength, e.proposer, e.rank, {lc, lp}});
    }
    g.remove_edge(lp, lc);
  }
  return g;
}

/// Repeatedly finds a cycle by depth-first search and deletes its weakest
/// edge (tie: smallest (parent, child)) until the graph is acyclic.
inline NetworkGraph remove_cycles(NetworkGraph g, DecisionLog* log = nullptr) {
  while (auto cyc = find_cycle(g)) {
    const auto& c = *cyc;
    std::optional<EdgeKey> weakest;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const EdgeKey k{c[i], c[(i + 1) % c.size()]};
      if (!weakest) {
        weakest = k;
        continue;
      }
      const auto s = g.edge(k.first, k.second).strength;
      const auto ws = g.edge(weakest->first, weakest->second).strength;
      if (s < ws || (s == ws && k < *weakest)) weakest = k;
    }
    if (log) {
      const auto& e = g.edge(weakest->first, weakest->second);
      log->push_back({EdgeDecision::Action::RemoveCycle, weakest->first, weakest->second, e.strength, e.proposer, e.rank, c});
    }
    g.remove_edge(weakest->first, weakest->second);
  }
  return g;
}

struct NetworkResult {
  TopFeatureTable table;
  NetworkGraph draft;
  NetworkGraph graph;
  DecisionLog log;
};

/// Full pipeline: top-feature table, proposals, conflict resolution and
/// cycle removal. Feature ids are positions in `data.partition`; `roles` has
/// one entry per feature.
inline NetworkResult generate_network_detailed(const BinarizedDataset& data, const std::vector<NodeRole>& roles,
                                               const EnsembleConfig& config, std::uint64_t seed) {
  if (roles.size() != data.feature_count()) throw Error("generate_network: one role per feature is required");
  NetworkResult r;
  r.table = build_top_feature_table(data, config, seed);
  r.draft = propose_edges(r.table, roles, &r.log);
  r.graph = remove_cycles(resolve_conflicts(r.draft, &r.log), &r.log);
  return r;
}

inline NetworkGraph generate_network(const BinarizedDataset& data, const std::vector<NodeRole>& roles, const EnsembleConfig& config,
                                     std::uint64_t seed) {
  return generate_network_detailed(data, roles, config, seed).graph;
}

/// Re-applies a decision log to an empty graph over the same nodes.
inline NetworkGraph replay(const NetworkGraph& nodes_from, const DecisionLog& log) {
  NetworkGraph g;
  for (const auto& n : nodes_from.nodes()) g.add_node(n.name, n.role, n.total_strength);
  for (const auto& d : log) {
    switch (d.action) {
      case EdgeDecision::Action::Propose:
        g.add_edge(d.parent, d.child, {d.strength, d.proposer, d.rank, 0});
        break;
      case EdgeDecision::Action::Duplicate:
        break;
      default:
        if (!g.remove_edge(d.parent, d.child)) throw Error("replay: removal of an absent edge");
    }
  }
  return g;
}

/// Line-delimited JSON provenance: one record per top-feature row, one per
/// edge decision, and a closing summary.
inline void write_provenance(std::ostream& os, const NetworkResult& r) {
  const auto name = [&](NodeId v) { return r.draft.node(v).name; };
  for (const auto& row : r.table.rows) {
    nlohmann::json j{{"event", "top_features"}, {"node", row.name}, {"skipped", row.skipped}, {"total_strength", row.total}};
    auto& top = j["top"] = nlohmann::json::array();
    for (const auto& [f, s] : row.top) top.push_back({{"feature", name(f)}, {"strength", s}});
    auto& all = j["strengths"] = nlohmann::json::object();
    for (const auto& [f, s] : row.aggregate.scores) all[name(f)] = s;
    os << j.dump() << '\n';
  }
  for (const auto& w : r.table.warnings) os << nlohmann::json{{"event", "warning"}, {"message", w}}.dump() << '\n';
  for (const auto& d : r.log) {
    nlohmann::json j{{"event", to_string(d.action)}, {"parent", name(d.parent)}, {"child", name(d.child)},
                     {"strength", d.strength}, {"proposer", name(d.proposer)}, {"rank", d.rank}};
    if (!d.context.empty()) {
      auto& ctx = j[d.action == EdgeDecision::Action::RemoveCycle ? "cycle" : "kept"] = nlohmann::json::array();
      for (NodeId v : d.context) ctx.push_back(name(v));
    }
    os << j.dump() << '\n';
  }
  os << nlohmann::json{{"event", "final"}, {"nodes", r.graph.node_count()}, {"edges", r.graph.edge_count()}}.dump() << '\n';
}

/// Rebuilds a decision log from provenance lines written by write_provenance.
inline DecisionLog read_provenance(std::istream& is, const NetworkGraph& nodes_from) {
  DecisionLog log;
  auto id = [&](const nlohmann::json& v) {
    auto n = nodes_from.find(v.get<std::string>());
    if (!n) throw Error("provenance references unknown node");
    return *n;
  };
  for (std::string line; std::getline(is, line);) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    const auto ev = j.at("event").get<std::string>();
    EdgeDecision d;
    if (ev == "propose")
      d.action = EdgeDecision::Action::Propose;
    else if (ev == "duplicate")
      d.action = EdgeDecision::Action::Duplicate;
    else if (ev == "remove_into_parameter")
      d.action = EdgeDecision::Action::RemoveIntoParameter;
    else if (ev == "remove_anti_parallel")
      d.action = EdgeDecision::Action::RemoveAntiParallel;
    else if (ev == "remove_cycle")
      d.action = EdgeDecision::Action::RemoveCycle;
    else
      continue;
    d.parent = id(j.at("parent"));
    d.child = id(j.at("child"));
    d.strength = j.at("strength").get<std::int64_t>();
    d.proposer = id(j.at("proposer"));
    d.rank = j.at("rank").get<std::uint32_t>();
    log.push_back(std::move(d));
  }
  return log;
}

}  // namespace tmbn
