#pragma once

// Label-matched similarity between two directed graphs, in [0, 1].
//
//   node(v)  = 0 if v is in only one graph, else
//              (J(parents_1, parents_2) + J(children_1, children_2)) / 2
//              with Jaccard J(A, B) = |A n B| / |A u B| and J(empty, empty) = 1.
//   edge     = mean over unordered adjacent pairs in either graph of
//              1 (same direction in both), 1/2 (opposite), 0 (only one);
//              1 when neither graph has an edge.
//   combined = (mean node score over the label union + edge) / 2, except a
//              graph without nodes scores 0 against a graph with nodes.

#include <map>
#include <set>
#include <string>
#include <utility>

#include <json.hpp>

#include "tmbn/bayesnet.hpp"
#include "tmbn/graph.hpp"

namespace tmbn {

struct LabeledGraph {
  std::set<std::string> nodes;
  std::set<std::pair<std::string, std::string>> edges;  // (parent, child)

  friend bool operator==(const LabeledGraph&, const LabeledGraph&) = default;
};

inline LabeledGraph labeled(const NetworkGraph& g) {
  LabeledGraph out;
  for (const auto& n : g.nodes()) out.nodes.insert(n.name);
  for (const auto& [k, e] : g.edges()) out.edges.emplace(g.node(k.first).name, g.node(k.second).name);
  return out;
}

inline LabeledGraph labeled(const BayesNet& net) { return labeled(net.dag()); }

struct SimilarityReport {
  std::map<std::string, double> node_similarity;
  double node_mean = 0.0;
  double edge_similarity = 0.0;
  double combined = 0.0;
};

namespace detail {

inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& x : a) inter += b.count(x);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

inline std::set<std::string> neighbours(const LabeledGraph& g, const std::string& v, bool want_parents) {
  std::set<std::string> out;
  for (const auto& [p, c] : g.edges) {
    if (want_parents && c == v) out.insert(p);
    if (!want_parents && p == v) out.insert(c);
  }
  return out;
}

}  // namespace detail

inline std::map<std::string, double> node_similarity(const LabeledGraph& a, const LabeledGraph& b) {
  std::map<std::string, double> out;
  std::set<std::string> all = a.nodes;
  all.insert(b.nodes.begin(), b.nodes.end());
  for (const auto& v : all) {
    if (!a.nodes.count(v) || !b.nodes.count(v)) {
      out[v] = 0.0;
      continue;
    }
    out[v] = 0.5 * (detail::jaccard(detail::neighbours(a, v, true), detail::neighbours(b, v, true)) +
                    detail::jaccard(detail::neighbours(a, v, false), detail::neighbours(b, v, false)));
  }
  return out;
}

inline double edge_similarity(const LabeledGraph& a, const LabeledGraph& b) {
  // Unordered pair -> (orientation bits in a, orientation bits in b); bit 0
  // is first -> second, bit 1 is second -> first.
  std::map<std::pair<std::string, std::string>, std::pair<int, int>> pairs;
  auto note = [&](const LabeledGraph& g, bool is_a) {
    for (const auto& [p, c] : g.edges) {
      const bool fwd = p < c;
      auto& slot = pairs[fwd ? std::make_pair(p, c) : std::make_pair(c, p)];
      (is_a ? slot.first : slot.second) |= fwd ? 1 : 2;
    }
  };
  note(a, true);
  note(b, false);
  if (pairs.empty()) return 1.0;
  double total = 0.0;
  for (const auto& [k, o] : pairs) {
    if (!o.first || !o.second) continue;
    total += (o.first & o.second) ? 1.0 : 0.5;
  }
  return total / static_cast<double>(pairs.size());
}

inline SimilarityReport compare_graphs(const LabeledGraph& a, const LabeledGraph& b) {
  SimilarityReport r;
  r.node_similarity = node_similarity(a, b);
  r.edge_similarity = edge_similarity(a, b);
  if (a.nodes.empty() != b.nodes.empty()) {
    r.combined = 0.0;
    return r;
  }
  if (!r.node_similarity.empty()) {
    double sum = 0.0;
    for (const auto& [v, s] : r.node_similarity) sum += s;
    r.node_mean = sum / static_cast<double>(r.node_similarity.size());
  } else {
    r.node_mean = 1.0;
  }
  r.combined = 0.5 * (r.node_mean + r.edge_similarity);
  return r;
}

inline double similarity_score(const LabeledGraph& a, const LabeledGraph& b) { return compare_graphs(a, b).combined; }

inline nlohmann::json to_json(const SimilarityReport& r) {
  nlohmann::json j;
  j["format"] = "tmbn-similarity";
  j["version"] = 1;
  j["node_similarity"] = r.node_similarity;
  j["node_mean"] = r.node_mean;
  j["edge_similarity"] = r.edge_similarity;
  j["combined"] = r.combined;
  return j;
}

}  // namespace tmbn
