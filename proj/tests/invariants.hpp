#pragma once

// Randomized end-to-end runs checked against the DAG guarantees: acyclic,
// Parameter nodes have no parents, no anti-parallel pair survives, and every
// edge traces back to a top-feature relation.

#include <fstream>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "tmbn/experiment.hpp"

namespace invariants {

using namespace tmbn;

inline BayesNet load_fixture(const std::string& name) {
  std::ifstream f(std::string(TMBN_FIXTURES) + "/" + name);
  std::stringstream ss;
  ss << f.rdbuf();
  return network_from_json(nlohmann::json::parse(ss.str()));
}

/// Empty when the graph satisfies every guarantee, otherwise a description.
inline std::string violations(const NetworkResult& r, const std::vector<NodeRole>& roles) {
  const auto& g = r.graph;
  std::string out;
  if (!oracle::acyclic(g)) out += "cycle; ";
  for (NodeId v = 0; v < g.node_count(); ++v)
    if (roles[v] == NodeRole::Parameter && g.in_degree(v) != 0) out += "parent of Parameter " + g.node(v).name + "; ";
  for (const auto& [k, e] : g.edges()) {
    if (k.first == k.second) out += "self-loop; ";
    if (g.has_edge(k.second, k.first)) out += "anti-parallel " + g.node(k.first).name + "/" + g.node(k.second).name + "; ";
    auto listed = [&](NodeId t, NodeId f) {
      for (const auto& [x, s] : r.table.rows[t].top)
        if (x == f) return true;
      return false;
    };
    if (!listed(k.second, k.first) && !listed(k.first, k.second)) out += "edge without a top-feature relation; ";
  }
  return out;
}

/// Run i of the randomized suite: fixture, sample size, roles and TM
/// parameters all drawn from the run's seed.
inline std::string random_run(std::uint64_t i) {
  static const BayesNet nets[] = {load_fixture("asia-like.json"), load_fixture("child-like.json"),
                                  load_fixture("insurance-like.json")};
  Rng rng(derive_seed(0x696e76ULL, {i}));
  const BayesNet& net = nets[i % 3];
  const std::size_t rows = 150 + uniform_below(rng, 250);
  const auto table = forward_sample(net, rows, rng());
  const auto data = binarize(discretize(to_raw(table), 4));
  std::vector<NodeRole> roles;
  for (std::size_t v = 0; v < net.size(); ++v) {
    // Mostly the fixture's roles, with some reassigned at random.
    const auto draw = uniform_below(rng, 6);
    roles.push_back(draw < 3 ? net.variable(static_cast<NodeId>(v)).role : static_cast<NodeRole>(draw % 3));
  }
  EnsembleConfig cfg;
  const auto L = std::max<std::uint32_t>(data.partition.total_literals(), 4);
  const auto members = 1 + uniform_below(rng, 2);
  for (std::uint64_t m = 0; m < members; ++m) {
    auto p = random_params(L, rng(), 1);
    p.clause_count = std::min<std::uint32_t>(p.clause_count, 40);
    p.threshold = std::min(p.threshold, p.clause_count);
    cfg.members.push_back(p);
  }
  cfg.rounds = 1 + static_cast<std::uint32_t>(uniform_below(rng, 2));
  cfg.top_k = 1 + static_cast<std::uint32_t>(uniform_below(rng, 4));
  const auto r = generate_network_detailed(data, roles, cfg, rng());
  return violations(r, roles);
}

}  // namespace invariants
