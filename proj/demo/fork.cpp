// Learns a planted fork: A drives B and C through 10% noise, D is unrelated.
// Prints the top-feature table and the learned DAG in DOT form.
//
//   demo_fork [seed]

#include <cstdlib>
#include <iostream>

#include "tmbn/structure.hpp"

using namespace tmbn;

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
  Rng rng(seed);
  const std::size_t n = 1000;
  auto flip = [&](Level v) { return uniform01(rng) < 0.1 ? 1 - v : v; };

  std::vector<DiscreteColumn> cols(4);
  const char* names[] = {"A", "B", "C", "D"};
  for (std::size_t i = 0; i < cols.size(); ++i) {
    cols[i].name = names[i];
    cols[i].cardinality = 2;
    cols[i].labels = {"0", "1"};
  }
  for (std::size_t r = 0; r < n; ++r) {
    const Level a = static_cast<Level>(uniform_below(rng, 2));
    cols[0].values.push_back(a);
    cols[1].values.push_back(flip(a));
    cols[2].values.push_back(flip(a));
    cols[3].values.push_back(static_cast<Level>(uniform_below(rng, 2)));
  }

  const auto data = binarize(cols);
  const std::vector<NodeRole> roles{NodeRole::Parameter, NodeRole::Observed, NodeRole::Observed, NodeRole::Observed};
  EnsembleConfig cfg;
  TmParams p;
  p.clause_count = 20;
  p.threshold = 10;
  p.specificity = 1.5;
  p.max_literals = 4;
  p.epochs = 5;
  cfg.members = {p};
  cfg.rounds = 10;
  cfg.top_k = 1;

  const auto result = generate_network_detailed(data, roles, cfg, seed);
  write_csv(std::cout, result.table);
  std::cout << '\n';
  write_dot(std::cout, result.graph, "fork");
}
