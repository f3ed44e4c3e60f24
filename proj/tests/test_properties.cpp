#include <gtest/gtest.h>

#include "invariants.hpp"
#include "planted.hpp"

using namespace tmbn;

TEST(Properties, HundredRandomRunsYieldValidDags) {
  int bad = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto v = invariants::random_run(i);
    if (!v.empty()) {
      ++bad;
      ADD_FAILURE() << "run " << i << ": " << v;
    }
  }
  EXPECT_EQ(bad, 0);
}

TEST(Properties, ThermometerRowsArePrefixes) {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto d = static_cast<std::uint32_t>(1 + uniform_below(rng, 8));
    const auto level = static_cast<Level>(uniform_below(rng, d));
    const auto bits = thermometer_encode(level, d);
    ASSERT_EQ(bits.size(), d);
    for (std::uint32_t k = 0; k < d; ++k) EXPECT_EQ(bits[k], k <= level);
  }
}

TEST(Properties, BinarizedRowsDecodeAndNegate) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<DiscreteColumn> cols;
    const auto n = 1 + uniform_below(rng, 40);
    for (int f = 0; f < 4; ++f) {
      DiscreteColumn c;
      c.name = "c" + std::to_string(f);
      c.cardinality = static_cast<std::uint32_t>(1 + uniform_below(rng, 5));
      for (std::uint32_t l = 0; l < c.cardinality; ++l) c.labels.push_back(std::to_string(l));
      for (std::size_t r = 0; r < n; ++r) c.values.push_back(static_cast<Level>(uniform_below(rng, c.cardinality)));
      cols.push_back(c);
    }
    const auto d = binarize(cols);
    const auto L = d.partition.total_literals();
    for (std::size_t r = 0; r < n; ++r) {
      for (std::uint32_t k = 0; k < L; ++k) EXPECT_NE(d.rows.get(r, k), d.rows.get(r, k + L));
      for (FeatureId f = 0; f < 4; ++f) EXPECT_EQ(d.level(r, f), cols[f].values[r]);
    }
  }
}

TEST(Properties, BalancedSamplesAreBalanced) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<DiscreteColumn> cols;
    for (int f = 0; f < 3; ++f) {
      DiscreteColumn c;
      c.name = "c" + std::to_string(f);
      c.cardinality = 3;
      c.labels = {"a", "b", "c"};
      for (int r = 0; r < 90; ++r) c.values.push_back(static_cast<Level>(uniform01(rng) < 0.6 ? 0 : uniform_below(rng, 3)));
      cols.push_back(c);
    }
    const auto ts = balanced_sample(binarize(cols), 1, rng());
    std::vector<int> counts(3, 0);
    for (auto l : ts.labels) ++counts[l];
    EXPECT_EQ(counts[0], counts[1]);
    EXPECT_EQ(counts[1], counts[2]);
  }
}

TEST(Properties, DiscretizedLevelsStayInRangeAndOrdered) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(1 + uniform_below(rng, 60));
    for (auto& x : v) x = std::round(uniform_real(rng, -5, 5) * 2) / 2;
    const auto levels = static_cast<std::uint32_t>(2 + uniform_below(rng, 5));
    const auto c = discretize_continuous("x", v, levels);
    EXPECT_LE(c.cardinality, levels);
    for (std::size_t i = 0; i < v.size(); ++i) {
      EXPECT_LT(c.values[i], c.cardinality);
      for (std::size_t j = 0; j < v.size(); ++j)
        if (v[i] < v[j]) {
          EXPECT_LE(c.values[i], c.values[j]);
        }
    }
  }
}

TEST(Properties, TrainingKeepsStatesAndBudgetsInRange) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    TrainingSet ts;
    ts.class_count = 3;
    ts.input_partition.add(0, "a", 2);
    ts.input_partition.add(1, "b", 2);
    ts.inputs = BitMatrix(0, 8);
    for (int r = 0; r < 60; ++r) {
      std::vector<Word> row(1, 0);
      for (int k = 0; k < 4; ++k) {
        const bool b = uniform_below(rng, 2);
        set_bit(row, k, b);
        set_bit(row, k + 4, !b);
      }
      ts.inputs.push_row(row);
      ts.labels.push_back(static_cast<Level>(uniform_below(rng, 3)));
    }
    TmParams p;
    p.clause_count = 6;
    p.threshold = 4;
    p.specificity = 2.0 + trial;
    p.max_literals = 2;
    p.ta_states = 8;  // small, so saturation is reached
    Machine m(p, 8, 3, rng());
    for (int e = 0; e < 15; ++e) {
      train_epoch(m, ts);
      for (std::uint32_t c = 0; c < 6; ++c) {
        EXPECT_LE(m.included_count(c), 2u);
        for (std::uint32_t k = 0; k < 8; ++k) {
          EXPECT_GE(m.state(c, k), 1);
          EXPECT_LE(m.state(c, k), 8);
        }
        for (std::uint32_t n = 0; n < 3; ++n) {
          EXPECT_GE(m.magnitude(n, c), 0);
          EXPECT_EQ(m.polarity(n, c), c % 2 == 0 ? 1 : -1);
        }
      }
    }
  }
}

TEST(Properties, PipelineIsDeterministic) {
  const auto data = planted::fork(21, 300);
  const std::vector<NodeRole> roles{NodeRole::Parameter, NodeRole::Observed, NodeRole::Unobserved, NodeRole::Observed};
  auto cfg = planted::small_ensemble(2);
  cfg.rounds = 2;
  const auto a = generate_network_detailed(data, roles, cfg, 8);
  const auto b = generate_network_detailed(data, roles, cfg, 8);
  EXPECT_EQ(a.graph, b.graph);
  EXPECT_EQ(to_json(a.table), to_json(b.table));
}

TEST(Properties, ConflictResolutionLeavesNoPairs) {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    NetworkGraph g;
    const auto n = 2 + uniform_below(rng, 7);
    for (std::size_t i = 0; i < n; ++i) g.add_node("v" + std::to_string(i), static_cast<NodeRole>(uniform_below(rng, 3)), rng() % 50);
    for (NodeId u = 0; u < n; ++u)
      for (NodeId v = 0; v < n; ++v)
        if (u != v && uniform01(rng) < 0.4) g.add_edge(u, v, {static_cast<std::int64_t>(uniform_below(rng, 4)), u, 1, 0});
    const auto r = resolve_conflicts(g);
    for (const auto& [k, e] : r.edges()) {
      EXPECT_FALSE(r.has_edge(k.second, k.first));
      EXPECT_NE(r.node(k.second).role, NodeRole::Parameter);
      EXPECT_TRUE(g.has_edge(k.first, k.second));
    }
    // Exactly one direction of every pair between non-Parameter nodes survives.
    for (const auto& [k, e] : g.edges())
      if (g.node(k.first).role != NodeRole::Parameter && g.node(k.second).role != NodeRole::Parameter) {
        EXPECT_TRUE(r.has_edge(k.first, k.second) || r.has_edge(k.second, k.first));
      }
  }
}

TEST(Properties, CptRowsSumToOneAfterEstimation) {
  const auto net = invariants::load_fixture("insurance-like.json");
  for (double alpha : {0.0, 0.5, 1.0, 3.0}) {
    const auto est = estimate_cpts(net.dag(), forward_sample(net, 200, 1), alpha);
    for (const auto& v : est.variables())
      for (std::size_t r = 0; r < v.row_count(); ++r) {
        double s = 0;
        for (double p : v.row(r)) s += p;
        EXPECT_NEAR(s, 1.0, 1e-9);
      }
  }
}
