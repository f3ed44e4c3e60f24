#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "tmbn/data.hpp"

using namespace tmbn;

namespace {

std::vector<Level> levels_of(const DiscreteColumn& c) { return c.values; }

DiscreteColumn column(std::string name, std::vector<Level> values, std::uint32_t card) {
  DiscreteColumn c;
  c.name = std::move(name);
  c.values = std::move(values);
  c.cardinality = card;
  for (std::uint32_t i = 0; i < card; ++i) c.labels.push_back(std::to_string(i));
  return c;
}

}  // namespace

TEST(Csv, QuotedFieldsAndCrlf) {
  auto recs = csv::parse("a,b\r\n\"x,1\",\"he said \"\"hi\"\"\"\r\n\r\nlast,\n");
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_EQ(recs[1].fields[0], "x,1");
  EXPECT_EQ(recs[1].fields[1], "he said \"hi\"");
  EXPECT_EQ(recs[2].fields[1], "");
  EXPECT_EQ(recs[2].line, 4u);
}

TEST(Csv, UnterminatedQuoteIsPositioned) {
  try {
    csv::parse("a\n\"open\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(LoadCsv, HundredRows) {
  std::string text = "x,y,z\n";
  for (int i = 0; i < 100; ++i) text += std::to_string(i) + ",a" + std::to_string(i % 3) + "," + std::to_string(i * 0.5) + "\n";
  auto ds = parse_csv(text);
  EXPECT_EQ(ds.row_count, 100u);
  EXPECT_EQ(ds.columns[0].kind, ColumnKind::Numeric);
  EXPECT_EQ(ds.columns[1].kind, ColumnKind::Categorical);
  EXPECT_EQ(ds.columns[2].kind, ColumnKind::Numeric);
}

TEST(LoadCsv, HeaderOnly) {
  auto ds = parse_csv("a,b,c\n");
  EXPECT_EQ(ds.row_count, 0u);
  EXPECT_EQ(ds.column_names.size(), 3u);
}

TEST(LoadCsv, RaggedRowNamesTheRow) {
  try {
    parse_csv("a,b,c\n1,2,3\n1,2\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
  }
}

TEST(LoadCsv, EmptyInputAndMissingCellsAndDuplicates) {
  EXPECT_THROW(parse_csv(""), Error);
  EXPECT_THROW(parse_csv("a,b\n1,\n"), Error);
  EXPECT_THROW(parse_csv("a,a\n1,2\n"), Error);
}

TEST(LoadCsv, HintsOverrideDetection) {
  auto ds = parse_csv("code\n01\n02\n", {{"code", ColumnKind::Categorical}});
  EXPECT_EQ(ds.columns[0].kind, ColumnKind::Categorical);
  EXPECT_EQ(ds.columns[0].text[0], "01");
}

TEST(Discretize, OneValuePerBin) {
  std::vector<double> v{1, 2, 3, 4};
  auto c = discretize_continuous("x", v, 4);
  EXPECT_EQ(levels_of(c), (std::vector<Level>{0, 1, 2, 3}));
  EXPECT_EQ(c.cardinality, 4u);
}

TEST(Discretize, ConstantColumnCollapses) {
  std::vector<double> v{5, 5, 5, 5};
  auto c = discretize_continuous("x", v, 4);
  EXPECT_EQ(levels_of(c), (std::vector<Level>{0, 0, 0, 0}));
  EXPECT_EQ(c.cardinality, 1u);
  EXPECT_TRUE(c.degenerate());
}

TEST(Discretize, UniformQuartilesMatchSortOracle) {
  Rng rng(11);
  std::vector<double> v(1000);
  for (auto& x : v) x = uniform01(rng);
  auto c = discretize_continuous("u", v, 4);
  // Oracle: the i-th smallest value belongs to quartile floor(4 i / n).
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<int> counts(4, 0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    EXPECT_EQ(c.values[order[i]], static_cast<Level>(4 * i / v.size()));
    ++counts[c.values[order[i]]];
  }
  for (int n : counts) EXPECT_LE(std::abs(n - 250), 1);
}

TEST(Discretize, TiesShareALevel) {
  std::vector<double> v{1, 1, 1, 2, 3, 3, 4, 4};
  auto c = discretize_continuous("t", v, 4);
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j)
      if (v[i] == v[j]) {
        EXPECT_EQ(c.values[i], c.values[j]);
      }
}

TEST(RankCategorical, LeastFrequentIsZero) {
  std::vector<std::string> v{"a", "b", "b"};
  auto c = rank_categorical("c", v);
  EXPECT_EQ(levels_of(c), (std::vector<Level>{0, 1, 1}));
  EXPECT_EQ(c.labels, (std::vector<std::string>{"a", "b"}));
}

TEST(RankCategorical, SingleValueAndTies) {
  std::vector<std::string> one{"q", "q"};
  EXPECT_EQ(rank_categorical("c", one).cardinality, 1u);
  std::vector<std::string> tie{"y", "x"};
  auto c = rank_categorical("c", tie);
  EXPECT_EQ(levels_of(c), (std::vector<Level>{1, 0}));
}

TEST(Thermometer, WorkedExamples) {
  EXPECT_EQ(thermometer_encode(0, 3), (std::vector<std::uint8_t>{1, 0, 0}));
  EXPECT_EQ(thermometer_encode(1, 3), (std::vector<std::uint8_t>{1, 1, 0}));
  EXPECT_EQ(thermometer_encode(2, 3), (std::vector<std::uint8_t>{1, 1, 1}));
  EXPECT_THROW(thermometer_encode(3, 3), std::out_of_range);
}

TEST(Binarize, WidthAndPartition) {
  std::vector<DiscreteColumn> cols{column("a", {0, 1, 2}, 3), column("b", {1, 0, 1}, 2)};
  auto d = binarize(cols);
  EXPECT_EQ(d.partition.total_literals(), 5u);
  EXPECT_EQ(d.rows.cols(), 10u);
  EXPECT_EQ(d.partition.blocks()[1].begin, 3u);
  for (std::size_t r = 0; r < 3; ++r) {
    EXPECT_EQ(d.level(r, 0), cols[0].values[r]);
    EXPECT_EQ(d.level(r, 1), cols[1].values[r]);
  }
}

TEST(Binarize, EmptyRowSet) {
  std::vector<DiscreteColumn> cols{column("a", {}, 3), column("b", {}, 2)};
  auto d = binarize(cols);
  EXPECT_EQ(d.row_count(), 0u);
  EXPECT_EQ(d.partition.width(), 10u);
}

TEST(BalancedSample, UndersamplesToMinority) {
  std::vector<Level> t(100, 0), x(100, 0);
  for (int i = 80; i < 100; ++i) t[i] = 1;
  for (int i = 0; i < 100; ++i) x[i] = i % 3;
  std::vector<DiscreteColumn> cols{column("t", t, 2), column("x", x, 3)};
  auto d = binarize(cols);
  auto ts = balanced_sample(d, 0, 5);
  EXPECT_EQ(ts.labels.size(), 40u);
  EXPECT_EQ(std::count(ts.labels.begin(), ts.labels.end(), 0u), 20);
  // Target block gone; x keeps its two informative literals plus negations.
  ASSERT_EQ(ts.input_partition.blocks().size(), 1u);
  EXPECT_EQ(ts.input_partition.blocks()[0].feature, 1u);
  EXPECT_EQ(ts.input_partition.total_literals(), 2u);
  EXPECT_EQ(ts.inputs.cols(), 4u);
}

TEST(BalancedSample, BalancedInputKeepsAllRows) {
  std::vector<Level> t(100, 0), x(100, 1);
  for (int i = 50; i < 100; ++i) t[i] = 1;
  std::vector<DiscreteColumn> cols{column("t", t, 2), column("x", x, 2)};
  auto ts = balanced_sample(binarize(cols), 0, 1);
  EXPECT_EQ(ts.labels.size(), 100u);
}

TEST(BalancedSample, EmptyClassIsNamed) {
  std::vector<DiscreteColumn> cols{column("t", std::vector<Level>(10, 0), 2), column("x", std::vector<Level>(10, 0), 2)};
  try {
    balanced_sample(binarize(cols), 0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("empty class 1"), std::string::npos) << e.what();
  }
}

TEST(BalancedSample, InputsAreThePlainAndNegatedUpperBits) {
  std::vector<DiscreteColumn> cols{column("t", {0, 1, 0, 1}, 2), column("x", {0, 1, 2, 2}, 3)};
  auto ts = balanced_sample(binarize(cols), 0, 3);
  ASSERT_EQ(ts.inputs.cols(), 4u);
  std::multiset<std::pair<Level, Level>> seen, expected{{0, 0}, {1, 1}, {0, 2}, {1, 2}};
  for (std::size_t r = 0; r < ts.labels.size(); ++r) {
    auto row = ts.inputs.row(r);
    // Thermometer bits 1 and 2 of x: a prefix of ones encoding level - 0.
    EXPECT_FALSE(test_bit(row, 1) && !test_bit(row, 0));
    for (std::uint32_t k = 0; k < 2; ++k) EXPECT_NE(test_bit(row, k), test_bit(row, k + 2));
    seen.emplace(ts.labels[r], static_cast<Level>(test_bit(row, 0) + test_bit(row, 1)));
  }
  EXPECT_EQ(seen, expected);
}

TEST(BalancedSample, DeterministicUnderSeed) {
  std::vector<Level> t(60), x(60);
  for (int i = 0; i < 60; ++i) {
    t[i] = i % 3 == 0;
    x[i] = i % 4;
  }
  std::vector<DiscreteColumn> cols{column("t", t, 2), column("x", x, 4)};
  auto d = binarize(cols);
  auto a = balanced_sample(d, 0, 17), b = balanced_sample(d, 0, 17), c = balanced_sample(d, 0, 18);
  EXPECT_EQ(a.inputs, b.inputs);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_FALSE(a.inputs == c.inputs && a.labels == c.labels);
}

TEST(BinarizedJson, RoundTrip) {
  Rng rng(3);
  std::vector<Level> a(37), b(37);
  for (auto& v : a) v = static_cast<Level>(uniform_below(rng, 4));
  for (auto& v : b) v = static_cast<Level>(uniform_below(rng, 2));
  std::vector<DiscreteColumn> cols{column("a", a, 4), column("b", b, 2)};
  auto d = binarize(cols);
  auto back = binarized_from_json(nlohmann::json::parse(to_json(d).dump()));
  EXPECT_EQ(back.partition, d.partition);
  EXPECT_EQ(back.rows, d.rows);
}

TEST(Base64, KnownVectors) {
  const std::string s = "foobar";
  std::vector<std::uint8_t> bytes(s.begin(), s.end());
  EXPECT_EQ(base64::encode(bytes), "Zm9vYmFy");
  std::vector<std::uint8_t> two{'f', 'o'};
  EXPECT_EQ(base64::encode(two), "Zm8=");
  EXPECT_EQ(base64::decode("Zm8="), two);
}
