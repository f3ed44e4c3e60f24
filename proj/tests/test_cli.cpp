#include <gtest/gtest.h>

#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tmbn/experiment.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = TMBN_CLI;
const std::string kFixtures = TMBN_FIXTURES;

struct Outcome {
  int code;
  std::string err;
};

std::string read(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("tmbn_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  Outcome run(const std::string& args) {
    const auto err = dir / "stderr.txt";
    const int st = std::system((kCli + " " + args + " 2> " + err.string() + " > " + (dir / "stdout.txt").string()).c_str());
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, read(err)};
  }
  std::string out() const { return read(dir / "stdout.txt"); }
  std::string at(const std::string& name) const { return (dir / name).string(); }

  fs::path dir;
};

std::size_t lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_F(Cli, SampleWritesHeaderAndRows) {
  ASSERT_EQ(run("sample --net " + kFixtures + "/asia-like.json -n 5000 --seed 7 -o " + at("a.csv")).code, 0);
  const auto text = read(at("a.csv"));
  EXPECT_EQ(lines(text), 5001u);
  const auto table = tmbn::parse_csv(text);
  EXPECT_EQ(table.row_count, 5000u);
  EXPECT_EQ(table.column_names.size(), tmbn::load_network(kFixtures + "/asia-like.json").size());
}

TEST_F(Cli, SampleIsByteIdenticalUnderSeed) {
  ASSERT_EQ(run("sample --net " + kFixtures + "/child-like.json -n 300 --seed 11 -o " + at("a.csv")).code, 0);
  ASSERT_EQ(run("sample --net " + kFixtures + "/child-like.json -n 300 --seed 11 -o " + at("b.csv")).code, 0);
  ASSERT_EQ(run("sample --net " + kFixtures + "/child-like.json -n 300 --seed 12 -o " + at("c.csv")).code, 0);
  EXPECT_EQ(read(at("a.csv")), read(at("b.csv")));
  EXPECT_NE(read(at("a.csv")), read(at("c.csv")));
}

TEST_F(Cli, MissingNetworkIsAnInputError) {
  const auto r = run("sample --net " + at("nope.json") + " -n 10 --seed 1");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("network not found"), std::string::npos) << r.err;
}

TEST_F(Cli, MissingSeedIsAUsageError) {
  EXPECT_EQ(run("sample --net " + kFixtures + "/asia-like.json -n 10").code, 2);
  EXPECT_EQ(run("learn --csv x --roles y -o z").code, 2);
  EXPECT_EQ(run("").code, 2);
}

TEST_F(Cli, LearnNamesColumnsWithoutRoles) {
  std::ofstream(at("t.csv")) << "a,b,c\n1,x,0\n2,y,1\n3,x,0\n";
  std::ofstream(at("r.csv")) << "column,role\na,Observed\n";
  const auto r = run("learn --csv " + at("t.csv") + " --roles " + at("r.csv") + " --seed 1 -o " + at("g"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("b, c"), std::string::npos) << r.err;
}

TEST_F(Cli, LearnIsReproducible) {
  ASSERT_EQ(run("sample --net " + kFixtures + "/asia-like.json -n 400 --seed 2 -o " + at("s.csv")).code, 0);
  {
    std::ofstream roles(at("r.csv"));
    roles << "column,role\n";
    const auto net = tmbn::load_network(kFixtures + "/asia-like.json");
    for (const auto& v : net.variables())
      roles << v.name << ',' << tmbn::to_string(v.role) << '\n';
  }
  const std::string common = "learn --csv " + at("s.csv") + " --roles " + at("r.csv") + " --seed 5 --rounds 2 --epochs 1 -o ";
  const auto first = run(common + at("a"));
  ASSERT_EQ(first.code, 0) << first.err;
  ASSERT_EQ(run(common + at("b") + " --threads 2").code, 0);
  for (const char* ext : {".json", ".dot", ".provenance.jsonl", ".top.csv"}) {
    EXPECT_FALSE(read(at(std::string("a") + ext)).empty()) << ext;
    EXPECT_EQ(read(at(std::string("a") + ext)), read(at(std::string("b") + ext))) << ext;
  }
  // The learned graph is loadable and acyclic.
  const auto g = tmbn::graph_from_json(nlohmann::json::parse(read(at("a.json"))));
  EXPECT_NO_THROW(tmbn::validate_dag(g));
}

TEST_F(Cli, CompareEndpoints) {
  const auto net = kFixtures + "/insurance-like.json";
  ASSERT_EQ(run("compare " + net + " " + net).code, 0);
  EXPECT_EQ(nlohmann::json::parse(out()).at("combined").get<double>(), 1.0);
  std::ofstream(at("empty.json")) << R"({"format":"tmbn-graph","version":1,"nodes":[],"edges":[]})";
  ASSERT_EQ(run("compare " + at("empty.json") + " " + net).code, 0);
  EXPECT_EQ(nlohmann::json::parse(out()).at("combined").get<double>(), 0.0);
}

TEST_F(Cli, CompareMatchesTheLibrary) {
  const auto a = kFixtures + "/asia-like.json", b = kFixtures + "/child-like.json";
  ASSERT_EQ(run("compare " + a + " " + b + " -o " + at("r.json")).code, 0);
  const double lib = tmbn::similarity_score(tmbn::labeled(tmbn::load_network(a)), tmbn::labeled(tmbn::load_network(b)));
  EXPECT_DOUBLE_EQ(nlohmann::json::parse(read(at("r.json"))).at("combined").get<double>(), lib);
}

TEST_F(Cli, EvalSingleGeneration) {
  std::ofstream(at("e.cfg")) << "network = " << kFixtures << "/asia-like.json\nsamples = 300\nmodel = 2L 5 1.5 4\n"
                             << "generations = 1\nrounds = 1\nepochs = 1\ntop_k = 1\n";
  ASSERT_EQ(run("eval --config " + at("e.cfg") + " --seed 4 -q -o " + at("a.csv")).code, 0);
  ASSERT_EQ(run("eval --config " + at("e.cfg") + " --seed 4 -q -o " + at("b.csv")).code, 0);
  const auto text = read(at("a.csv"));
  EXPECT_EQ(text, read(at("b.csv")));
  EXPECT_EQ(lines(text), 2u);
}

TEST_F(Cli, EvalWithoutSeedFails) {
  EXPECT_EQ(run("eval --config " + kFixtures + "/asia-eval.cfg").code, 2);
}

TEST_F(Cli, DiscretizeEstimateAndDotAreDeterministic) {
  const auto csv = kFixtures + "/supply-chain.csv";
  ASSERT_EQ(run("discretize --csv " + csv + " --levels 4 -o " + at("d1.csv") + " --report " + at("r1.json")).code, 0);
  ASSERT_EQ(run("discretize --csv " + csv + " --levels 4 -o " + at("d2.csv") + " --report " + at("r2.json")).code, 0);
  EXPECT_EQ(read(at("d1.csv")), read(at("d2.csv")));
  EXPECT_EQ(read(at("r1.json")), read(at("r2.json")));
  EXPECT_EQ(lines(read(at("d1.csv"))), 101u);

  const auto net = kFixtures + "/asia-like.json";
  ASSERT_EQ(run("sample --net " + net + " -n 500 --seed 3 -o " + at("s.csv")).code, 0);
  ASSERT_EQ(run("estimate-cpts --graph " + net + " --csv " + at("s.csv") + " -o " + at("n1.json")).code, 0);
  ASSERT_EQ(run("estimate-cpts --graph " + net + " --csv " + at("s.csv") + " -o " + at("n2.json")).code, 0);
  EXPECT_EQ(read(at("n1.json")), read(at("n2.json")));
  EXPECT_NO_THROW(tmbn::network_from_json(nlohmann::json::parse(read(at("n1.json")))));

  ASSERT_EQ(run("export-dot --graph " + net + " -o " + at("a.dot")).code, 0);
  ASSERT_EQ(run("export-dot --graph " + net + " -o " + at("b.dot")).code, 0);
  EXPECT_EQ(read(at("a.dot")), read(at("b.dot")));
  EXPECT_EQ(read(at("a.dot")).rfind("digraph", 0), 0u);
}

TEST_F(Cli, MalformedInputsExitTwo) {
  std::ofstream(at("bad.json")) << "{not json";
  EXPECT_EQ(run("export-dot --graph " + at("bad.json")).code, 2);
  std::ofstream(at("bad.csv")) << "a,b\n1,\"2\n";
  EXPECT_EQ(run("discretize --csv " + at("bad.csv")).code, 2);
}
