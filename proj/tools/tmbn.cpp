// tmbn: command-line front end.
//
// Exit codes: 0 success, 1 internal failure, 2 usage or input error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tmbn/experiment.hpp"

namespace {

using namespace tmbn;

struct InputError : Error {
  using Error::Error;
};

std::string slurp(const std::string& path, const char* what) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError(std::string(what) + " not found: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Writes to `path`, or stdout for "-" / empty.
template <typename F>
void emit(const std::string& path, F&& body) {
  if (path.empty() || path == "-") {
    body(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path);
  body(f);
}

// A structure from a graph JSON, a network JSON or a BIF file.
NetworkGraph load_structure(const std::string& path) {
  const std::string text = slurp(path, "graph");
  if (std::filesystem::path(path).extension() == ".bif") return parse_bif(text).dag();
  const auto j = nlohmann::json::parse(text);
  const auto fmt = j.value("format", "");
  if (fmt == "tmbn-network") return network_from_json(j).dag();
  return graph_from_json(j);
}

BayesNet load_net(const std::string& path) {
  if (!std::filesystem::exists(path)) throw InputError("network not found: " + path);
  return load_network(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian-network structure learning with weighted coalesced Tsetlin machines"};
  app.require_subcommand(1);

  // sample
  auto* sample = app.add_subcommand("sample", "Draw ancestral samples from a network (CSV of outcome labels)");
  std::string s_net, s_out;
  std::size_t s_n = 5000;
  std::uint64_t s_seed = 0;
  sample->add_option("--net", s_net, "Network JSON or .bif file")->required();
  sample->add_option("-n,--rows", s_n, "Number of rows")->check(CLI::PositiveNumber);
  sample->add_option("--seed", s_seed, "Random seed")->required();
  sample->add_option("-o,--out", s_out, "Output CSV (default stdout)");

  // learn
  auto* learn = app.add_subcommand("learn", "Learn a DAG from a CSV table");
  std::string l_csv, l_roles, l_config, l_out;
  std::uint64_t l_seed = 0;
  std::optional<std::uint32_t> l_rounds, l_topk, l_epochs, l_levels, l_threads;
  learn->add_option("--csv", l_csv, "Input table")->required();
  learn->add_option("--roles", l_roles, "Roles file (column,role)")->required();
  learn->add_option("--config", l_config, "Key-value config with model lines");
  learn->add_option("--seed", l_seed, "Random seed")->required();
  learn->add_option("-o,--out", l_out, "Output prefix: writes PREFIX.json, PREFIX.dot, PREFIX.provenance.jsonl, PREFIX.top.csv")->required();
  learn->add_option("--rounds", l_rounds, "Rounds per target");
  learn->add_option("--top-k", l_topk, "Features kept per round");
  learn->add_option("--epochs", l_epochs, "Epochs per machine");
  learn->add_option("--levels", l_levels, "Bins for numeric columns");
  learn->add_option("--threads", l_threads, "Worker threads");

  // compare
  auto* compare = app.add_subcommand("compare", "Similarity of two structures (graph JSON, network JSON or .bif)");
  std::string c_a, c_b, c_out;
  compare->add_option("first", c_a)->required();
  compare->add_option("second", c_b)->required();
  compare->add_option("-o,--out", c_out, "Report JSON (default stdout)");

  // eval
  auto* eval = app.add_subcommand("eval", "Run the sampling / learning / scoring experiment");
  std::string e_config, e_out;
  std::uint64_t e_seed = 0;
  bool e_quiet = false;
  eval->add_option("--config", e_config, "Experiment config")->required();
  eval->add_option("--seed", e_seed, "Random seed")->required();
  eval->add_option("-o,--out", e_out, "Results CSV (default stdout)");
  eval->add_flag("-q,--quiet", e_quiet, "No per-generation progress on stderr");

  // discretize
  auto* disc = app.add_subcommand("discretize", "Discretize a CSV table into level indices");
  std::string d_csv, d_out, d_report;
  std::uint32_t d_levels = 4;
  disc->add_option("--csv", d_csv, "Input table")->required();
  disc->add_option("--levels", d_levels, "Bins for numeric columns")->check(CLI::Range(2U, 1000U));
  disc->add_option("-o,--out", d_out, "Discretized CSV (default stdout)");
  disc->add_option("--report", d_report, "Bin-edge and label report (JSON)");

  // estimate-cpts
  auto* est = app.add_subcommand("estimate-cpts", "Fit CPTs for a structure from a table");
  std::string t_graph, t_csv, t_out;
  double t_alpha = 1.0;
  std::uint32_t t_levels = 4;
  est->add_option("--graph", t_graph, "Structure (graph JSON, network JSON or .bif)")->required();
  est->add_option("--csv", t_csv, "Data table")->required();
  est->add_option("--alpha", t_alpha, "Additive smoothing")->check(CLI::NonNegativeNumber);
  est->add_option("--levels", t_levels, "Bins for numeric columns")->check(CLI::Range(2U, 1000U));
  est->add_option("-o,--out", t_out, "Network JSON (default stdout)");

  // export-dot
  auto* dot = app.add_subcommand("export-dot", "Render a structure as Graphviz DOT");
  std::string x_graph, x_out;
  dot->add_option("--graph", x_graph, "Structure (graph JSON, network JSON or .bif)")->required();
  dot->add_option("-o,--out", x_out, "DOT file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*sample) {
      const auto net = load_net(s_net);
      const auto table = forward_sample(net, s_n, s_seed);
      emit(s_out, [&](std::ostream& os) { write_csv(os, table); });
    } else if (*learn) {
      const auto t0 = std::chrono::steady_clock::now();
      ExperimentConfig cfg;
      if (!l_config.empty()) cfg = parse_experiment(slurp(l_config, "config"), std::filesystem::path(l_config).parent_path());
      if (l_rounds) cfg.rounds = *l_rounds;
      if (l_topk) cfg.top_k = *l_topk;
      if (l_epochs) cfg.epochs = *l_epochs;
      if (l_levels) cfg.levels = *l_levels;
      if (l_threads) cfg.threads = *l_threads;
      const auto raw = parse_csv(slurp(l_csv, "table"));
      const auto roles = parse_roles(slurp(l_roles, "roles file"), raw.column_names);
      const auto out = learn_structure(raw, roles, cfg, l_seed);
      const auto& r = out.result;
      emit(l_out + ".json", [&](std::ostream& os) { os << to_json(r.graph).dump(1) << '\n'; });
      emit(l_out + ".dot", [&](std::ostream& os) { write_dot(os, r.graph); });
      emit(l_out + ".provenance.jsonl", [&](std::ostream& os) { write_provenance(os, r); });
      emit(l_out + ".top.csv", [&](std::ostream& os) { write_csv(os, r.table); });
      for (const auto& w : r.table.warnings) std::cerr << "warning: " << w << '\n';
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::cerr << "learned " << r.graph.node_count() << " nodes, " << r.graph.edge_count() << " edges with "
                << out.ensemble.members.size() << " members in " << secs << " s\n";
    } else if (*compare) {
      const auto report = compare_graphs(labeled(load_structure(c_a)), labeled(load_structure(c_b)));
      emit(c_out, [&](std::ostream& os) { os << to_json(report).dump(1) << '\n'; });
    } else if (*eval) {
      const auto t0 = std::chrono::steady_clock::now();
      auto cfg = parse_experiment(slurp(e_config, "config"), std::filesystem::path(e_config).parent_path());
      cfg.seed = e_seed;
      const auto net = load_net(cfg.network);
      const auto result = run_eval(cfg, net, e_quiet ? nullptr : &std::cerr);
      emit(e_out, [&](std::ostream& os) { write_csv(os, result); });
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::cerr << "eval finished in " << secs << " s\n";
    } else if (*disc) {
      const auto raw = parse_csv(slurp(d_csv, "table"));
      const auto cols = discretize(raw, d_levels);
      emit(d_out, [&](std::ostream& os) {
        csv::write_row(os, raw.column_names);
        std::vector<std::string> cells(cols.size());
        for (std::size_t r = 0; r < raw.row_count; ++r) {
          for (std::size_t c = 0; c < cols.size(); ++c) cells[c] = std::to_string(cols[c].values[r]);
          csv::write_row(os, cells);
        }
      });
      if (!d_report.empty()) {
        nlohmann::json rep = nlohmann::json::array();
        for (std::size_t c = 0; c < cols.size(); ++c)
          rep.push_back({{"column", cols[c].name},
                         {"kind", raw.columns[c].kind == ColumnKind::Numeric ? "numeric" : "categorical"},
                         {"cardinality", cols[c].cardinality},
                         {"degenerate", cols[c].degenerate()},
                         {"labels", cols[c].labels},
                         {"edges", cols[c].edges}});
        emit(d_report, [&](std::ostream& os) { os << rep.dump(1) << '\n'; });
      }
    } else if (*est) {
      const auto dag = load_structure(t_graph);
      const auto raw = parse_csv(slurp(t_csv, "table"));
      const auto cols = discretize(raw, t_levels);
      const auto net = estimate_cpts(dag, to_table(cols), t_alpha);
      emit(t_out, [&](std::ostream& os) { os << to_json(net).dump(1) << '\n'; });
    } else if (*dot) {
      const auto g = load_structure(x_graph);
      emit(x_out, [&](std::ostream& os) { write_dot(os, g); });
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
