#include "doctest.h"

#include "lbmgraph/config.hpp"
#include "lbmgraph/io.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

using namespace lbm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("lbmgraph_io_" + std::to_string(std::random_device{}()) + "_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("format_number round-trips") {
  for (double v : {0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 1e-300, 123456789.125}) CHECK(std::stod(io::format_number(v)) == v);
  CHECK(io::format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(io::format_number(0.5) == "0.5");
}

TEST_CASE("network files") {
  TempDir tmp;
  NetworkSample net(5);
  net.set_edge(0, 4);
  net.set_edge(2, 1);
  io::write_network(tmp.path / "n.txt", net, 2);
  CHECK(read_text(tmp.path / "n.txt") == "5 2\n1 5\n2 3\n");
  int K = 0;
  const NetworkSample back = io::read_network(tmp.path / "n.txt", &K);
  CHECK(K == 2);
  CHECK(back.adjacency() == net.adjacency());

  write_text(tmp.path / "bad.txt", "5 2\n1 5\n3 x\n");
  try {
    io::read_network(tmp.path / "bad.txt");
    FAIL("expected a format error");
  } catch (const io::FormatError& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
  write_text(tmp.path / "range.txt", "3 1\n1 4\n");
  CHECK_THROWS_AS(io::read_network(tmp.path / "range.txt"), io::FormatError);
  write_text(tmp.path / "order.txt", "3 1\n2 1\n");
  CHECK_THROWS_AS(io::read_network(tmp.path / "order.txt"), io::FormatError);
  write_text(tmp.path / "empty.txt", "");
  CHECK_THROWS_AS(io::read_network(tmp.path / "empty.txt"), io::FormatError);
}

TEST_CASE("block files") {
  TempDir tmp;
  const BlockPartition p = make_partition(3, 3);
  io::write_blocks(tmp.path / "b.txt", p);
  const BlockPartition q = io::read_blocks(tmp.path / "b.txt");
  CHECK(q.labels == p.labels);
  CHECK(q.K == 3);
  write_text(tmp.path / "gap.txt", "1 1\n2 3\n");
  CHECK_THROWS_AS(io::read_blocks(tmp.path / "gap.txt"), io::FormatError);
  write_text(tmp.path / "skip.txt", "1 1\n3 1\n");
  CHECK_THROWS_AS(io::read_blocks(tmp.path / "skip.txt"), io::FormatError);
}

TEST_CASE("matrix and panel files") {
  TempDir tmp;
  Matrix m(2, 3);
  m << 0.1, -2, 1.0 / 3.0, 4, 5e-9, 6;
  io::write_matrix_csv(tmp.path / "m.csv", m);
  CHECK(io::read_matrix_csv(tmp.path / "m.csv") == m);

  EtaPanel panel;
  panel.H_hat = m;
  panel.T = 6.0;
  io::write_panel(tmp.path / "p.csv", panel);
  CHECK(read_text(io::panel_meta_path(tmp.path / "p.csv")) == "T=6\n");
  const EtaPanel back = io::read_panel(tmp.path / "p.csv");
  CHECK(back.H_hat == m);
  CHECK(back.T == 6.0);

  write_text(io::panel_meta_path(tmp.path / "p.csv"), "T=2\n");
  CHECK_THROWS_AS(io::read_panel(tmp.path / "p.csv"), io::FormatError);
  write_text(tmp.path / "ragged.csv", "1,2\n3\n");
  CHECK_THROWS_AS(io::read_matrix_csv(tmp.path / "ragged.csv"), io::FormatError);
  write_text(tmp.path / "text.csv", "1,abc\n");
  CHECK_THROWS_AS(io::read_matrix_csv(tmp.path / "text.csv"), io::FormatError);
  CHECK_THROWS(io::read_matrix_csv(tmp.path / "missing.csv"));
}

TEST_CASE("edge, solution and tuning files") {
  TempDir tmp;
  const EdgeSet e(std::vector<Edge>{{2, 0}, {1, 3}});
  io::write_edges(tmp.path / "e.csv", e);
  CHECK(read_text(tmp.path / "e.csv") == "1,3\n2,4\n");
  CHECK(io::read_edges(tmp.path / "e.csv") == e);
  write_text(tmp.path / "self.csv", "2,2\n");
  CHECK_THROWS_AS(io::read_edges(tmp.path / "self.csv"), io::FormatError);

  SelectorSolution s;
  s.target = 1;
  s.theta = Vector(3);
  s.theta << 0.5, 0, -0.25;
  io::write_solution(tmp.path / "s.csv", s);
  CHECK(read_text(tmp.path / "s.csv") == "1,0.5\n3,-0.25\n");

  io::write_tuning_report(tmp.path / "t.csv", {0.1, 0.2}, 0.76, Rule::Or, -12.5);
  CHECK(read_text(tmp.path / "t.csv") == "1,0.1\n2,0.2\ntau=0.76,rule=OR,bic=-12.5\n");
}

TEST_CASE("results and ROC tables") {
  ResultRow r;
  r.model = "ar1(rho=0.7)";
  r.K = 30;
  r.n = 100;
  r.total_mean = 0.0159;
  std::ostringstream frac, pct;
  io::write_results(frac, {r}, false);
  io::write_results(pct, {r}, true);
  CHECK(frac.str() == std::string(io::kResultsHeader) + "\nar1(rho=0.7),30,100,lasso,OR,0.0159,0,0,0,0,0\n");
  CHECK(pct.str().find(",1.59,") != std::string::npos);

  RocCurve c;
  c.points = {{std::numeric_limits<double>::infinity(), 0, 0}, {0, 1, 1}};
  std::ostringstream roc;
  io::write_roc(roc, {c});
  CHECK(roc.str() == "method,lambda,fpr,tpr\nlasso,inf,0,0\nlasso,0,1,1\n");
}

TEST_CASE("network file listing") {
  TempDir tmp;
  write_text(tmp.path / "network_002.txt", "");
  write_text(tmp.path / "network_001.txt", "");
  write_text(tmp.path / "blocks.txt", "");
  const auto files = io::list_network_files(tmp.path);
  REQUIRE(files.size() == 2);
  CHECK(files[0].filename() == "network_001.txt");
  CHECK_THROWS(io::list_network_files(tmp.path / "nope"));
}

TEST_CASE("settings files") {
  const Settings s = Settings::parse("seed = 4\n# comment\n[model]\nkind = ar1\nrho = 0.7  # trailing\n[run]\nmethods = lasso, mu\n");
  CHECK(s.get_int("seed") == 4);
  CHECK(s.get("model.kind") == "ar1");
  CHECK(s.get_double("model.rho") == 0.7);
  CHECK(s.get_list("run.methods") == std::vector<std::string>{"lasso", "mu"});
  CHECK_THROWS_AS(s.get("model.K"), ParameterError);
  CHECK_THROWS_AS(s.get_int("model.kind"), ParameterError);

  // dump is replayable, including top-level keys that sort after a section.
  Settings t = s;
  t.set("zeta", "1");
  t.set("flag", "yes");
  const Settings again = Settings::parse(t.dump());
  CHECK(again.values() == t.values());
  CHECK(again.get_bool("flag"));

  Settings over;
  over.set("model.rho", "0.2");
  t.merge(over);
  CHECK(t.get_double("model.rho") == 0.2);

  Settings known;
  known.set("seed", "");
  known.set("model.kind", "");
  CHECK(s.unknown_keys(known) == std::vector<std::string>{"model.rho", "run.methods"});
  CHECK_THROWS_AS(Settings::parse("[broken\n"), ParameterError);
  CHECK_THROWS_AS(Settings::parse("novalue\n"), ParameterError);
}
