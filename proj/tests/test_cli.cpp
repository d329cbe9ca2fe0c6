#include "doctest.h"

#include "lbmgraph/io.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string output;  // stdout and stderr
};

Run run(const std::string& args) {
  const std::string cmd = std::string(LBMGRAPH_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (std::fgets(buf, sizeof(buf), pipe)) r.output += buf;
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("lbmgraph_cli_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

const char* kSmallExperiment = "--k 6 --n 30 --m-min 45 --replicates 3 --lambda-grid 8 --tau-step 0.1";

}  // namespace

TEST_CASE("simulate writes the documented files deterministically") {
  TempDir tmp;
  const std::string args = "simulate --model ar1 --rho 0.5 --k 15 --n 20 --m-min 100 --seed 7 --threads 1 --out ";
  const Run a = run(args + tmp / "a");
  REQUIRE_MESSAGE(a.code == 0, a.output);
  CHECK(lbm::io::list_network_files(tmp / "a").size() == 20);
  for (const char* f : {"blocks.txt", "truth_edges.csv", "covariance.csv", "precision.csv", "metadata.txt",
                        "resolved_config.txt"})
    CHECK(fs::exists(fs::path(tmp / "a") / f));
  CHECK(count_lines(slurp(fs::path(tmp / "a") / "truth_edges.csv")) == 14);
  CHECK(slurp(fs::path(tmp / "a") / "network_001.txt").rfind("225 15\n", 0) == 0);

  // The resolved configuration records the output directory, so it differs.
  REQUIRE(run(args + tmp / "b").code == 0);
  for (const auto& entry : fs::directory_iterator(tmp / "a"))
    if (entry.path().filename() != "resolved_config.txt")
      CHECK(slurp(entry.path()) == slurp(fs::path(tmp / "b") / entry.path().filename()));
}

TEST_CASE("parameter errors exit with code 2") {
  TempDir tmp;
  const Run r = run("simulate --rho 1.5 --out " + tmp / "x");
  CHECK(r.code == 2);
  CHECK(r.output.find("rho") != std::string::npos);
  CHECK(run("simulate --model ar7 --out " + tmp / "x").code == 2);
  CHECK(run("simulate --k abc --out " + tmp / "x").code == 2);
  CHECK(run("simulate --no-such-flag").code == 2);
  CHECK(run("").code == 2);
  CHECK(run("diagnose --k 12 --out " + tmp / "d").code == 2);
  CHECK(run("simulate --k 3").code == 2);  // no --out
  CHECK(run("--help").code == 0);
}

TEST_CASE("estimate, select and tune on simulated networks") {
  TempDir tmp;
  REQUIRE(run("simulate --k 5 --rho 0.7 --n 40 --m-min 45 --seed 3 --out " + tmp / "sim").code == 0);

  const Run est = run("estimate --input " + tmp / "sim" + " --out " + tmp / "est");
  REQUIRE_MESSAGE(est.code == 0, est.output);
  const lbm::EtaPanel panel = lbm::io::read_panel(fs::path(tmp / "est") / "panel.csv");
  CHECK(panel.n() == 40);
  CHECK(panel.K() == 5);
  CHECK(panel.T == doctest::Approx(2.0 * std::log(40.0)));
  CHECK(fs::exists(fs::path(tmp / "est") / "mean.csv"));

  const Run huge = run("select --input " + tmp / "sim" + " --method lasso --lambda 1e6 --out " + tmp / "huge");
  REQUIRE_MESSAGE(huge.code == 0, huge.output);
  CHECK(slurp(fs::path(tmp / "huge") / "edges.csv").empty());

  const std::string panel_arg = " --panel " + (fs::path(tmp / "est") / "panel.csv").string();
  REQUIRE(run("select" + panel_arg + " --method mu --lambda 0.1 --rule OR --out " + tmp / "or").code == 0);
  REQUIRE(run("select" + panel_arg + " --method mu --lambda 0.1 --rule AND --out " + tmp / "and").code == 0);
  const Run mu = run("select" + panel_arg + " --method mu --lambda 0.1 --out " + tmp / "mu");
  CHECK(mu.output.find("mu=0.1") != std::string::npos);
  const auto e_or = lbm::io::read_edges(fs::path(tmp / "or") / "edges.csv");
  const auto e_and = lbm::io::read_edges(fs::path(tmp / "and") / "edges.csv");
  CHECK(e_and.subset_of(e_or));
  CHECK(fs::exists(fs::path(tmp / "or") / "coefficients" / "node_001.csv"));
  CHECK(run("select" + panel_arg + " --method lasso --out " + tmp / "nolambda").code == 2);

  const Run tune = run("tune" + panel_arg + " --method lasso --lambda-grid 10 --tau-step 0.1 --out " + tmp / "tune");
  REQUIRE_MESSAGE(tune.code == 0, tune.output);
  const std::string report = slurp(fs::path(tmp / "tune") / "tuning.csv");
  CHECK(count_lines(report) == 6);
  CHECK(report.find("tau=") != std::string::npos);
  CHECK(report.find(",rule=OR,bic=") != std::string::npos);
}

TEST_CASE("malformed input names the file and line") {
  TempDir tmp;
  REQUIRE(run("simulate --k 2 --n 3 --m-min 3 --out " + tmp / "sim").code == 0);
  std::ofstream(fs::path(tmp / "sim") / "network_002.txt") << "6 2\n1 2\n1 x\n";
  const Run r = run("estimate --input " + tmp / "sim" + " --out " + tmp / "est");
  CHECK(r.code == 1);
  CHECK(r.output.find("network_002.txt:3") != std::string::npos);
}

TEST_CASE("experiment output, thread invariance and config replay") {
  TempDir tmp;
  const std::string base = std::string("experiment ") + kSmallExperiment + " --seed 11 --out ";
  const Run one = run(base + tmp / "t1" + " --threads 1");
  REQUIRE_MESSAGE(one.code == 0, one.output);
  REQUIRE(run(base + tmp / "t3" + " --threads 3").code == 0);
  const std::string csv = slurp(fs::path(tmp / "t1") / "results.csv");
  CHECK(csv == slurp(fs::path(tmp / "t3") / "results.csv"));
  CHECK(count_lines(csv) == 1 + 6);
  std::istringstream lines(csv);
  std::string header, row;
  std::getline(lines, header);
  CHECK(header == lbm::io::kResultsHeader);
  std::getline(lines, row);
  int fields = 0;
  for (char c : row) fields += c == ',';
  CHECK(fields + 1 == 11);

  const Run replay = run("experiment --config " + (fs::path(tmp / "t1") / "resolved_config.txt").string() +
                         " --out " + tmp / "replay");
  REQUIRE_MESSAGE(replay.code == 0, replay.output);
  CHECK(slurp(fs::path(tmp / "replay") / "results.csv") == csv);

  const Run pct = run(base + tmp / "pct" + " --percent --methods lasso --rules OR --progress");
  REQUIRE(pct.code == 0);
  CHECK(pct.output.find("replicate 3/3 done") != std::string::npos);
  CHECK(count_lines(slurp(fs::path(tmp / "pct") / "results.csv")) == 2);
}

TEST_CASE("config file precedence and validation") {
  TempDir tmp;
  std::ofstream(tmp / "cfg.txt") << "seed = 5\n[model]\nK = 4\nrho = 0.2\n[data]\nn = 6\nm_min = 3\n";
  REQUIRE(run("simulate --config " + tmp / "cfg.txt" + " --rho 0.6 --out " + tmp / "a").code == 0);
  const std::string resolved = slurp(fs::path(tmp / "a") / "resolved_config.txt");
  CHECK(resolved.find("rho = 0.6") != std::string::npos);
  CHECK(resolved.find("K = 4") != std::string::npos);
  CHECK(resolved.find("seed = 5") != std::string::npos);
  CHECK(lbm::io::list_network_files(tmp / "a").size() == 6);

  std::ofstream(tmp / "bad.txt") << "[model]\nwidth = 3\n";
  const Run bad = run("simulate --config " + tmp / "bad.txt" + " --out " + tmp / "b");
  CHECK(bad.code == 2);
  CHECK(bad.output.find("model.width") != std::string::npos);
  CHECK(run("simulate --config " + tmp / "missing.txt" + " --out " + tmp / "c").code == 2);
}

TEST_CASE("roc and diagnose outputs") {
  TempDir tmp;
  const Run roc = run("roc --k 6 --n 30 --m-min 45 --replicates 2 --grid-size 30 --methods lasso,dantzig --out " +
                      tmp / "roc");
  REQUIRE_MESSAGE(roc.code == 0, roc.output);
  std::istringstream lines(slurp(fs::path(tmp / "roc") / "roc.csv"));
  std::string line;
  std::getline(lines, line);
  CHECK(line == lbm::io::kRocHeader);
  std::map<std::string, std::vector<double>> fpr;
  while (std::getline(lines, line)) {
    const auto c1 = line.find(','), c2 = line.find(',', c1 + 1), c3 = line.find(',', c2 + 1);
    fpr[line.substr(0, c1)].push_back(std::stod(line.substr(c2 + 1, c3 - c2 - 1)));
  }
  REQUIRE(fpr.size() == 2);
  for (const auto& [method, v] : fpr) {
    CHECK(v.size() <= 31);
    CHECK(std::is_sorted(v.begin(), v.end()));
  }
  CHECK(fs::exists(fs::path(tmp / "roc") / "auc.csv"));

  const Run diag = run("diagnose --k 3 --networks 200 --draws 100 --normality-m-min 10,1000 --conc-replicates 10 --out " +
                       tmp / "diag");
  REQUIRE_MESSAGE(diag.code == 0, diag.output);
  CHECK(count_lines(slurp(fs::path(tmp / "diag") / "normality.csv")) == 1 + 2 * 3);
  CHECK(count_lines(slurp(fs::path(tmp / "diag") / "concentration.csv")) == 2);
  CHECK(count_lines(slurp(fs::path(tmp / "diag") / "sign_check.csv")) == 1 + 3);
}
