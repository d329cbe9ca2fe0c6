#include "lbmgraph/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace lbm::io {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  return in;
}

[[noreturn]] void fail(const fs::path& path, int line, const std::string& what) {
  throw FormatError(path.string() + ":" + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec == std::errc() && ptr == last) return true;
  if (t == "inf" || t == "+inf") {
    out = std::numeric_limits<double>::infinity();
    return true;
  }
  return false;
}

bool parse_int(const std::string& text, long long& out) {
  const std::string t = trim(text);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  return !t.empty() && ec == std::errc() && ptr == t.data() + t.size();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) parts.push_back(cur);
  if (!line.empty() && line.back() == sep) parts.emplace_back();
  return parts;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> parts;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) parts.push_back(tok);
  return parts;
}

}  // namespace

std::string format_number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void write_network(const fs::path& path, const NetworkSample& network, int K) {
  auto out = open_out(path);
  out << network.nodes() << ' ' << K << '\n';
  for (int i = 0; i < network.nodes(); ++i)
    for (int j = i + 1; j < network.nodes(); ++j)
      if (network.edge(i, j)) out << i + 1 << ' ' << j + 1 << '\n';
}

NetworkSample read_network(const fs::path& path, int* K) {
  auto in = open_in(path);
  std::string line;
  int lineno = 0;
  long long N = -1, blocks = -1;
  NetworkSample net;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() != 2) fail(path, lineno, "expected two integers");
    long long a = 0, b = 0;
    if (!parse_int(tok[0], a) || !parse_int(tok[1], b)) fail(path, lineno, "expected two integers");
    if (N < 0) {
      if (a < 1 || b < 1) fail(path, lineno, "header must be 'N K' with positive values");
      N = a;
      blocks = b;
      net = NetworkSample(static_cast<int>(N));
      continue;
    }
    if (a < 1 || b < 1 || a > N || b > N) fail(path, lineno, "node index outside 1..N");
    if (a >= b) fail(path, lineno, "edge must satisfy i < j");
    net.set_edge(static_cast<int>(a - 1), static_cast<int>(b - 1));
  }
  if (N < 0) fail(path, lineno, "missing 'N K' header");
  if (K) *K = static_cast<int>(blocks);
  return net;
}

void write_blocks(const fs::path& path, const BlockPartition& partition) {
  auto out = open_out(path);
  for (int i = 0; i < partition.N; ++i) out << i + 1 << ' ' << partition.labels[i] + 1 << '\n';
}

BlockPartition read_blocks(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  int lineno = 0;
  std::vector<int> labels;
  int K = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    long long node = 0, block = 0;
    if (tok.size() != 2 || !parse_int(tok[0], node) || !parse_int(tok[1], block))
      fail(path, lineno, "expected 'node block'");
    if (node != static_cast<long long>(labels.size()) + 1) fail(path, lineno, "nodes must be listed in order 1..N");
    if (block < 1) fail(path, lineno, "block labels start at 1");
    labels.push_back(static_cast<int>(block - 1));
    K = std::max(K, static_cast<int>(block));
  }
  if (labels.empty()) fail(path, lineno, "no nodes listed");
  try {
    return BlockPartition::from_labels(std::move(labels), K);
  } catch (const ParameterError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_matrix_csv(const fs::path& path, const Matrix& m) {
  auto out = open_out(path);
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_number(m(i, j));
    out << '\n';
  }
}

Matrix read_matrix_csv(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  int lineno = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split(line, ',')) {
      double v = 0.0;
      if (!parse_double(cell, v)) fail(path, lineno, "non-numeric value '" + trim(cell) + "'");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) fail(path, lineno, "inconsistent column count");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(path, lineno, "empty matrix file");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

fs::path panel_meta_path(const fs::path& path) { return fs::path(path.string() + ".meta"); }

void write_panel(const fs::path& path, const EtaPanel& panel) {
  write_matrix_csv(path, panel.H_hat);
  auto meta = open_out(panel_meta_path(path));
  meta << "T=" << format_number(panel.T) << '\n';
}

EtaPanel read_panel(const fs::path& path) {
  EtaPanel panel;
  panel.H_hat = read_matrix_csv(path);
  const fs::path meta_path = panel_meta_path(path);
  auto in = open_in(meta_path);
  std::string line;
  int lineno = 0;
  bool found = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.rfind("T=", 0) == 0) {
      if (!parse_double(t.substr(2), panel.T) || !(panel.T > 0.0)) fail(meta_path, lineno, "invalid truncation level");
      found = true;
    }
  }
  if (!found) fail(meta_path, lineno, "missing 'T=<value>' line");
  if ((panel.H_hat.array().abs() > panel.T * (1.0 + 1e-12)).any())
    throw FormatError(path.string() + ": panel entries exceed the truncation level T");
  return panel;
}

void write_edges(const fs::path& path, const EdgeSet& edges) {
  auto out = open_out(path);
  for (const Edge& e : edges.edges()) out << e.a + 1 << ',' << e.b + 1 << '\n';
}

EdgeSet read_edges(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  int lineno = 0;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto parts = split(line, ',');
    long long a = 0, b = 0;
    if (parts.size() != 2 || !parse_int(parts[0], a) || !parse_int(parts[1], b)) fail(path, lineno, "expected 'a,b'");
    if (a < 1 || b < 1 || a == b) fail(path, lineno, "invalid node pair");
    edges.push_back({static_cast<int>(a - 1), static_cast<int>(b - 1)});
  }
  return EdgeSet(std::move(edges));
}

void write_solution(const fs::path& path, const SelectorSolution& solution) {
  auto out = open_out(path);
  for (int b = 0; b < solution.theta.size(); ++b) {
    if (b == solution.target) continue;
    out << b + 1 << ',' << format_number(solution.theta(b)) << '\n';
  }
}

void write_tuning_report(const fs::path& path, const std::vector<double>& lambdas, double tau, Rule rule, double bic) {
  auto out = open_out(path);
  for (std::size_t a = 0; a < lambdas.size(); ++a) out << a + 1 << ',' << format_number(lambdas[a]) << '\n';
  out << "tau=" << format_number(tau) << ",rule=" << rule_name(rule) << ",bic=" << format_number(bic) << '\n';
}

void write_results(std::ostream& os, const std::vector<ResultRow>& rows, bool percent) {
  const double scale = percent ? 100.0 : 1.0;
  os << kResultsHeader << '\n';
  for (const auto& r : rows) {
    os << r.model << ',' << r.K << ',' << r.n << ',' << method_name(r.method) << ',' << rule_name(r.rule);
    for (double v : {r.total_mean, r.total_se, r.type1_mean, r.type1_se, r.type2_mean, r.type2_se})
      os << ',' << format_number(v * scale);
    os << '\n';
  }
}

void write_roc(std::ostream& os, const std::vector<RocCurve>& curves) {
  os << kRocHeader << '\n';
  for (const auto& c : curves)
    for (const auto& p : c.points)
      os << method_name(c.method) << ',' << format_number(p.lambda) << ',' << format_number(p.fpr) << ','
         << format_number(p.tpr) << '\n';
}

std::vector<fs::path> list_network_files(const fs::path& dir) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) throw std::runtime_error("'" + dir.string() + "' is not a directory");
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.rfind("network_", 0) == 0 && entry.path().extension() == ".txt")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace lbm::io
