#pragma once

#include "lbmgraph/common.hpp"
#include "lbmgraph/estimation.hpp"
#include "lbmgraph/evaluation.hpp"
#include "lbmgraph/graph.hpp"
#include "lbmgraph/model.hpp"
#include "lbmgraph/selectors.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

// Plain-text file formats. Node and block indices are 1-based on disk and
// 0-based in memory.
namespace lbm::io {

/// Malformed input; the message names the file and line.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal representation.
std::string format_number(double value);

// Network: "N K", then one "i j" line per edge with i < j.
void write_network(const std::filesystem::path& path, const NetworkSample& network, int K);
NetworkSample read_network(const std::filesystem::path& path, int* K = nullptr);

// Blocks: one "node block" line per node.
void write_blocks(const std::filesystem::path& path, const BlockPartition& partition);
BlockPartition read_blocks(const std::filesystem::path& path);

// Comma-separated numeric matrix, no header.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(const std::filesystem::path& path);

// Panel: n x K CSV plus a companion "<path>.meta" holding "T=<value>".
std::filesystem::path panel_meta_path(const std::filesystem::path& path);
void write_panel(const std::filesystem::path& path, const EtaPanel& panel);
/// Reads H_hat and T; counts and pairs are left empty.
EtaPanel read_panel(const std::filesystem::path& path);

// Edge set: "a,b" per line, a < b.
void write_edges(const std::filesystem::path& path, const EdgeSet& edges);
EdgeSet read_edges(const std::filesystem::path& path);

// Selector solution for one target: "node,coefficient" for every node b != a.
void write_solution(const std::filesystem::path& path, const SelectorSolution& solution);

// Tuning report: "a,lambda_a" per node, then "tau=<v>,rule=<AND|OR>,bic=<v>".
void write_tuning_report(const std::filesystem::path& path, const std::vector<double>& lambdas, double tau, Rule rule,
                         double bic);

inline constexpr const char* kResultsHeader =
    "model,K,n,method,rule,total_mean,total_se,type1_mean,type1_se,type2_mean,type2_se";
inline constexpr const char* kRocHeader = "method,lambda,fpr,tpr";

void write_results(std::ostream& os, const std::vector<ResultRow>& rows, bool percent);
void write_roc(std::ostream& os, const std::vector<RocCurve>& curves);

/// Network files of a simulation directory ("network_*.txt"), sorted by name.
std::vector<std::filesystem::path> list_network_files(const std::filesystem::path& dir);

}  // namespace lbm::io
