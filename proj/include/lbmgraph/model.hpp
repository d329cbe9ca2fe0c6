#pragma once

#include "lbmgraph/common.hpp"
#include "lbmgraph/graph.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

// Latent variable block model: within-block log-odds are jointly Gaussian
// with mean X*beta and covariance Sigma; edges are conditionally independent
// Bernoulli draws given the block connection probabilities.
namespace lbm {

enum class CovarianceKind { AR1, AR4, RandomPrecision, Explicit };

std::string_view covariance_kind_name(CovarianceKind kind);

struct CovarianceSpec {
  CovarianceKind kind = CovarianceKind::AR1;
  int K = 2;
  double rho = 0.5;            // AR1
  double alpha = 0.1;          // RandomPrecision edge probability
  std::uint64_t seed = 0;      // RandomPrecision draw
  Matrix explicit_sigma;       // Explicit

  static CovarianceSpec ar1(int K, double rho);
  static CovarianceSpec ar4(int K);
  static CovarianceSpec random_precision(int K, double alpha, std::uint64_t seed);
  static CovarianceSpec from_matrix(Matrix sigma);
};

/// Precision matrix and its off-diagonal support.
struct TrueGraph {
  Matrix precision;
  EdgeSet edges;
};

struct CovarianceModel {
  Matrix sigma;
  TrueGraph graph;
  int redraws = 0;  // RandomPrecision only
};

inline constexpr double kEdgeZeroTolerance = 1e-8;

CovarianceModel build_covariance(const CovarianceSpec& spec);

/// Edges (a<b) with |d_ab| > tol.
EdgeSet support_of(const Matrix& precision, double tol = kEdgeZeroTolerance);

/// pi_ab = -d_ab / sqrt(d_aa d_bb), unit diagonal.
Matrix partial_correlations(const Matrix& sigma);

struct BlockPartition {
  int K = 0;
  int N = 0;
  std::vector<int> labels;          // node -> block, 0-based
  std::vector<int> sizes;           // |A_k|
  std::vector<long long> pairs;     // m_k = |A_k|(|A_k|-1)/2
  long long m_min = 0;

  /// Builds from explicit labels; every block in [0, K) must be nonempty.
  static BlockPartition from_labels(std::vector<int> labels, int K);
};

/// Equal blocks of the smallest size s with s(s-1)/2 >= m_min_target.
/// If `nodes_override` is given it must be a multiple of K whose block size
/// reaches the target.
BlockPartition make_partition(int K, long long m_min_target,
                              std::optional<int> nodes_override = std::nullopt);

struct OffDiagonalSpec {
  enum class Kind { Constant, LogitGaussian };
  Kind kind = Kind::Constant;
  double probability = 0.3;
  double logit_mean = 0.0;
  double logit_sd = 1.0;
};

struct LatentBlockModel {
  Matrix design;     // K x L
  Vector beta;       // L
  Matrix sigma;      // K x K
  BlockPartition partition;
  OffDiagonalSpec off_diagonal;

  Vector mean() const { return design * beta; }
  int K() const { return static_cast<int>(sigma.rows()); }

  /// Default design: X = column of ones, beta = 0.
  static LatentBlockModel centered(Matrix sigma, BlockPartition partition,
                                   OffDiagonalSpec off_diagonal = {});
};

/// One symmetric binary network with zero diagonal, stored as a packed
/// strict upper triangle.
class NetworkSample {
 public:
  NetworkSample() = default;
  explicit NetworkSample(int N);

  int nodes() const { return n_; }
  bool edge(int i, int j) const;
  void set_edge(int i, int j, bool value = true);
  long long edge_count() const;
  /// Dense N x N adjacency (for tests and export).
  std::vector<std::uint8_t> adjacency() const;

 private:
  std::size_t index(int i, int j) const;
  int n_ = 0;
  std::vector<std::uint8_t> upper_;
};

/// n x K latent log-odds, rows iid N(mean, Sigma) via Cholesky factor.
Matrix sample_eta_panel(const LatentBlockModel& model, int n, std::uint64_t seed);

/// Lower Cholesky factor; throws NumericalError if Sigma is not PD.
Matrix cholesky_factor(const Matrix& sigma);

/// Network for one latent row. Row t of sample_networks uses
/// derive_seed(seed, t), so the two entry points agree.
NetworkSample sample_network(const Eigen::Ref<const Vector>& eta, const BlockPartition& partition,
                             const OffDiagonalSpec& off_diagonal, std::uint64_t seed);

std::vector<NetworkSample> sample_networks(const Matrix& H, const BlockPartition& partition,
                                           const OffDiagonalSpec& off_diagonal,
                                           std::uint64_t seed);

/// Within-block edge counts drawn directly as Binomial(m_k, logistic(eta_k)).
/// Same distribution as counting edges of sample_networks, without
/// materializing the networks. Used by the Monte Carlo diagnostics.
Eigen::MatrixXi sample_block_counts(const Matrix& H, const BlockPartition& partition,
                                    std::uint64_t seed);

double logistic(double x);

}  // namespace lbm
