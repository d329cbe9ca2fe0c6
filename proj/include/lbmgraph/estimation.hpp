#pragma once

#include "lbmgraph/common.hpp"
#include "lbmgraph/model.hpp"

#include <span>
#include <vector>

namespace lbm {

/// n x K matrix of truncated within-block log-odds estimates.
struct EtaPanel {
  Matrix H_hat;                 // n x K, every |entry| <= T
  double T = 0.0;
  Eigen::MatrixXi counts;       // S, n x K
  std::vector<long long> pairs; // m_k

  int n() const { return static_cast<int>(H_hat.rows()); }
  int K() const { return static_cast<int>(H_hat.cols()); }
};

struct MeanEstimate {
  Vector mu_hat;
  Vector beta_hat;
  int rank = 0;
  bool rank_deficient = false;
};

/// Default truncation level 2*log(max(n, 10)).
double default_truncation(int n);

/// Truncated log-odds of S successes out of m: clamp S/m to
/// [1/(1+e^T), 1/(1+e^-T)] and take the logit, so the result lies in [-T, T].
double estimate_eta(long long S, long long m, double T);

std::vector<long long> count_within_edges(const NetworkSample& network, const BlockPartition& partition);

Vector estimate_eta_row(std::span<const long long> S, std::span<const long long> m, double T);

EtaPanel assemble_panel(const std::vector<NetworkSample>& networks, const BlockPartition& partition, double T);

/// Panel from precomputed within-block counts (rows = networks).
EtaPanel panel_from_counts(const Eigen::MatrixXi& counts, std::vector<long long> pairs, double T);

/// Column means of the panel and beta_hat = pinv(X) * mu_hat, with singular
/// values below 1e-12 * sigma_max treated as zero.
MeanEstimate estimate_mean_and_beta(const EtaPanel& panel, const Matrix& design);

/// Subtracts mu from every row.
Matrix center_panel(const EtaPanel& panel, const Vector& mu);

}  // namespace lbm
