#include "lbmgraph/estimation.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

namespace lbm {

double default_truncation(int n) { return 2.0 * std::log(static_cast<double>(std::max(n, 10))); }

double estimate_eta(long long S, long long m, double T) {
  if (m <= 0) throw ParameterError("degenerate block: no possible within-block edges");
  if (S < 0 || S > m) throw ParameterError("edge count outside [0, m]");
  if (!(T > 0.0)) throw ParameterError("truncation level T must be positive");
  const double lo = 1.0 / (1.0 + std::exp(T));
  const double hi = 1.0 / (1.0 + std::exp(-T));
  const double p = std::clamp(static_cast<double>(S) / static_cast<double>(m), lo, hi);
  const double eta = std::log(p / (1.0 - p));
  // Rounding in exp/log can overshoot the clamp by an ulp.
  return std::clamp(eta, -T, T);
}

std::vector<long long> count_within_edges(const NetworkSample& network, const BlockPartition& partition) {
  if (network.nodes() != partition.N)
    throw ParameterError("network has " + std::to_string(network.nodes()) + " nodes but partition labels " +
                         std::to_string(partition.N));
  std::vector<long long> S(partition.K, 0);
  const auto& z = partition.labels;
  for (int i = 0; i < partition.N; ++i)
    for (int j = i + 1; j < partition.N; ++j)
      if (z[i] == z[j] && network.edge(i, j)) ++S[z[i]];
  return S;
}

Vector estimate_eta_row(std::span<const long long> S, std::span<const long long> m, double T) {
  if (S.size() != m.size()) throw ParameterError("count and pair vectors differ in length");
  Vector row(static_cast<Eigen::Index>(S.size()));
  for (std::size_t k = 0; k < S.size(); ++k) row(static_cast<Eigen::Index>(k)) = estimate_eta(S[k], m[k], T);
  return row;
}

EtaPanel panel_from_counts(const Eigen::MatrixXi& counts, std::vector<long long> pairs, double T) {
  if (counts.cols() != static_cast<Eigen::Index>(pairs.size()))
    throw ParameterError("count matrix columns must equal the number of blocks");
  EtaPanel panel;
  panel.T = T;
  panel.counts = counts;
  panel.H_hat.resize(counts.rows(), counts.cols());
  for (Eigen::Index t = 0; t < counts.rows(); ++t)
    for (Eigen::Index k = 0; k < counts.cols(); ++k)
      panel.H_hat(t, k) = estimate_eta(counts(t, k), pairs[static_cast<std::size_t>(k)], T);
  panel.pairs = std::move(pairs);
  return panel;
}

EtaPanel assemble_panel(const std::vector<NetworkSample>& networks, const BlockPartition& partition, double T) {
  Eigen::MatrixXi counts(static_cast<Eigen::Index>(networks.size()), partition.K);
  for (std::size_t t = 0; t < networks.size(); ++t) {
    const auto S = count_within_edges(networks[t], partition);
    for (int k = 0; k < partition.K; ++k) counts(static_cast<Eigen::Index>(t), k) = static_cast<int>(S[k]);
  }
  return panel_from_counts(counts, partition.pairs, T);
}

MeanEstimate estimate_mean_and_beta(const EtaPanel& panel, const Matrix& design) {
  if (panel.n() < 1) throw ParameterError("panel has no rows");
  if (design.rows() != panel.K()) throw ParameterError("design matrix rows must equal K");
  MeanEstimate est;
  est.mu_hat = panel.H_hat.colwise().mean().transpose();
  Eigen::JacobiSVD<Matrix> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-12);
  est.beta_hat = svd.solve(est.mu_hat);
  est.rank = static_cast<int>(svd.rank());
  est.rank_deficient = est.rank < std::min(design.rows(), design.cols());
  return est;
}

Matrix center_panel(const EtaPanel& panel, const Vector& mu) {
  if (mu.size() != panel.K()) throw ParameterError("mean vector length must equal K");
  return panel.H_hat.rowwise() - mu.transpose();
}

}  // namespace lbm
