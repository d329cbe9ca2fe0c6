#include "lbmgraph/model.hpp"

#include "lbmgraph/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cassert>
#include <cmath>
#include <random>
#include <string>

namespace lbm {

std::string_view covariance_kind_name(CovarianceKind kind) {
  switch (kind) {
    case CovarianceKind::AR1: return "ar1";
    case CovarianceKind::AR4: return "ar4";
    case CovarianceKind::RandomPrecision: return "random";
    case CovarianceKind::Explicit: return "explicit";
  }
  return "unknown";
}

CovarianceSpec CovarianceSpec::ar1(int K, double rho) {
  CovarianceSpec s;
  s.kind = CovarianceKind::AR1;
  s.K = K;
  s.rho = rho;
  return s;
}

CovarianceSpec CovarianceSpec::ar4(int K) {
  CovarianceSpec s;
  s.kind = CovarianceKind::AR4;
  s.K = K;
  return s;
}

CovarianceSpec CovarianceSpec::random_precision(int K, double alpha, std::uint64_t seed) {
  CovarianceSpec s;
  s.kind = CovarianceKind::RandomPrecision;
  s.K = K;
  s.alpha = alpha;
  s.seed = seed;
  return s;
}

CovarianceSpec CovarianceSpec::from_matrix(Matrix sigma) {
  CovarianceSpec s;
  s.kind = CovarianceKind::Explicit;
  s.K = static_cast<int>(sigma.rows());
  s.explicit_sigma = std::move(sigma);
  return s;
}

EdgeSet support_of(const Matrix& precision, double tol) {
  std::vector<Edge> edges;
  for (int a = 0; a < precision.rows(); ++a)
    for (int b = a + 1; b < precision.cols(); ++b)
      if (std::fabs(precision(a, b)) > tol) edges.push_back({a, b});
  return EdgeSet(std::move(edges));
}

Matrix cholesky_factor(const Matrix& sigma) {
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance matrix is not positive definite");
  return llt.matrixL();
}

namespace {

Matrix inverse_spd(const Matrix& m, const char* what) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success)
    throw NumericalError(std::string(what) + " is not positive definite");
  Matrix inv = llt.solve(Matrix::Identity(m.rows(), m.cols()));
  return 0.5 * (inv + inv.transpose());
}

CovarianceModel ar1_model(int K, double rho) {
  if (!(rho > -1.0 && rho < 1.0)) throw ParameterError("AR1 rho must lie in (-1, 1)");
  CovarianceModel out;
  out.sigma.resize(K, K);
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) out.sigma(i, j) = std::pow(rho, std::abs(i - j));

  // Analytic tridiagonal inverse.
  const double scale = 1.0 / (1.0 - rho * rho);
  Matrix d = Matrix::Zero(K, K);
  for (int i = 0; i < K; ++i) {
    const bool end = (i == 0 || i == K - 1);
    d(i, i) = scale * (end ? 1.0 : 1.0 + rho * rho);
    if (i + 1 < K) d(i, i + 1) = d(i + 1, i) = -rho * scale;
  }
  std::vector<Edge> edges;
  if (rho != 0.0)
    for (int i = 0; i + 1 < K; ++i) edges.push_back({i, i + 1});
  out.graph.precision = std::move(d);
  out.graph.edges = EdgeSet(std::move(edges));
  return out;
}

CovarianceModel ar4_model(int K) {
  static constexpr double kBand[5] = {1.0, 0.4, 0.2, 0.2, 0.1};
  Matrix d = Matrix::Zero(K, K);
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) {
      const int lag = std::abs(i - j);
      if (lag <= 4) d(i, j) = kBand[lag];
    }
  CovarianceModel out;
  // The band symbol 1 + 0.8cos w + 0.4cos 2w + 0.4cos 3w + 0.2cos 4w is
  // bounded away from zero, so every finite section is PD.
  Eigen::LLT<Matrix> llt(d);
  assert(llt.info() == Eigen::Success);
  out.sigma = inverse_spd(d, "AR4 precision");
  out.graph.edges = support_of(d);
  out.graph.precision = std::move(d);
  return out;
}

CovarianceModel random_precision_model(int K, double alpha, std::uint64_t seed) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ParameterError("random precision alpha must lie in [0, 1]");
  constexpr int kMaxRedraws = 100;
  for (int attempt = 0; attempt <= kMaxRedraws; ++attempt) {
    Rng rng(derive_seed(seed, {stream::kCovariance, static_cast<std::uint64_t>(attempt)}));
    std::bernoulli_distribution coin(alpha);
    Matrix b = Matrix::Zero(K, K);
    for (int i = 0; i < K; ++i)
      for (int j = i + 1; j < K; ++j)
        if (coin(rng)) b(i, j) = b(j, i) = 0.5;

    Eigen::SelfAdjointEigenSolver<Matrix> eig(b, Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues().minCoeff();
    const double lmax = eig.eigenvalues().maxCoeff();
    // (lmax + delta) / (lmin + delta) = K
    const double delta = (lmax - K * lmin) / (K - 1);
    if (delta + lmin <= 1e-12 * std::max(1.0, std::fabs(lmax))) continue;

    Matrix d = b + delta * Matrix::Identity(K, K);
    Matrix sigma = inverse_spd(d, "random precision");
    // Diagonal congruence to unit-variance Sigma; zeros of D are untouched.
    Vector sd = sigma.diagonal().cwiseSqrt();
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < K; ++j) {
        sigma(i, j) /= sd(i) * sd(j);
        d(i, j) *= sd(i) * sd(j);
      }
    for (int i = 0; i < K; ++i) sigma(i, i) = 1.0;

    CovarianceModel out;
    out.sigma = std::move(sigma);
    out.graph.edges = support_of(b, 0.0);
    out.graph.precision = std::move(d);
    out.redraws = attempt;
    return out;
  }
  throw NumericalError("random precision model: no positive definite draw after 100 redraws (alpha too small?)");
}

CovarianceModel explicit_model(const Matrix& sigma) {
  if (sigma.rows() != sigma.cols()) throw ParameterError("explicit covariance must be square");
  if (!sigma.isApprox(sigma.transpose(), 1e-12)) throw ParameterError("explicit covariance must be symmetric");
  CovarianceModel out;
  out.sigma = 0.5 * (sigma + sigma.transpose());
  out.graph.precision = inverse_spd(out.sigma, "explicit covariance");
  out.graph.edges = support_of(out.graph.precision);
  return out;
}

}  // namespace

CovarianceModel build_covariance(const CovarianceSpec& spec) {
  if (spec.kind != CovarianceKind::Explicit && spec.K < 2)
    throw ParameterError("covariance models need K >= 2");
  switch (spec.kind) {
    case CovarianceKind::AR1: return ar1_model(spec.K, spec.rho);
    case CovarianceKind::AR4: return ar4_model(spec.K);
    case CovarianceKind::RandomPrecision: return random_precision_model(spec.K, spec.alpha, spec.seed);
    case CovarianceKind::Explicit: return explicit_model(spec.explicit_sigma);
  }
  throw ParameterError("unknown covariance kind");
}

Matrix partial_correlations(const Matrix& sigma) {
  const Matrix d = inverse_spd(sigma, "covariance");
  const int K = static_cast<int>(d.rows());
  Matrix pi(K, K);
  for (int a = 0; a < K; ++a)
    for (int b = 0; b < K; ++b)
      pi(a, b) = (a == b) ? 1.0 : -d(a, b) / std::sqrt(d(a, a) * d(b, b));
  return pi;
}

BlockPartition BlockPartition::from_labels(std::vector<int> labels, int K) {
  if (K < 1) throw ParameterError("partition needs K >= 1");
  BlockPartition p;
  p.K = K;
  p.N = static_cast<int>(labels.size());
  p.sizes.assign(K, 0);
  for (int z : labels) {
    if (z < 0 || z >= K) throw ParameterError("block label out of range");
    ++p.sizes[z];
  }
  p.pairs.resize(K);
  p.m_min = -1;
  for (int k = 0; k < K; ++k) {
    if (p.sizes[k] == 0) throw ParameterError("block " + std::to_string(k + 1) + " is empty");
    const long long s = p.sizes[k];
    p.pairs[k] = s * (s - 1) / 2;
    if (p.m_min < 0 || p.pairs[k] < p.m_min) p.m_min = p.pairs[k];
  }
  p.labels = std::move(labels);
  return p;
}

BlockPartition make_partition(int K, long long m_min_target, std::optional<int> nodes_override) {
  if (K < 1) throw ParameterError("K must be >= 1");
  if (m_min_target < 1) throw ParameterError("m_min target must be >= 1");
  long long s = 2;
  while (s * (s - 1) / 2 < m_min_target) ++s;
  if (nodes_override) {
    if (*nodes_override % K != 0) throw ParameterError("node count must be a multiple of K");
    const long long forced = *nodes_override / K;
    if (forced * (forced - 1) / 2 < m_min_target)
      throw ParameterError("node count too small for the requested m_min");
    s = forced;
  }
  std::vector<int> labels(static_cast<std::size_t>(K * s));
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i / s);
  return BlockPartition::from_labels(std::move(labels), K);
}

LatentBlockModel LatentBlockModel::centered(Matrix sigma, BlockPartition partition,
                                            OffDiagonalSpec off_diagonal) {
  LatentBlockModel m;
  const auto K = sigma.rows();
  m.design = Matrix::Ones(K, 1);
  m.beta = Vector::Zero(1);
  m.sigma = std::move(sigma);
  m.partition = std::move(partition);
  m.off_diagonal = off_diagonal;
  return m;
}

NetworkSample::NetworkSample(int N)
    : n_(N), upper_(static_cast<std::size_t>(N) * (N > 0 ? N - 1 : 0) / 2, 0) {}

std::size_t NetworkSample::index(int i, int j) const {
  if (i > j) std::swap(i, j);
  assert(i != j && i >= 0 && j < n_);
  const auto ii = static_cast<std::size_t>(i);
  return ii * (2 * static_cast<std::size_t>(n_) - ii - 1) / 2 + static_cast<std::size_t>(j - i - 1);
}

bool NetworkSample::edge(int i, int j) const { return i != j && upper_[index(i, j)] != 0; }

void NetworkSample::set_edge(int i, int j, bool value) {
  if (i == j) throw ParameterError("self-loops are not allowed");
  if (i < 0 || j < 0 || i >= n_ || j >= n_) throw ParameterError("node index out of range");
  upper_[index(i, j)] = value ? 1 : 0;
}

long long NetworkSample::edge_count() const {
  long long c = 0;
  for (auto v : upper_) c += v;
  return c;
}

std::vector<std::uint8_t> NetworkSample::adjacency() const {
  std::vector<std::uint8_t> adj(static_cast<std::size_t>(n_) * n_, 0);
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j)
      if (edge(i, j)) adj[static_cast<std::size_t>(i) * n_ + j] = adj[static_cast<std::size_t>(j) * n_ + i] = 1;
  return adj;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Matrix sample_eta_panel(const LatentBlockModel& model, int n, std::uint64_t seed) {
  if (n < 1) throw ParameterError("sample count n must be >= 1");
  const int K = model.K();
  const Matrix L = cholesky_factor(model.sigma);
  const Vector mu = model.mean();
  if (mu.size() != K) throw ParameterError("design matrix rows must equal K");

  Rng rng(derive_seed(seed, stream::kEta));
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix H(n, K);
  Vector z(K);
  for (int t = 0; t < n; ++t) {
    for (int k = 0; k < K; ++k) z(k) = normal(rng);
    H.row(t) = (mu + L * z).transpose();
  }
  return H;
}

NetworkSample sample_network(const Eigen::Ref<const Vector>& eta, const BlockPartition& partition,
                             const OffDiagonalSpec& off_diagonal, std::uint64_t seed) {
  const int K = partition.K;
  if (eta.size() != K) throw ParameterError("latent row length must equal the number of blocks");

  Rng rng(seed);
  std::vector<double> p_within(K);
  for (int k = 0; k < K; ++k) p_within[k] = logistic(eta(k));

  // Between-block probabilities p_kl, k < l, drawn independently per network.
  Matrix p_between = Matrix::Constant(K, K, off_diagonal.probability);
  if (off_diagonal.kind == OffDiagonalSpec::Kind::LogitGaussian) {
    Rng off_rng(derive_seed(seed, stream::kOffDiagonal));
    std::normal_distribution<double> normal(off_diagonal.logit_mean, off_diagonal.logit_sd);
    for (int k = 0; k < K; ++k)
      for (int l = k + 1; l < K; ++l) p_between(k, l) = p_between(l, k) = logistic(normal(off_rng));
  } else if (!(off_diagonal.probability > 0.0 && off_diagonal.probability < 1.0)) {
    throw ParameterError("off-diagonal probability must lie in (0, 1)");
  }

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  NetworkSample net(partition.N);
  const auto& z = partition.labels;
  for (int i = 0; i < partition.N; ++i) {
    for (int j = i + 1; j < partition.N; ++j) {
      const double p = (z[i] == z[j]) ? p_within[z[i]] : p_between(z[i], z[j]);
      if (unif(rng) < p) net.set_edge(i, j);
    }
  }
  return net;
}

std::vector<NetworkSample> sample_networks(const Matrix& H, const BlockPartition& partition,
                                           const OffDiagonalSpec& off_diagonal,
                                           std::uint64_t seed) {
  if (H.cols() != partition.K) throw ParameterError("latent matrix columns must equal the number of blocks");
  std::vector<NetworkSample> out;
  out.reserve(static_cast<std::size_t>(H.rows()));
  const std::uint64_t base = derive_seed(seed, stream::kNetworks);
  for (int t = 0; t < H.rows(); ++t)
    out.push_back(sample_network(H.row(t).transpose(), partition, off_diagonal,
                                 derive_seed(base, static_cast<std::uint64_t>(t))));
  return out;
}

Eigen::MatrixXi sample_block_counts(const Matrix& H, const BlockPartition& partition,
                                    std::uint64_t seed) {
  if (H.cols() != partition.K) throw ParameterError("latent matrix columns must equal the number of blocks");
  Rng rng(derive_seed(seed, stream::kNetworks));
  Eigen::MatrixXi S(H.rows(), H.cols());
  for (int t = 0; t < H.rows(); ++t)
    for (int k = 0; k < H.cols(); ++k) {
      std::binomial_distribution<long long> binom(partition.pairs[k], logistic(H(t, k)));
      S(t, k) = static_cast<int>(binom(rng));
    }
  return S;
}

}  // namespace lbm
