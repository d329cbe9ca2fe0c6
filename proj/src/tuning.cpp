#include "lbmgraph/tuning.hpp"

#include "lbmgraph/kernels.hpp"
#include "lbmgraph/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <random>

namespace lbm {

std::vector<double> TuningConfig::default_tau_grid(double step) {
  if (!(step > 0.0 && step <= 1.0)) throw ParameterError("tau step must lie in (0, 1]");
  std::vector<double> grid;
  const int count = static_cast<int>(std::floor(1.0 / step + 1e-9));
  for (int i = 0; i <= count; ++i) grid.push_back(std::min(1.0, i * step));
  if (grid.back() < 1.0 - 1e-12) grid.push_back(1.0);
  return grid;
}

void TuningConfig::validate() const {
  if (folds < 2) throw ParameterError("cross-validation needs at least 2 folds");
  if (lambda_grid_size < 1) throw ParameterError("lambda grid must be nonempty");
  if (tau_grid.empty()) throw ParameterError("tau grid must be nonempty");
  if (!std::is_sorted(tau_grid.begin(), tau_grid.end())) throw ParameterError("tau grid must be sorted ascending");
  for (double t : tau_grid)
    if (!(t >= 0.0 && t <= 1.0)) throw ParameterError("tau grid values must lie in [0, 1]");
  if (!(bic_tie_tolerance >= 0.0)) throw ParameterError("BIC tie tolerance must be >= 0");
}

std::vector<double> lambda_grid(const SelectorProblem& problem, Method method, int size) {
  if (size < 1) throw ParameterError("lambda grid size must be >= 1");
  const double top = lambda_max(problem, method);
  if (top == 0.0) return {0.0};
  if (size == 1) return {top};
  std::vector<double> grid(static_cast<std::size_t>(size));
  const double ratio = std::pow(1e-3, 1.0 / (size - 1));
  grid[0] = top;
  for (int i = 1; i < size; ++i) grid[i] = top * std::pow(ratio, i);
  return grid;
}

CvResult cv_select_lambda(const SelectorProblem& problem, Method method, const TuningConfig& config,
                          std::uint64_t seed) {
  const int n = problem.n();
  if (n < config.folds)
    throw ParameterError("cross-validation needs n >= folds (n=" + std::to_string(n) +
                         ", folds=" + std::to_string(config.folds) + ")");
  CvResult out;
  out.grid = lambda_grid(problem, method, config.lambda_grid_size);
  out.loss.assign(out.grid.size(), 0.0);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, stream::kCrossValidation));
  std::shuffle(order.begin(), order.end(), rng);

  const int base = n / config.folds;
  const int extra = n % config.folds;
  int start = 0;
  for (int f = 0; f < config.folds; ++f) {
    const int len = base + (f < extra ? 1 : 0);
    std::vector<int> test(order.begin() + start, order.begin() + start + len);
    std::vector<int> train(order.begin(), order.begin() + start);
    train.insert(train.end(), order.begin() + start + len, order.end());
    start += len;

    const SelectorProblem fit = subproblem(problem, train);
    Matrix X_test(len, problem.p());
    Vector y_test(len);
    for (int i = 0; i < len; ++i) {
      X_test.row(i) = problem.X.row(test[i]);
      y_test(i) = problem.y(test[i]);
    }

    Vector warm = Vector::Zero(problem.p());
    for (std::size_t g = 0; g < out.grid.size(); ++g) {
      const SelectorSolution sol = solve_selector(fit, method, out.grid[g], &warm);
      const Vector beta = fit.restrict(sol.theta);
      if (method == Method::Lasso) warm = beta;
      const Vector pred = X_test * beta;
      out.loss[g] += kernels::sum_sq_diff({y_test.data(), static_cast<std::size_t>(len)},
                                          {pred.data(), static_cast<std::size_t>(len)}) /
                     len;
    }
  }

  std::size_t best = 0;
  for (std::size_t g = 1; g < out.grid.size(); ++g)
    if (out.loss[g] < out.loss[best]) best = g;
  out.lambda = out.grid[best];
  return out;
}

Matrix sample_covariance(const Matrix& centered) {
  if (centered.rows() < 1) throw ParameterError("sample covariance needs at least one row");
  Matrix S = centered.transpose() * centered / static_cast<double>(centered.rows());
  return 0.5 * (S + S.transpose());
}

double gaussian_loglik(const Matrix& D, const Matrix& S_emp, int n) {
  Eigen::LLT<Matrix> llt(D);
  if (llt.info() != Eigen::Success) throw NumericalError("precision matrix is not positive definite");
  const Matrix L = llt.matrixL();
  const double logdet = 2.0 * L.diagonal().array().log().sum();
  const double trace = (S_emp.cwiseProduct(D)).sum();
  const double K = static_cast<double>(D.rows());
  return 0.5 * n * (logdet - trace - K * std::log(2.0 * std::numbers::pi));
}

double gaussian_bic(const PrecisionFit& fit, const Matrix& S_emp, int n) {
  const double ll = gaussian_loglik(fit.D_hat, S_emp, n);
  return -2.0 * ll + std::log(static_cast<double>(n)) * static_cast<double>(fit.dim);
}

PrecisionFit refit_precision(const EdgeSet& support, const Matrix& S_emp, int n, const RefitOptions& options) {
  const int K = static_cast<int>(S_emp.rows());
  if (S_emp.cols() != K) throw ParameterError("sample covariance must be square");
  for (const Edge& e : support.edges())
    if (e.b >= K) throw ParameterError("support edge outside the covariance dimension");

  PrecisionFit fit;
  fit.support = support;
  fit.dim = K + static_cast<int>(support.size());

  Matrix S = 0.5 * (S_emp + S_emp.transpose());
  Eigen::LLT<Matrix> check(S);
  if (check.info() != Eigen::Success || (S.diagonal().array() <= 0.0).any()) {
    S.diagonal().array() += 1e-6 * S.trace() / K + (S.trace() > 0.0 ? 0.0 : 1e-6);
    fit.ridge_applied = true;
  }

  std::vector<std::vector<int>> ne(K);
  for (const Edge& e : support.edges()) {
    ne[e.a].push_back(e.b);
    ne[e.b].push_back(e.a);
  }
  for (auto& v : ne) std::sort(v.begin(), v.end());

  auto solve_node = [&](const Matrix& W, int j) -> Vector {
    const auto& nb = ne[j];
    const int m = static_cast<int>(nb.size());
    Matrix A(m, m);
    Vector rhs(m);
    for (int r = 0; r < m; ++r) {
      rhs(r) = S(nb[r], j);
      for (int c = 0; c < m; ++c) A(r, c) = W(nb[r], nb[c]);
    }
    return A.ldlt().solve(rhs);
  };

  Matrix W = S;
  // Without any edges the fixed point is the diagonal of S.
  if (support.empty()) {
    W = S.diagonal().asDiagonal();
    fit.converged = true;
  }
  for (int it = 0; it < options.max_iterations && !fit.converged; ++it) {
    double change = 0.0;
    for (int j = 0; j < K; ++j) {
      const auto& nb = ne[j];
      Vector w(K);
      if (nb.empty()) {
        w.setZero();
      } else {
        const Vector beta = solve_node(W, j);
        w.setZero();
        for (std::size_t r = 0; r < nb.size(); ++r) w += beta(static_cast<Eigen::Index>(r)) * W.col(nb[r]);
      }
      for (int i = 0; i < K; ++i) {
        if (i == j) continue;
        change = std::max(change, std::fabs(w(i) - W(i, j)));
        W(i, j) = W(j, i) = w(i);
      }
    }
    fit.iterations = it + 1;
    if (change <= options.tolerance) fit.converged = true;
  }

  Matrix D = Matrix::Zero(K, K);
  for (int j = 0; j < K; ++j) {
    const auto& nb = ne[j];
    double explained = 0.0;
    Vector beta;
    if (!nb.empty()) {
      beta = solve_node(W, j);
      for (std::size_t r = 0; r < nb.size(); ++r) explained += beta(static_cast<Eigen::Index>(r)) * S(nb[r], j);
    }
    const double djj = 1.0 / (S(j, j) - explained);
    D(j, j) = djj;
    for (std::size_t r = 0; r < nb.size(); ++r) D(nb[r], j) = -beta(static_cast<Eigen::Index>(r)) * djj;
  }
  fit.D_hat = 0.5 * (D + D.transpose());
  fit.loglik = gaussian_loglik(fit.D_hat, S, n);
  return fit;
}

std::size_t flat_bic_choice(const std::vector<double>& bic, double tie_tolerance) {
  if (bic.empty()) throw ParameterError("empty BIC curve");
  const double best = *std::min_element(bic.begin(), bic.end());
  std::vector<std::size_t> ties;
  for (std::size_t i = 0; i < bic.size(); ++i)
    if (bic[i] <= best + tie_tolerance) ties.push_back(i);
  if (2 * ties.size() > bic.size()) {
    const auto q = static_cast<std::size_t>(std::ceil(0.75 * static_cast<double>(ties.size() - 1)));
    return ties[q];
  }
  return ties.back();
}

TauSelection select_tau(const std::vector<SelectorSolution>& solutions, const EtaPanel& panel, const Vector& mu,
                        const TuningConfig& config, Rule rule) {
  config.validate();
  const int K = panel.K();
  if (static_cast<int>(solutions.size()) != K) throw ParameterError("need one selector solution per node");
  std::vector<char> seen(K, 0);
  for (const auto& s : solutions) {
    if (s.target < 0 || s.target >= K || seen[s.target]) throw ParameterError("solutions must cover every node once");
    seen[s.target] = 1;
  }

  const Matrix S = sample_covariance(center_panel(panel, mu));
  const int n = panel.n();

  std::map<std::vector<Edge>, std::pair<double, EdgeSet>> cache;
  std::vector<EdgeSet> edge_sets;
  TauSelection out;
  for (double tau : config.tau_grid) {
    std::vector<SelectorSolution> thresholded;
    thresholded.reserve(solutions.size());
    for (const auto& s : solutions) thresholded.push_back(threshold_relative(s, tau));
    EdgeSet edges = edges_from_solutions(thresholded, rule);
    auto it = cache.find(edges.edges());
    if (it == cache.end()) {
      const PrecisionFit fit = refit_precision(edges, S, n);
      it = cache.emplace(edges.edges(), std::make_pair(gaussian_bic(fit, S, n), edges)).first;
    }
    out.bic_curve.push_back(it->second.first);
    edge_sets.push_back(it->second.second);
  }

  const std::size_t idx = flat_bic_choice(out.bic_curve, config.bic_tie_tolerance);
  const double best = *std::min_element(out.bic_curve.begin(), out.bic_curve.end());
  std::size_t ties = 0;
  for (double b : out.bic_curve)
    if (b <= best + config.bic_tie_tolerance) ++ties;
  out.flat = 2 * ties > out.bic_curve.size();
  out.tau = config.tau_grid[idx];
  out.bic = out.bic_curve[idx];
  out.edges = EdgeSet(edge_sets[idx].edges(), rule);
  return out;
}

}  // namespace lbm
