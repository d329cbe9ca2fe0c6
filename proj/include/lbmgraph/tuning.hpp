#pragma once

#include "lbmgraph/common.hpp"
#include "lbmgraph/estimation.hpp"
#include "lbmgraph/graph.hpp"
#include "lbmgraph/selectors.hpp"

#include <cstdint>
#include <vector>

namespace lbm {

struct TuningConfig {
  int folds = 5;
  int lambda_grid_size = 50;
  std::vector<double> tau_grid = default_tau_grid(0.02);
  double bic_tie_tolerance = 1e-8;

  /// 0, step, 2*step, ..., 1 (1 always included).
  static std::vector<double> default_tau_grid(double step);
  void validate() const;
};

/// Descending log-spaced grid over [1e-3 * lambda_max, lambda_max];
/// {0} when lambda_max is 0.
std::vector<double> lambda_grid(const SelectorProblem& problem, Method method, int size);

struct CvResult {
  double lambda = 0.0;
  std::vector<double> grid;
  std::vector<double> loss;  // summed over folds, per grid point
};

/// K-fold cross-validation of the squared prediction error for one node.
/// Rows are shuffled with `seed`, then split into contiguous folds. Ties in the
/// loss go to the larger lambda.
CvResult cv_select_lambda(const SelectorProblem& problem, Method method, const TuningConfig& config,
                          std::uint64_t seed);

struct RefitOptions {
  double tolerance = 1e-6;
  int max_iterations = 200;
};

/// Gaussian MLE of a precision matrix with a prescribed off-diagonal zero
/// pattern.
struct PrecisionFit {
  Matrix D_hat;
  EdgeSet support;
  double loglik = 0.0;
  int dim = 0;  // K + |support|
  int iterations = 0;
  bool converged = false;
  bool ridge_applied = false;
};

/// (1/n) * centered' * centered.
Matrix sample_covariance(const Matrix& centered);

/// Support-constrained Gaussian MLE by nodewise regression updates of the
/// covariance estimate W: for each node j, W restricted to ne_j is matched to
/// S and the remaining entries of row j follow from W. At the optimum W = D^-1
/// agrees with S on the support and the diagonal, and D is exactly zero off
/// the support.
PrecisionFit refit_precision(const EdgeSet& support, const Matrix& S_emp, int n, const RefitOptions& options = {});

/// (n/2) (log det D - tr(S D) - K log 2 pi).
double gaussian_loglik(const Matrix& D, const Matrix& S_emp, int n);

/// -2 l_n(D) + log(n) * (K + |support|).
double gaussian_bic(const PrecisionFit& fit, const Matrix& S_emp, int n);

/// Index of the chosen grid point under the flat-BIC rule: if more than half
/// the grid ties the minimum (within `tie_tolerance`), the third quartile of
/// the tied points; otherwise the largest-index minimizer.
std::size_t flat_bic_choice(const std::vector<double>& bic, double tie_tolerance);

struct TauSelection {
  double tau = 0.0;
  EdgeSet edges;
  double bic = 0.0;
  std::vector<double> bic_curve;  // per tau grid point
  bool flat = false;
};

/// Thresholds every solution at each tau, refits the precision matrix on the
/// resulting edge set, and chooses tau by BIC with the flat-BIC rule.
TauSelection select_tau(const std::vector<SelectorSolution>& solutions, const EtaPanel& panel, const Vector& mu,
                        const TuningConfig& config, Rule rule);

}  // namespace lbm
