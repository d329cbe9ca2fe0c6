#pragma once

#include "lbmgraph/common.hpp"
#include "lbmgraph/graph.hpp"

#include <span>
#include <string_view>
#include <vector>

// Per-node neighborhood selection. Node a's (centered) log-odds are regressed
// on all other nodes; the support of the coefficient vector is ne_a.
namespace lbm {

enum class Method { Lasso, Dantzig, MU };

std::string_view method_name(Method method);
Method parse_method(std::string_view text);

/// Regression of column `target` on the remaining columns.
struct SelectorProblem {
  int target = 0;               // 0-based node index a
  int K = 0;
  Vector y;                     // n
  Matrix X;                     // n x (K-1)
  std::vector<int> index_map;   // design column -> node
  Matrix gram;                  // X'X / n
  Vector corr;                  // X'y / n

  int n() const { return static_cast<int>(y.size()); }
  int p() const { return static_cast<int>(X.cols()); }

  /// Scatters a design-space vector into a K-vector with slot `target` zero.
  Vector embed(const Vector& theta_design) const;
  /// Gathers the design coordinates of a K-vector.
  Vector restrict(const Vector& theta) const;
};

SelectorProblem make_problem(const Matrix& centered, int target);

/// Same target and index map, restricted to the given rows.
SelectorProblem subproblem(const SelectorProblem& problem, std::span<const int> rows);

struct SelectorDiagnostics {
  double kkt_residual = 0.0;       // Lasso
  double l1_norm = 0.0;
  double feasibility_slack = 0.0;  // Dantzig-type: bound - |residual correlation|_inf
  long iterations = 0;             // sweeps or pivots
  bool converged = true;
};

struct SelectorSolution {
  int target = 0;
  Vector theta;  // length K, theta(target) == 0
  Method method = Method::Lasso;
  double lambda = 0.0;
  double mu_coef = 0.0;
  SelectorDiagnostics diagnostics;

  /// Nodes with nonzero coefficients.
  std::vector<int> neighborhood() const;
};

struct LassoOptions {
  double tolerance = 1e-7;
  int max_sweeps = 10000;
};

/// Cyclic coordinate descent on n^-1 ||y - X theta||^2 + lambda ||theta||_1.
/// `warm_start` (design space, length p) initializes the sweep if given.
SelectorSolution solve_lasso(const SelectorProblem& problem, double lambda,
                             const Vector* warm_start = nullptr, const LassoOptions& options = {});

/// min ||theta||_1  s.t.  |n^-1 X'(y - X theta)|_inf <= mu_coef ||theta||_1 + lambda,
/// solved as an LP in theta = u - v. mu_coef = 0 gives the Dantzig selector,
/// mu_coef = lambda the MU-selector.
SelectorSolution solve_dantzig_type(const SelectorProblem& problem, double lambda, double mu_coef);

/// Method dispatch; MU uses mu_coef = lambda.
SelectorSolution solve_selector(const SelectorProblem& problem, Method method, double lambda,
                                const Vector* warm_start = nullptr);

/// Largest violation of the Lasso stationarity conditions, computed from the
/// raw design and response.
double kkt_residual(const SelectorProblem& problem, const Vector& theta, double lambda);

/// mu_coef ||theta||_1 + lambda - |n^-1 X'(y - X theta)|_inf.
double dantzig_slack(const SelectorProblem& problem, const Vector& theta, double lambda, double mu_coef);

/// Smallest lambda whose solution is zero: 2|X'y/n|_inf for the Lasso,
/// |X'y/n|_inf for Dantzig-type selectors.
double lambda_max(const SelectorProblem& problem, Method method);

/// Zeroes |theta_b| <= t * (mu_coef ||theta||_1 + lambda).
SelectorSolution threshold_absolute(const SelectorSolution& solution, double t);

/// Keeps theta_b iff |theta_b| / max_k |theta_k| > tau.
SelectorSolution threshold_relative(const SelectorSolution& solution, double tau);

/// Edge set from one solution per node.
EdgeSet edges_from_solutions(const std::vector<SelectorSolution>& solutions, Rule rule);

}  // namespace lbm
