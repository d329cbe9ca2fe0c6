#include "lbmgraph/selectors.hpp"

#include "lbmgraph/kernels.hpp"
#include "lbmgraph/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace lbm {

std::string_view method_name(Method method) {
  switch (method) {
    case Method::Lasso: return "lasso";
    case Method::Dantzig: return "dantzig";
    case Method::MU: return "mu";
  }
  return "unknown";
}

Method parse_method(std::string_view text) {
  if (text == "lasso") return Method::Lasso;
  if (text == "dantzig") return Method::Dantzig;
  if (text == "mu") return Method::MU;
  throw ParameterError("unknown method '" + std::string(text) + "' (expected lasso, dantzig or mu)");
}

Vector SelectorProblem::embed(const Vector& theta_design) const {
  Vector theta = Vector::Zero(K);
  for (int j = 0; j < p(); ++j) theta(index_map[j]) = theta_design(j);
  return theta;
}

Vector SelectorProblem::restrict(const Vector& theta) const {
  Vector out(p());
  for (int j = 0; j < p(); ++j) out(j) = theta(index_map[j]);
  return out;
}

namespace {

void fill_moments(SelectorProblem& prob) {
  const double inv_n = 1.0 / prob.n();
  prob.gram = (prob.X.transpose() * prob.X) * inv_n;
  prob.corr = (prob.X.transpose() * prob.y) * inv_n;
}

}  // namespace

SelectorProblem make_problem(const Matrix& centered, int target) {
  const int K = static_cast<int>(centered.cols());
  if (target < 0 || target >= K)
    throw ParameterError("target node " + std::to_string(target + 1) + " out of range 1.." + std::to_string(K));
  if (centered.rows() < 1) throw ParameterError("selector problem needs at least one observation");
  if (!centered.allFinite()) throw ParameterError("non-finite entries in the panel");
  SelectorProblem prob;
  prob.target = target;
  prob.K = K;
  prob.y = centered.col(target);
  prob.X.resize(centered.rows(), K - 1);
  for (int b = 0, j = 0; b < K; ++b) {
    if (b == target) continue;
    prob.X.col(j++) = centered.col(b);
    prob.index_map.push_back(b);
  }
  fill_moments(prob);
  return prob;
}

SelectorProblem subproblem(const SelectorProblem& problem, std::span<const int> rows) {
  if (rows.empty()) throw ParameterError("subproblem needs at least one row");
  SelectorProblem sub;
  sub.target = problem.target;
  sub.K = problem.K;
  sub.index_map = problem.index_map;
  sub.y.resize(static_cast<Eigen::Index>(rows.size()));
  sub.X.resize(static_cast<Eigen::Index>(rows.size()), problem.p());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    sub.y(static_cast<Eigen::Index>(i)) = problem.y(rows[i]);
    sub.X.row(static_cast<Eigen::Index>(i)) = problem.X.row(rows[i]);
  }
  fill_moments(sub);
  return sub;
}

std::vector<int> SelectorSolution::neighborhood() const {
  std::vector<int> ne;
  for (int b = 0; b < theta.size(); ++b)
    if (theta(b) != 0.0) ne.push_back(b);
  return ne;
}

double lambda_max(const SelectorProblem& problem, Method method) {
  const double c = problem.p() > 0 ? problem.corr.lpNorm<Eigen::Infinity>() : 0.0;
  return method == Method::Lasso ? 2.0 * c : c;
}

double kkt_residual(const SelectorProblem& problem, const Vector& theta, double lambda) {
  const Vector beta = problem.restrict(theta);
  const Vector residual = problem.y - problem.X * beta;
  double worst = 0.0;
  for (int j = 0; j < problem.p(); ++j) {
    const double g = -2.0 / problem.n() * residual.dot(problem.X.col(j));
    const double v = beta(j) != 0.0 ? std::fabs(g + (beta(j) > 0 ? lambda : -lambda))
                                    : std::max(0.0, std::fabs(g) - lambda);
    worst = std::max(worst, v);
  }
  return worst;
}

double dantzig_slack(const SelectorProblem& problem, const Vector& theta, double lambda, double mu_coef) {
  const Vector beta = problem.restrict(theta);
  const Vector residual = problem.y - problem.X * beta;
  const double corr = problem.p() > 0 ? (problem.X.transpose() * residual / problem.n()).lpNorm<Eigen::Infinity>() : 0.0;
  return mu_coef * beta.lpNorm<1>() + lambda - corr;
}

SelectorSolution solve_lasso(const SelectorProblem& problem, double lambda, const Vector* warm_start,
                             const LassoOptions& options) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be a finite value >= 0");
  const int p = problem.p();
  Vector beta = Vector::Zero(p);
  if (warm_start) {
    if (warm_start->size() != p) throw ParameterError("warm start has the wrong length");
    beta = *warm_start;
  }
  // g = X'(y - X beta)/n, kept current through rank-one column updates.
  Vector g = problem.corr - problem.gram * beta;
  const double half = 0.5 * lambda;

  SelectorSolution sol;
  sol.target = problem.target;
  sol.method = Method::Lasso;
  sol.lambda = lambda;
  sol.diagnostics.converged = false;

  int sweep = 0;
  while (sweep < options.max_sweeps) {
    ++sweep;
    double max_change = 0.0;
    for (int j = 0; j < p; ++j) {
      const double gjj = problem.gram(j, j);
      const double old = beta(j);
      double fresh = 0.0;
      if (gjj > 0.0) {
        const double z = g(j) + gjj * old;
        if (z > half)
          fresh = (z - half) / gjj;
        else if (z < -half)
          fresh = (z + half) / gjj;
      }
      const double delta = fresh - old;
      if (delta != 0.0) {
        beta(j) = fresh;
        kernels::axpy(-delta, std::span<const double>(problem.gram.col(j).data(), static_cast<std::size_t>(p)),
                      std::span<double>(g.data(), static_cast<std::size_t>(p)));
        max_change = std::max(max_change, std::fabs(delta));
      }
    }
    if (max_change <= options.tolerance) {
      sol.diagnostics.converged = true;
      break;
    }
  }
  sol.theta = problem.embed(beta);
  sol.diagnostics.iterations = sweep;
  sol.diagnostics.l1_norm = beta.lpNorm<1>();
  sol.diagnostics.kkt_residual = kkt_residual(problem, sol.theta, lambda);
  return sol;
}

SelectorSolution solve_dantzig_type(const SelectorProblem& problem, double lambda, double mu_coef) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be a finite value >= 0");
  if (!(mu_coef >= 0.0) || !std::isfinite(mu_coef)) throw ParameterError("mu_coef must be a finite value >= 0");
  const int p = problem.p();
  SelectorSolution sol;
  sol.target = problem.target;
  sol.method = mu_coef == 0.0 ? Method::Dantzig : Method::MU;
  sol.lambda = lambda;
  sol.mu_coef = mu_coef;

  if (p == 0 || problem.corr.lpNorm<Eigen::Infinity>() <= lambda) {
    sol.theta = Vector::Zero(problem.K);
    sol.diagnostics.feasibility_slack = dantzig_slack(problem, sol.theta, lambda, mu_coef);
    return sol;
  }

  // Variables (u, v) >= 0, theta = u - v.
  //   c - G theta <= mu 1'(u+v) + lambda   ->  [-G - mu J,  G - mu J] x <= lambda - c
  //   G theta - c <= mu 1'(u+v) + lambda   ->  [ G - mu J, -G - mu J] x <= lambda + c
  const Matrix& G = problem.gram;
  const Matrix J = Matrix::Constant(p, p, mu_coef);
  lp::LinearProgram prog;
  prog.A.resize(2 * p, 2 * p);
  prog.A << -G - J, G - J, G - J, -G - J;
  prog.b.resize(2 * p);
  prog.b << (lambda - problem.corr.array()).matrix(), (lambda + problem.corr.array()).matrix();
  prog.c = Vector::Ones(2 * p);

  lp::Options opt;
  opt.max_pivots = 10L * problem.K * problem.K;
  const lp::Result res = lp::solve(prog, opt);
  if (res.status != lp::Status::Optimal) {
    std::ostringstream msg;
    msg << "Dantzig-type LP for node " << problem.target + 1 << " ended with status '" << lp::status_name(res.status)
        << "' after " << res.pivots << " pivots (lambda=" << lambda << ", mu=" << mu_coef << ", p=" << p << ")";
    throw NumericalError(msg.str());
  }

  Vector beta = res.x.head(p) - res.x.tail(p);
  for (int j = 0; j < p; ++j)
    if (std::fabs(beta(j)) <= 1e-12) beta(j) = 0.0;
  sol.theta = problem.embed(beta);
  sol.diagnostics.iterations = res.pivots;
  sol.diagnostics.l1_norm = beta.lpNorm<1>();
  sol.diagnostics.feasibility_slack = dantzig_slack(problem, sol.theta, lambda, mu_coef);
  return sol;
}

SelectorSolution solve_selector(const SelectorProblem& problem, Method method, double lambda,
                                const Vector* warm_start) {
  switch (method) {
    case Method::Lasso: return solve_lasso(problem, lambda, warm_start);
    case Method::Dantzig: return solve_dantzig_type(problem, lambda, 0.0);
    case Method::MU: {
      SelectorSolution s = solve_dantzig_type(problem, lambda, lambda);
      s.method = Method::MU;
      return s;
    }
  }
  throw ParameterError("unknown method");
}

SelectorSolution threshold_absolute(const SelectorSolution& solution, double t) {
  if (!(t > 0.0)) throw ParameterError("threshold multiplier t must be positive");
  SelectorSolution out = solution;
  const double cutoff = t * (solution.mu_coef * solution.theta.lpNorm<1>() + solution.lambda);
  for (int b = 0; b < out.theta.size(); ++b)
    if (std::fabs(out.theta(b)) <= cutoff) out.theta(b) = 0.0;
  return out;
}

SelectorSolution threshold_relative(const SelectorSolution& solution, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ParameterError("tau must lie in [0, 1]");
  SelectorSolution out = solution;
  const double peak = solution.theta.lpNorm<Eigen::Infinity>();
  if (peak == 0.0) return out;
  for (int b = 0; b < out.theta.size(); ++b)
    if (!(std::fabs(out.theta(b)) / peak > tau)) out.theta(b) = 0.0;
  return out;
}

EdgeSet edges_from_solutions(const std::vector<SelectorSolution>& solutions, Rule rule) {
  std::vector<std::vector<int>> ne(solutions.size());
  for (const auto& s : solutions) {
    if (s.target < 0 || s.target >= static_cast<int>(solutions.size()))
      throw ParameterError("solution target out of range");
    ne[s.target] = s.neighborhood();
  }
  return assemble_edge_set(ne, rule);
}

}  // namespace lbm
