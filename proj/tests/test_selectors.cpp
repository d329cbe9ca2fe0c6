#include "doctest.h"

#include "lbmgraph/selectors.hpp"
#include "lbmgraph/simplex.hpp"

#include "oracles.hpp"

#include <Eigen/SVD>

#include <random>

using namespace lbm;

namespace {

// Columns: y, x1, x2 with n^-1 X'X = I and n^-1 X'y = (0.9, 0.1).
Matrix orthonormal_panel() {
  Matrix m(4, 3);
  m.col(1) << 1, 1, -1, -1;
  m.col(2) << 1, -1, 1, -1;
  m.col(0) = 0.9 * m.col(1) + 0.1 * m.col(2);
  return m;
}

Matrix random_panel(std::mt19937_64& rng, int n, int K) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(n, K);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < K; ++k) m(i, k) = normal(rng);
  // Correlate the target with a few columns.
  m.col(0) += 0.8 * m.col(1) - 0.5 * m.col(K - 1);
  return m;
}

double lasso_objective(const SelectorProblem& p, const Vector& theta, double lambda) {
  const Vector d = p.restrict(theta);
  return (p.y - p.X * d).squaredNorm() / p.n() + lambda * d.lpNorm<1>();
}

}  // namespace

TEST_CASE("make_problem bookkeeping") {
  Matrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  const SelectorProblem p = make_problem(m, 1);
  CHECK(p.index_map == std::vector<int>{0, 2});
  CHECK(p.y(1) == 5);
  CHECK(p.X(1, 1) == 6);
  Vector d(2);
  d << 0.5, -1.5;
  const Vector full = p.embed(d);
  CHECK(full(1) == 0.0);
  CHECK(full(0) == 0.5);
  CHECK(full(2) == -1.5);
  CHECK(p.restrict(full) == d);

  Matrix two(3, 2);
  two << 1, 2, 3, 4, 5, 6;
  const SelectorProblem q = make_problem(two, 0);
  CHECK(q.p() == 1);
  CHECK(q.X.col(0) == two.col(1));
  CHECK_THROWS_AS(make_problem(two, 2), ParameterError);
  CHECK_THROWS_AS(make_problem(two, -1), ParameterError);

  const std::vector<int> rows{2, 0};
  const SelectorProblem s = subproblem(q, rows);
  CHECK(s.n() == 2);
  CHECK(s.y(0) == 5);
  CHECK(s.gram(0, 0) == doctest::Approx((36.0 + 4.0) / 2.0));
}

TEST_CASE("Lasso on an orthonormal design is a soft threshold at lambda/2") {
  const SelectorProblem p = make_problem(orthonormal_panel(), 0);
  CHECK(p.gram.isApprox(Matrix::Identity(2, 2)));
  const SelectorSolution s = solve_lasso(p, 0.4);
  CHECK(s.theta(0) == 0.0);
  CHECK(s.theta(1) == doctest::Approx(0.7));
  CHECK(s.theta(2) == 0.0);
  CHECK(s.neighborhood() == std::vector<int>{1});
  CHECK(lambda_max(p, Method::Lasso) == doctest::Approx(1.8));
  CHECK(solve_lasso(p, 1.8).theta.isZero());
  CHECK(kkt_residual(p, Vector::Zero(3), 1.8) == 0.0);
}

TEST_CASE("Dantzig on an orthonormal design") {
  const SelectorProblem p = make_problem(orthonormal_panel(), 0);
  const SelectorSolution s = solve_dantzig_type(p, 0.2, 0.0);
  CHECK(s.theta(1) == doctest::Approx(0.7));
  CHECK(std::fabs(s.theta(2)) < 1e-12);
  CHECK(lambda_max(p, Method::Dantzig) == doctest::Approx(0.9));
  CHECK(solve_dantzig_type(p, 0.9, 0.0).theta.isZero());
  CHECK(solve_dantzig_type(p, 1.5, 0.0).theta.isZero());

  // The same answer by enumerating the vertices of the two-variable LP.
  Matrix A(4, 4);
  Vector b(4);
  const Matrix& G = p.gram;
  A << -G, G, G, -G;
  b << 0.2 - p.corr.array(), 0.2 + p.corr.array();
  const auto best = oracle::lp_vertex_min(A, b, Vector::Ones(4));
  REQUIRE(best);
  CHECK(s.theta.lpNorm<1>() == doctest::Approx(*best));
}

TEST_CASE("lambda = 0 recovers least squares") {
  std::mt19937_64 rng(5);
  const Matrix m = random_panel(rng, 40, 6);
  const SelectorProblem p = make_problem(m, 0);
  const Vector ls = (p.X.transpose() * p.X).ldlt().solve(p.X.transpose() * p.y);
  const SelectorSolution lasso = solve_lasso(p, 0.0);
  CHECK((p.restrict(lasso.theta) - ls).cwiseAbs().maxCoeff() <= 1e-6);
  const SelectorSolution dz = solve_dantzig_type(p, 0.0, 0.0);
  CHECK((p.restrict(dz.theta) - ls).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("Lasso satisfies the stationarity conditions on random instances") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> kdist(2, 20), ndist(5, 50);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    const int K = kdist(rng), n = ndist(rng);
    const SelectorProblem p = make_problem(random_panel(rng, n, K), 0);
    const double lam = frac(rng) * lambda_max(p, Method::Lasso);
    const SelectorSolution s = solve_lasso(p, lam);
    CHECK(s.theta(0) == 0.0);
    CHECK(kkt_residual(p, s.theta, lam) <= 1e-5);
    CHECK(s.diagnostics.kkt_residual <= 1e-5);
  }
}

TEST_CASE("kkt_residual detects a perturbed solution") {
  std::mt19937_64 rng(3);
  const SelectorProblem p = make_problem(random_panel(rng, 30, 6), 0);
  const double lam = 0.2 * lambda_max(p, Method::Lasso);
  SelectorSolution s = solve_lasso(p, lam);
  const auto ne = s.neighborhood();
  REQUIRE(!ne.empty());
  s.theta(ne[0]) += 0.1;
  CHECK(kkt_residual(p, s.theta, lam) > 1e-3);
}

TEST_CASE("Lasso warm start reaches the same optimum") {
  std::mt19937_64 rng(8);
  const SelectorProblem p = make_problem(random_panel(rng, 25, 10), 0);
  const double lam = 0.1 * lambda_max(p, Method::Lasso);
  const SelectorSolution cold = solve_lasso(p, lam);
  const Vector warm_init = p.restrict(solve_lasso(p, 0.3 * lambda_max(p, Method::Lasso)).theta);
  const SelectorSolution warm = solve_lasso(p, lam, &warm_init);
  CHECK(lasso_objective(p, warm.theta, lam) == doctest::Approx(lasso_objective(p, cold.theta, lam)).epsilon(1e-8));
  const Vector wrong = Vector::Zero(3);
  CHECK_THROWS_AS(solve_lasso(p, lam, &wrong), ParameterError);
  CHECK_THROWS_AS(solve_lasso(p, -1.0), ParameterError);
}

TEST_CASE("Dantzig-type selectors: feasibility, norm bound and vertex oracle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    const int K = 4, n = 12;
    const SelectorProblem p = make_problem(random_panel(rng, n, K), 0);
    const double lam = frac(rng) * lambda_max(p, Method::Dantzig);
    const double mu = (rep % 2 == 0) ? 0.0 : lam;
    const SelectorSolution s = solve_dantzig_type(p, lam, mu);
    CHECK(dantzig_slack(p, s.theta, lam, mu) >= -1e-8);
    CHECK(s.diagnostics.feasibility_slack >= -1e-8);

    const Vector ls = p.X.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(p.y);
    CHECK(dantzig_slack(p, p.embed(ls), lam, mu) >= -1e-8);
    CHECK(s.theta.lpNorm<1>() <= ls.lpNorm<1>() + 1e-9);

    const int q = K - 1;
    Matrix A(2 * q, 2 * q);
    const Matrix J = Matrix::Ones(q, q);
    A << -p.gram - mu * J, p.gram - mu * J, p.gram - mu * J, -p.gram - mu * J;
    Vector b(2 * q);
    b << lam - p.corr.array(), lam + p.corr.array();
    const auto best = oracle::lp_vertex_min(A, b, Vector::Ones(2 * q));
    REQUIRE(best);
    CHECK(std::fabs(s.theta.lpNorm<1>() - *best) <= 1e-6);
  }
}

TEST_CASE("monotonicity along lambda") {
  std::mt19937_64 rng(19);
  const SelectorProblem p = make_problem(random_panel(rng, 30, 8), 0);
  const double lmax_l = lambda_max(p, Method::Lasso), lmax_d = lambda_max(p, Method::Dantzig);
  double prev_obj = -1.0, prev_norm = 1e300;
  for (int i = 0; i <= 10; ++i) {
    const double f = i / 10.0;
    const SelectorSolution l = solve_lasso(p, f * lmax_l);
    const double obj = lasso_objective(p, l.theta, f * lmax_l);
    CHECK(obj >= prev_obj - 1e-10);
    prev_obj = obj;
    const double norm = solve_dantzig_type(p, f * lmax_d, 0.0).theta.lpNorm<1>();
    CHECK(norm <= prev_norm + 1e-9);
    prev_norm = norm;
  }
}

TEST_CASE("underdetermined Dantzig-type problems leave zero coefficients") {
  std::mt19937_64 rng(23);
  const SelectorProblem p = make_problem(random_panel(rng, 20, 30), 0);
  for (Method m : {Method::Dantzig, Method::MU}) {
    const SelectorSolution s = solve_selector(p, m, 0.0);
    int zeros = 0;
    for (int k = 1; k < 30; ++k) zeros += s.theta(k) == 0.0;
    CHECK(zeros >= 29 - 20);
    CHECK(dantzig_slack(p, s.theta, 0.0, 0.0) >= -1e-8);
  }
}

TEST_CASE("MU selector uses mu_coef = lambda") {
  std::mt19937_64 rng(29);
  const SelectorProblem p = make_problem(random_panel(rng, 30, 5), 0);
  const double lam = 0.2 * lambda_max(p, Method::MU);
  const SelectorSolution s = solve_selector(p, Method::MU, lam);
  CHECK(s.method == Method::MU);
  CHECK(s.mu_coef == lam);
  const SelectorSolution d = solve_selector(p, Method::Dantzig, lam);
  // The MU constraint set contains the Dantzig one.
  CHECK(s.theta.lpNorm<1>() <= d.theta.lpNorm<1>() + 1e-9);
  CHECK(method_name(parse_method("mu")) == "mu");
  CHECK_THROWS_AS(parse_method("ridge"), ParameterError);
}

TEST_CASE("absolute thresholding") {
  SelectorSolution s;
  s.target = 0;
  s.theta = Vector(3);
  s.theta << 0, 0.5, 0.01;
  s.lambda = 0.05;
  const SelectorSolution a = threshold_absolute(s, 1.0);
  CHECK(a.theta(1) == 0.5);
  CHECK(a.theta(2) == 0.0);

  s.lambda = 0.0;
  CHECK(threshold_absolute(s, 3.0).theta == s.theta);

  SelectorSolution mu;
  mu.target = 2;
  mu.theta = Vector(3);
  mu.theta << 1, 0.2, 0;
  mu.lambda = 0.1;
  mu.mu_coef = 0.1;
  mu.method = Method::MU;
  const SelectorSolution b = threshold_absolute(mu, 1.0);
  CHECK(b.theta(0) == 1.0);
  CHECK(b.theta(1) == 0.0);
  // 0.2 sits just below the cutoff 0.22; a smaller t keeps it.
  CHECK(threshold_absolute(mu, 0.9).theta(1) == 0.2);
  CHECK(threshold_absolute(threshold_absolute(mu, 0.5), 0.5).theta == threshold_absolute(mu, 0.5).theta);
  CHECK_THROWS_AS(threshold_absolute(mu, 0.0), ParameterError);
}

TEST_CASE("relative thresholding") {
  SelectorSolution s;
  s.target = 3;
  s.theta = Vector(4);
  s.theta << 0.5, 0.1, -1, 0;
  const SelectorSolution r = threshold_relative(s, 0.3);
  Vector expected(4);
  expected << 0.5, 0, -1, 0;
  CHECK(r.theta == expected);
  CHECK(threshold_relative(s, 1.0).theta.isZero());
  CHECK(threshold_relative(s, 0.0).theta == s.theta);
  CHECK(threshold_relative(r, 0.3).theta == r.theta);

  SelectorSolution z;
  z.theta = Vector::Zero(4);
  CHECK(threshold_relative(z, 0.5).theta.isZero());
  CHECK_THROWS_AS(threshold_relative(s, 1.5), ParameterError);
}

TEST_CASE("edge assembly rules") {
  const EdgeSet e_and = assemble_edge_set({{1}, {}}, Rule::And);
  const EdgeSet e_or = assemble_edge_set({{1}, {}}, Rule::Or);
  CHECK(e_and.empty());
  CHECK(e_or == EdgeSet(std::vector<Edge>{{0, 1}}));

  const std::vector<std::vector<int>> sym{{1, 2}, {0}, {0}};
  CHECK(assemble_edge_set(sym, Rule::And) == assemble_edge_set(sym, Rule::Or));

  const std::vector<std::vector<int>> full{{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
  CHECK(assemble_edge_set(full, Rule::And).size() == 6);
  CHECK(assemble_edge_set(full, Rule::Or).size() == 6);

  std::mt19937_64 rng(4);
  std::bernoulli_distribution coin(0.3);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<std::vector<int>> ne(7);
    for (int a = 0; a < 7; ++a)
      for (int b = 0; b < 7; ++b)
        if (a != b && coin(rng)) ne[a].push_back(b);
    CHECK(assemble_edge_set(ne, Rule::And).subset_of(assemble_edge_set(ne, Rule::Or)));
  }
  CHECK_THROWS_AS(assemble_edge_set({{0}, {}}, Rule::Or), ParameterError);
  CHECK_THROWS_AS(assemble_edge_set({{5}, {}}, Rule::Or), ParameterError);

  std::vector<SelectorSolution> sols(2);
  sols[0].target = 0;
  sols[0].theta = Vector(2);
  sols[0].theta << 0, 0.3;
  sols[1].target = 1;
  sols[1].theta = Vector::Zero(2);
  CHECK(edges_from_solutions(sols, Rule::Or).size() == 1);
  CHECK(edges_from_solutions(sols, Rule::And).empty());
}
