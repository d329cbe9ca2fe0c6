#pragma once

// Independent reference computations used only by the tests.

#include "lbmgraph/common.hpp"

#include <Eigen/LU>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace oracle {

using lbm::Matrix;
using lbm::Vector;

/// min c'x s.t. A x <= b, x >= 0 by enumerating every vertex of the
/// feasible polyhedron (all nonsingular choices of n active constraints).
inline std::optional<double> lp_vertex_min(const Matrix& A, const Vector& b, const Vector& c, double tol = 1e-9) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  Matrix rows(m + n, n);
  Vector rhs(m + n);
  rows.topRows(m) = A;
  rhs.head(m) = b;
  rows.bottomRows(n) = -Matrix::Identity(n, n);
  rhs.tail(n).setZero();
  const int total = m + n;

  std::optional<double> best;
  std::vector<int> pick(n);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n) {
      Matrix M(n, n);
      Vector r(n);
      for (int i = 0; i < n; ++i) {
        M.row(i) = rows.row(pick[i]);
        r(i) = rhs(pick[i]);
      }
      Eigen::FullPivLU<Matrix> lu(M);
      if (lu.rank() < n) return;
      const Vector x = lu.solve(r);
      if (((rows * x - rhs).array() > tol * (1.0 + rhs.cwiseAbs().maxCoeff())).any()) return;
      const double v = c.dot(x);
      if (!best || v < *best) best = v;
      return;
    }
    for (int i = start; i <= total - (n - depth); ++i) {
      pick[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

/// Iterative proportional scaling over the cliques {a,b} of the support and
/// the singletons, run to the given tolerance.
inline Matrix ips_precision(const Matrix& S, const std::vector<std::pair<int, int>>& edges, double tol = 1e-10,
                            int max_iter = 100000) {
  const int K = static_cast<int>(S.rows());
  std::vector<std::vector<int>> cliques;
  for (auto [a, b] : edges) cliques.push_back({a, b});
  for (int k = 0; k < K; ++k) cliques.push_back({k});
  Matrix D = Matrix::Identity(K, K);
  for (int k = 0; k < K; ++k) D(k, k) = 1.0 / S(k, k);
  for (int it = 0; it < max_iter; ++it) {
    double change = 0.0;
    for (const auto& c : cliques) {
      const int m = static_cast<int>(c.size());
      const Matrix W = D.inverse();
      Matrix Sc(m, m), Wc(m, m);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          Sc(i, j) = S(c[i], c[j]);
          Wc(i, j) = W(c[i], c[j]);
        }
      const Matrix upd = Sc.inverse() - Wc.inverse();
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          D(c[i], c[j]) += upd(i, j);
          change = std::max(change, std::fabs(upd(i, j)));
        }
    }
    if (change < tol) break;
  }
  return D;
}

}  // namespace oracle
