#include "lbmgraph/simplex.hpp"

#include "lbmgraph/kernels.hpp"

#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <span>

namespace lbm::lp {

std::string_view status_name(Status status) {
  switch (status) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::IterationLimit: return "iteration limit";
  }
  return "unknown";
}

namespace {

// Tableau layout, row-major with stride `width`:
//   rows 0..m-1  constraints, row m  reduced costs
//   columns [0, n) structural, [n, n+m) slacks, [n+m, n+m+n_art) artificials,
//   last column right-hand side (objective row holds -z there).
class Tableau {
 public:
  Tableau(const LinearProgram& lp, const Options& opt) : opt_(opt) {
    m_ = static_cast<int>(lp.A.rows());
    n_ = static_cast<int>(lp.A.cols());
    std::vector<int> art_rows;
    for (int i = 0; i < m_; ++i)
      if (lp.b(i) < 0) art_rows.push_back(i);
    n_art_ = static_cast<int>(art_rows.size());
    cols_ = n_ + m_ + n_art_;
    width_ = cols_ + 1;
    t_.assign(static_cast<std::size_t>(m_ + 1) * width_, 0.0);
    basis_.resize(m_);

    int next_art = 0;
    for (int i = 0; i < m_; ++i) {
      const double sign = lp.b(i) < 0 ? -1.0 : 1.0;
      double* row = row_ptr(i);
      for (int j = 0; j < n_; ++j) row[j] = sign * lp.A(i, j);
      row[n_ + i] = sign;
      row[cols_] = sign * lp.b(i);
      if (sign < 0) {
        const int a = n_ + m_ + next_art++;
        row[a] = 1.0;
        basis_[i] = a;
      } else {
        basis_[i] = n_ + i;
      }
    }
  }

  int rows() const { return m_; }
  int structural() const { return n_; }
  bool has_artificials() const { return n_art_ > 0; }
  bool is_artificial(int j) const { return j >= n_ + m_; }
  long pivots() const { return pivots_; }
  const std::vector<int>& basis() const { return basis_; }
  double rhs(int i) const { return t_[static_cast<std::size_t>(i) * width_ + cols_]; }
  double objective_value() const { return -row_ptr(m_)[cols_]; }

  // Loads reduced costs for cost vector `cost` (length cols_).
  void set_costs(const std::vector<double>& cost) {
    double* obj = row_ptr(m_);
    for (int j = 0; j < cols_; ++j) obj[j] = cost[j];
    obj[cols_] = 0.0;
    for (int i = 0; i < m_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb != 0.0) kernels::axpy(-cb, row_span(i), obj_span());
    }
  }

  std::vector<double> phase1_costs() const {
    std::vector<double> cost(cols_, 0.0);
    for (int j = n_ + m_; j < cols_; ++j) cost[j] = 1.0;
    return cost;
  }

  std::vector<double> phase2_costs(const Vector& c) const {
    std::vector<double> cost(cols_, 0.0);
    for (int j = 0; j < n_; ++j) cost[j] = c(j);
    return cost;
  }

  // Runs Bland's rule until optimal. Artificial columns never re-enter.
  Status iterate(long max_pivots) {
    const double* obj = row_ptr(m_);
    const int enter_limit = n_ + m_;
    while (true) {
      int enter = -1;
      for (int j = 0; j < enter_limit; ++j) {
        if (obj[j] < -opt_.feasibility_tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return Status::Optimal;

      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i) {
        const double a = at(i, enter);
        if (a <= opt_.pivot_tol) continue;
        const double ratio = std::max(rhs(i), 0.0) / a;
        const double tie = 1e-12 * std::max(1.0, best);
        if (leave < 0 || ratio < best - tie ||
            (ratio <= best + tie && basis_[i] < basis_[leave])) {
          if (ratio < best) best = ratio;
          leave = i;
        }
      }
      if (leave < 0) return Status::Unbounded;
      if (max_pivots > 0 && pivots_ >= max_pivots) return Status::IterationLimit;
      pivot(leave, enter);
    }
  }

  // After phase 1: pivot zero-level artificials out of the basis where a
  // non-artificial column has a usable entry.
  void expel_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (!is_artificial(basis_[i])) continue;
      int best = -1;
      double best_abs = opt_.pivot_tol * 1e3;
      for (int j = 0; j < n_ + m_; ++j) {
        const double a = std::fabs(at(i, j));
        if (a > best_abs) {
          best_abs = a;
          best = j;
        }
      }
      if (best >= 0) pivot(i, best);
    }
  }

  bool artificial_in_basis() const {
    for (int b : basis_)
      if (is_artificial(b)) return true;
    return false;
  }

 private:
  double* row_ptr(int i) { return t_.data() + static_cast<std::size_t>(i) * width_; }
  const double* row_ptr(int i) const { return t_.data() + static_cast<std::size_t>(i) * width_; }
  std::span<double> row_span(int i) { return {row_ptr(i), static_cast<std::size_t>(width_)}; }
  std::span<double> obj_span() { return row_span(m_); }
  double at(int i, int j) const { return row_ptr(i)[j]; }

  void pivot(int r, int e) {
    double* prow = row_ptr(r);
    const double inv = 1.0 / prow[e];
    for (int j = 0; j < width_; ++j) prow[j] *= inv;
    prow[e] = 1.0;
    const std::span<const double> pivot_row(prow, static_cast<std::size_t>(width_));
    for (int i = 0; i <= m_; ++i) {
      if (i == r) continue;
      double* row = row_ptr(i);
      const double f = row[e];
      if (f == 0.0) continue;
      kernels::axpy(-f, pivot_row, row_span(i));
      row[e] = 0.0;
    }
    basis_[r] = e;
    ++pivots_;
  }

  Options opt_;
  int m_ = 0, n_ = 0, n_art_ = 0, cols_ = 0, width_ = 0;
  long pivots_ = 0;
  std::vector<double> t_;
  std::vector<int> basis_;
};

// Recomputes basic values from the original constraints A x + s = b.
bool polish(const LinearProgram& lp, const std::vector<int>& basis, Vector& x) {
  const int m = static_cast<int>(lp.A.rows());
  const int n = static_cast<int>(lp.A.cols());
  Matrix B = Matrix::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    const int j = basis[i];
    if (j < n)
      B.col(i) = lp.A.col(j);
    else
      B(j - n, i) = 1.0;
  }
  Eigen::PartialPivLU<Matrix> lu(B);
  const Vector xb = lu.solve(lp.b);
  if (!xb.allFinite() || (B * xb - lp.b).lpNorm<Eigen::Infinity>() > 1e-9 * (1.0 + lp.b.lpNorm<Eigen::Infinity>()))
    return false;
  x.setZero(n);
  for (int i = 0; i < m; ++i)
    if (basis[i] < n) x(basis[i]) = std::max(xb(i), 0.0);
  return true;
}

}  // namespace

Result solve(const LinearProgram& lp, const Options& options) {
  const auto m = lp.A.rows();
  const auto n = lp.A.cols();
  if (lp.b.size() != m || lp.c.size() != n) throw ParameterError("LP dimensions do not agree");

  Tableau tab(lp, options);
  Result res;

  if (tab.has_artificials()) {
    tab.set_costs(tab.phase1_costs());
    const Status s = tab.iterate(options.max_pivots);
    res.pivots = tab.pivots();
    if (s == Status::IterationLimit) {
      res.status = s;
      return res;
    }
    const double scale = 1.0 + lp.b.lpNorm<Eigen::Infinity>();
    if (tab.objective_value() > options.feasibility_tol * scale) {
      res.status = Status::Infeasible;
      return res;
    }
    tab.expel_artificials();
  }

  tab.set_costs(tab.phase2_costs(lp.c));
  res.status = tab.iterate(options.max_pivots);
  res.pivots = tab.pivots();
  if (res.status != Status::Optimal) return res;

  res.basis = tab.basis();
  res.x.setZero(n);
  bool polished = false;
  if (!tab.artificial_in_basis()) polished = polish(lp, res.basis, res.x);
  if (!polished) {
    res.x.setZero(n);
    for (int i = 0; i < tab.rows(); ++i)
      if (res.basis[i] < tab.structural()) res.x(res.basis[i]) = std::max(tab.rhs(i), 0.0);
  }
  res.objective = lp.c.dot(res.x);
  return res;
}

}  // namespace lbm::lp
