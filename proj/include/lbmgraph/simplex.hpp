#pragma once

#include "lbmgraph/common.hpp"

#include <string_view>
#include <vector>

namespace lbm::lp {

/// minimize c'x  subject to  A x <= b,  x >= 0.  b may have any sign.
struct LinearProgram {
  Matrix A;
  Vector b;
  Vector c;
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

std::string_view status_name(Status status);

struct Options {
  double feasibility_tol = 1e-8;
  double pivot_tol = 1e-11;
  long max_pivots = 0;  // 0 = unlimited
};

struct Result {
  Status status = Status::Infeasible;
  Vector x;
  double objective = 0.0;
  long pivots = 0;
  /// Basic variable per constraint row. Indices < n are structural, n + i is
  /// the slack of row i.
  std::vector<int> basis;
};

/// Dense two-phase primal simplex on a full tableau with Bland's
/// smallest-index rule for both the entering and the leaving variable.
/// At termination the basic solution is recomputed from the original data by
/// an LU solve on the final basis.
Result solve(const LinearProgram& lp, const Options& options = {});

}  // namespace lbm::lp
