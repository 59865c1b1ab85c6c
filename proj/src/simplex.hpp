#pragma once

// Dense two-phase simplex (Bland's rule) for the tiny feasibility programs of
// the optimizer. Internal to the library.

#include <vector>

namespace typedld::detail {

struct LpResult {
  enum class Status { optimal, infeasible, unbounded };
  Status status = Status::infeasible;
  std::vector<double> x;
  double objective = 0.0;
  /// Phase-1 optimum: minimal sum of artificial variables (0 when feasible).
  double infeasibility = 0.0;
};

/// minimize c.x subject to A x = b, x >= 0.
LpResult solve_lp(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                  const std::vector<double>& c);

}  // namespace typedld::detail
