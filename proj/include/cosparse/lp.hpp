#pragma once

#include "cosparse/common.hpp"

#include <vector>

namespace cosparse::lp {

enum class Status { optimal, infeasible, unbounded, pivot_limit };

struct Result {
  Status status = Status::optimal;
  Vector x;
  double objective = 0.0;
  /// Basic column per surviving row (original column indices).
  std::vector<Index> basis;
  /// Reduced costs of all original columns at termination.
  Vector reduced_costs;
  long pivots = 0;
};

/**
 * Dense two-phase tableau simplex for
 *
 *   minimize c^T x  subject to  A x = b,  x >= 0.
 *
 * Bland's rule picks both the entering and the leaving column, so the method
 * terminates on degenerate problems. At optimality the basic solution is
 * recomputed from the original (A, b) with a full-pivot LU to shed the
 * round-off accumulated by the tableau updates.
 */
Result solve_standard_form(Matrix const &a, Vector const &b, Vector const &c, long max_pivots = 200000);

} // namespace cosparse::lp
