#pragma once

// Dense primal active-set method for
//   minimize 0.5 x'Hx + c'x  s.t.  lb <= x <= ub,  lo <= A x <= hi
// with H symmetric positive semidefinite (H = 0 is allowed).
//
// Variable bounds are handled by fixing variables, so the null-space
// computations only involve free columns. Stationarity at the returned
// point reads  Hx + c = A' y + z,  with y_j >= 0 on rows at their lower
// side, y_j <= 0 on rows at their upper side, and likewise for z.

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tlmp::detail {

struct QpModel {
  Eigen::MatrixXd H;
  Eigen::VectorXd c;
  Eigen::VectorXd lb, ub;
  Eigen::MatrixXd A;
  Eigen::VectorXd lo, hi;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_rows() const { return static_cast<int>(lo.size()); }
};

enum class QpStatus { kOptimal, kUnbounded, kIterationLimit };

struct QpResult {
  QpStatus status = QpStatus::kOptimal;
  Eigen::VectorXd x;
  Eigen::VectorXd y;  // row multipliers
  Eigen::VectorXd z;  // bound multipliers
  int iterations = 0;
};

// `x0` must satisfy every bound and row to within `feas_tol`.
QpResult solve_active_set(const QpModel& m, const Eigen::VectorXd& x0, double feas_tol);

// Minimizes the total violation of the rows of `m` (bounds are kept) from
// a starting point that satisfies the bounds. Returns the least-violation
// point and the per-row violation at that point.
struct Phase1Result {
  Eigen::VectorXd x;
  Eigen::VectorXd row_violation;  // signed: > 0 above hi, < 0 below lo
  double total_violation = 0.0;
  bool ok = true;
};
Phase1Result find_feasible_point(const QpModel& m, const Eigen::VectorXd& x0,
                                 double feas_tol);

}  // namespace tlmp::detail
