#pragma once

#include <Eigen/Dense>

namespace hullbound {

/// Result of min c^T z subject to A z = b, z >= 0.
struct LpResult {
  enum class Status { Optimal, Infeasible, Unbounded };
  Status status = Status::Infeasible;
  Eigen::VectorXd solution;
  double objective = 0.0;
  /// Dual multipliers y with A^T y <= c at optimality (empty otherwise).
  Eigen::VectorXd dual;
  int pivots = 0;
};

/// Dense two-phase tableau simplex. Dantzig pricing, switching to Bland's rule
/// after a run of degenerate pivots.
LpResult solve_standard_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                           double tol = 1e-9);

}  // namespace hullbound
