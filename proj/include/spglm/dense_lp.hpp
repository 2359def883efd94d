#pragma once

#include <Eigen/Dense>

namespace spglm {

enum class LpStatus { Optimal, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Optimal;
  double value = 0.0;
  Eigen::VectorXd x;
  int pivots = 0;
};

// max c^T x subject to A x <= b, x >= 0, with b >= 0 so the slack basis is
// feasible. Dense tableau simplex with Bland's rule; meant for the small
// verification problems in this library, not for large instances.
LpResult maximize_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

}  // namespace spglm
