#include "spglm/dense_lp.hpp"

#include <vector>

#include "spglm/error.hpp"

namespace spglm {

LpResult maximize_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  if (c.size() != n || b.size() != m) fail(ErrorKind::Validation, "lp", "dimension mismatch");
  if ((b.array() < 0.0).any()) fail(ErrorKind::Infeasible, "lp", "right-hand side must be nonnegative");

  constexpr double tol = 1e-11;
  // tableau rows 0..m-1 constraints, row m objective (reduced costs, minimization form)
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
  t.topLeftCorner(m, n) = a;
  t.block(0, n, m, m).setIdentity();
  t.col(n + m).head(m) = b;
  t.row(m).head(n) = -c.transpose();
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;

  LpResult res;
  while (true) {
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < n + m; ++j) {
      if (t(m, j) < -tol) {
        enter = j;  // Bland: lowest index
        break;
      }
    }
    if (enter < 0) break;
    Eigen::Index leave = -1;
    double best = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (t(i, enter) > tol) {
        const double ratio = t(i, n + m) / t(i, enter);
        if (leave < 0 || ratio < best - tol ||
            (ratio <= best + tol && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
          leave = i;
          best = ratio;
        }
      }
    }
    if (leave < 0) {
      res.status = LpStatus::Unbounded;
      return res;
    }
    t.row(leave) /= t(leave, enter);
    for (Eigen::Index i = 0; i <= m; ++i) {
      if (i != leave && t(i, enter) != 0.0) t.row(i) -= t(i, enter) * t.row(leave);
    }
    basis[static_cast<std::size_t>(leave)] = enter;
    ++res.pivots;
  }
  res.x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (basis[static_cast<std::size_t>(i)] < n) res.x(basis[static_cast<std::size_t>(i)]) = t(i, n + m);
  }
  res.value = c.dot(res.x);
  return res;
}

}  // namespace spglm
