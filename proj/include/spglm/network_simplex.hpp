#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace spglm {

using CostMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TransportArc {
  std::size_t source;
  std::size_t sink;
  std::int64_t flow;
};

struct TransportSolution {
  double cost = 0.0;  // sum of flow * unit cost
  std::vector<TransportArc> plan;
  std::size_t pivots = 0;
};

// Exact minimum-cost transportation on the complete bipartite graph between
// sources (supply) and sinks (demand) by primal network simplex. Supplies and
// demands are strictly positive integers with equal totals; costs are
// nonnegative. Uses a big-M artificial root, block-search pricing and the
// strongly feasible leaving-arc rule, so degenerate pivots cannot cycle.
TransportSolution solve_transportation(const std::vector<std::int64_t>& supply,
                                       const std::vector<std::int64_t>& demand, const CostMatrix& cost);

}  // namespace spglm
