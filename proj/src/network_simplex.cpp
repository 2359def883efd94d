#include "spglm/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "spglm/error.hpp"

namespace spglm {

namespace {

class NetworkSimplex {
 public:
  NetworkSimplex(const std::vector<std::int64_t>& supply, const std::vector<std::int64_t>& demand,
                 const CostMatrix& cost)
      : n1_(supply.size()),
        n2_(demand.size()),
        root_(n1_ + n2_),
        arcs_(n1_ * n2_),
        cost_(cost) {
    const std::size_t nodes = n1_ + n2_ + 1;
    parent_.assign(nodes, kNone);
    pred_.assign(nodes, 0);
    up_.assign(nodes, false);
    flow_.assign(nodes, 0);
    pi_.assign(nodes, 0.0);
    depth_.assign(nodes, 0);
    first_child_.assign(nodes, kNone);
    next_sib_.assign(nodes, kNone);
    prev_sib_.assign(nodes, kNone);

    const double max_cost = cost_.size() > 0 ? cost_.maxCoeff() : 0.0;
    big_ = (max_cost > 0.0 ? max_cost : 1.0) * static_cast<double>(nodes) + 1.0;
    eps_ = 1e-13 * big_;

    for (std::size_t v = 0; v < n1_ + n2_; ++v) {
      const bool is_source = v < n1_;
      parent_[v] = root_;
      pred_[v] = arcs_ + v;
      up_[v] = is_source;
      flow_[v] = is_source ? supply[v] : demand[v - n1_];
      pi_[v] = is_source ? -big_ : big_;
      depth_[v] = 1;
      attach(v, root_);
    }
    block_ = std::max<std::size_t>(10, static_cast<std::size_t>(std::sqrt(static_cast<double>(arcs_))));
  }

  TransportSolution run() {
    TransportSolution out;
    while (true) {
      const std::size_t in = find_entering();
      if (in == kNone) {
        // guard against drift accumulated by incremental potential updates
        recompute_potentials();
        if (find_entering() == kNone) break;
        continue;
      }
      pivot(in);
      ++out.pivots;
      if (out.pivots % (n1_ + n2_ + 1) == 0) recompute_potentials();
    }
    for (std::size_t v = 0; v < n1_ + n2_; ++v) {
      if (pred_[v] >= arcs_) {
        if (flow_[v] != 0) fail(ErrorKind::Infeasible, "transport", "artificial flow left in optimal tree");
        continue;
      }
      if (flow_[v] == 0) continue;
      const std::size_t i = pred_[v] / n2_;
      const std::size_t j = pred_[v] % n2_;
      out.cost += static_cast<double>(flow_[v]) * cost_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      out.plan.push_back({i, j, flow_[v]});
    }
    std::sort(out.plan.begin(), out.plan.end(), [](const TransportArc& a, const TransportArc& b) {
      return a.source != b.source ? a.source < b.source : a.sink < b.sink;
    });
    return out;
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  std::size_t source_of(std::size_t arc) const {
    if (arc < arcs_) return arc / n2_;
    const std::size_t v = arc - arcs_;
    return v < n1_ ? v : root_;
  }
  std::size_t target_of(std::size_t arc) const {
    if (arc < arcs_) return n1_ + arc % n2_;
    const std::size_t v = arc - arcs_;
    return v < n1_ ? root_ : v;
  }
  double cost_of(std::size_t arc) const {
    if (arc < arcs_) {
      return cost_(static_cast<Eigen::Index>(arc / n2_), static_cast<Eigen::Index>(arc % n2_));
    }
    return big_;
  }

  void attach(std::size_t x, std::size_t p) {
    next_sib_[x] = first_child_[p];
    prev_sib_[x] = kNone;
    if (first_child_[p] != kNone) prev_sib_[first_child_[p]] = x;
    first_child_[p] = x;
  }
  void detach(std::size_t x) {
    const std::size_t p = parent_[x];
    if (prev_sib_[x] != kNone) next_sib_[prev_sib_[x]] = next_sib_[x];
    else first_child_[p] = next_sib_[x];
    if (next_sib_[x] != kNone) prev_sib_[next_sib_[x]] = prev_sib_[x];
    next_sib_[x] = prev_sib_[x] = kNone;
  }

  std::size_t find_entering() {
    double best = -eps_;
    std::size_t chosen = kNone;
    std::size_t count = block_;
    std::size_t i = next_arc_ / n2_;
    std::size_t j = next_arc_ % n2_;
    for (std::size_t scanned = 0; scanned < arcs_; ++scanned) {
      const double rc = cost_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) + pi_[i] - pi_[n1_ + j];
      if (rc < best) {
        best = rc;
        chosen = i * n2_ + j;
      }
      if (++j == n2_) {
        j = 0;
        if (++i == n1_) i = 0;
      }
      if (--count == 0) {
        if (chosen != kNone) {
          next_arc_ = i * n2_ + j;
          return chosen;
        }
        count = block_;
      }
    }
    next_arc_ = i * n2_ + j;
    return chosen;
  }

  void pivot(std::size_t in) {
    const std::size_t u = source_of(in);
    const std::size_t v = target_of(in);
    const double rc = cost_of(in) + pi_[u] - pi_[v];

    std::size_t a = u, b = v;
    while (a != b) {
      if (depth_[a] > depth_[b]) a = parent_[a];
      else if (depth_[b] > depth_[a]) b = parent_[b];
      else {
        a = parent_[a];
        b = parent_[b];
      }
    }
    const std::size_t join = a;

    // Cycle orientation: u -> v along the entering arc, then v up to join and
    // join down to u. Decreasing arcs bound the step; ties prefer the last
    // blocking arc in cycle order starting from join.
    std::int64_t delta = std::numeric_limits<std::int64_t>::max();
    std::size_t out = kNone;
    int side = 0;
    for (std::size_t x = u; x != join; x = parent_[x]) {
      if (up_[x] && flow_[x] < delta) {
        delta = flow_[x];
        out = x;
        side = 1;
      }
    }
    for (std::size_t x = v; x != join; x = parent_[x]) {
      if (!up_[x] && flow_[x] <= delta) {
        delta = flow_[x];
        out = x;
        side = 2;
      }
    }
    if (out == kNone) fail(ErrorKind::Infeasible, "transport", "unbounded pivot cycle");

    if (delta > 0) {
      for (std::size_t x = u; x != join; x = parent_[x]) flow_[x] += up_[x] ? -delta : delta;
      for (std::size_t x = v; x != join; x = parent_[x]) flow_[x] += up_[x] ? delta : -delta;
    }

    const std::size_t x0 = side == 1 ? u : v;
    const std::size_t attach_to = side == 1 ? v : u;
    path_.clear();
    for (std::size_t x = x0;; x = parent_[x]) {
      path_.push_back(x);
      if (x == out) break;
    }
    old_pred_.resize(path_.size());
    old_up_.resize(path_.size());
    old_flow_.resize(path_.size());
    for (std::size_t i = 0; i < path_.size(); ++i) {
      old_pred_[i] = pred_[path_[i]];
      old_up_[i] = up_[path_[i]];
      old_flow_[i] = flow_[path_[i]];
    }
    for (std::size_t x : path_) detach(x);
    for (std::size_t i = path_.size() - 1; i >= 1; --i) {
      const std::size_t x = path_[i];
      parent_[x] = path_[i - 1];
      pred_[x] = old_pred_[i - 1];
      up_[x] = !old_up_[i - 1];
      flow_[x] = old_flow_[i - 1];
      attach(x, path_[i - 1]);
    }
    parent_[x0] = attach_to;
    pred_[x0] = in;
    up_[x0] = (x0 == u);
    flow_[x0] = delta;
    attach(x0, attach_to);

    const double sigma = (x0 == v) ? rc : -rc;
    stack_.clear();
    stack_.push_back(x0);
    while (!stack_.empty()) {
      const std::size_t x = stack_.back();
      stack_.pop_back();
      pi_[x] += sigma;
      depth_[x] = depth_[parent_[x]] + 1;
      for (std::size_t c = first_child_[x]; c != kNone; c = next_sib_[c]) stack_.push_back(c);
    }
  }

  void recompute_potentials() {
    stack_.clear();
    for (std::size_t c = first_child_[root_]; c != kNone; c = next_sib_[c]) stack_.push_back(c);
    while (!stack_.empty()) {
      const std::size_t x = stack_.back();
      stack_.pop_back();
      const std::size_t p = parent_[x];
      // tree arcs have zero reduced cost: c + pi_src - pi_tgt = 0
      pi_[x] = up_[x] ? pi_[p] - cost_of(pred_[x]) : pi_[p] + cost_of(pred_[x]);
      depth_[x] = depth_[p] + 1;
      for (std::size_t c = first_child_[x]; c != kNone; c = next_sib_[c]) stack_.push_back(c);
    }
  }

  std::size_t n1_, n2_, root_, arcs_;
  const CostMatrix& cost_;
  double big_ = 0.0;
  double eps_ = 0.0;
  std::size_t block_ = 10;
  std::size_t next_arc_ = 0;

  std::vector<std::size_t> parent_, pred_;
  std::vector<bool> up_;
  std::vector<std::int64_t> flow_;
  std::vector<double> pi_;
  std::vector<std::size_t> depth_;
  std::vector<std::size_t> first_child_, next_sib_, prev_sib_;

  std::vector<std::size_t> path_, old_pred_, stack_;
  std::vector<bool> old_up_;
  std::vector<std::int64_t> old_flow_;
};

}  // namespace

TransportSolution solve_transportation(const std::vector<std::int64_t>& supply,
                                       const std::vector<std::int64_t>& demand, const CostMatrix& cost) {
  if (cost.rows() != static_cast<Eigen::Index>(supply.size()) ||
      cost.cols() != static_cast<Eigen::Index>(demand.size())) {
    fail(ErrorKind::Validation, "transport", "cost matrix shape does not match supplies and demands");
  }
  if (std::any_of(supply.begin(), supply.end(), [](std::int64_t s) { return s <= 0; }) ||
      std::any_of(demand.begin(), demand.end(), [](std::int64_t s) { return s <= 0; })) {
    fail(ErrorKind::Validation, "transport", "supplies and demands must be strictly positive");
  }
  if (std::accumulate(supply.begin(), supply.end(), std::int64_t{0}) !=
      std::accumulate(demand.begin(), demand.end(), std::int64_t{0})) {
    fail(ErrorKind::MassImbalance, "transport", "total supply differs from total demand");
  }
  if ((cost.array() < 0.0).any() || !cost.allFinite()) {
    fail(ErrorKind::Validation, "transport", "costs must be finite and nonnegative");
  }
  if (supply.empty()) return {};
  NetworkSimplex solver(supply, demand, cost);
  return solver.run();
}

}  // namespace spglm
