#include "spglm/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <queue>

#include "spglm/csv.hpp"
#include "spglm/error.hpp"

namespace spglm {

WeightMatrix::WeightMatrix(std::size_t n_train, std::size_t k, std::vector<std::size_t> indices)
    : n_train_(n_train), k_(k), indices_(std::move(indices)) {
  if (k_ == 0) fail(ErrorKind::Validation, "weights", "k must be positive");
  if (indices_.size() % k_ != 0) fail(ErrorKind::Validation, "weights", "index list is not a multiple of k");
  for (std::size_t m = 0; m < rows(); ++m) {
    auto r = row(m);
    for (std::size_t j = 0; j < k_; ++j) {
      if (r[j] >= n_train_) fail(ErrorKind::Validation, "weights", "neighbor index out of range");
      if (j > 0 && r[j] <= r[j - 1]) fail(ErrorKind::Validation, "weights", "row indices must be strictly increasing");
    }
  }
}

Eigen::VectorXd WeightMatrix::apply(const Eigen::VectorXd& y) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows()));
  for (std::size_t m = 0; m < rows(); ++m) {
    double s = 0.0;
    for (std::size_t n : row(m)) s += y(static_cast<Eigen::Index>(n));
    out(static_cast<Eigen::Index>(m)) = s / static_cast<double>(k_);
  }
  return out;
}

Eigen::VectorXd WeightMatrix::apply_transpose(const Eigen::VectorXd& w) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_train_));
  for (std::size_t m = 0; m < rows(); ++m) {
    const double share = w(static_cast<Eigen::Index>(m)) / static_cast<double>(k_);
    for (std::size_t n : row(m)) out(static_cast<Eigen::Index>(n)) += share;
  }
  return out;
}

Eigen::MatrixXd WeightMatrix::to_dense() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(n_train_));
  for (std::size_t m = 0; m < rows(); ++m) {
    for (std::size_t n : row(m)) out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) = weight();
  }
  return out;
}

std::vector<std::size_t> nearest_with_ties(const KdTree& tree, std::span<const double> query, std::size_t k,
                                           Rng& rng, std::size_t exclude) {
  // one extra neighbor reveals whether the k-th distance is shared
  auto nn = tree.knn(query, k + 1, exclude);
  if (nn.size() < k) fail(ErrorKind::Validation, "weights", "fewer candidate points than k");
  std::vector<std::size_t> chosen;
  chosen.reserve(k);
  const double kth = nn[k - 1].dist2;
  if (nn.size() == k || nn[k].dist2 > kth) {
    for (std::size_t j = 0; j < k; ++j) chosen.push_back(nn[j].index);
  } else {
    std::vector<std::size_t> tied;
    for (const auto& c : tree.within(query, kth, exclude)) {
      if (c.dist2 < kth) chosen.push_back(c.index);
      else if (c.dist2 == kth) tied.push_back(c.index);
    }
    const std::size_t need = k - chosen.size();
    for (std::size_t j = 0; j < need; ++j) {
      std::uniform_int_distribution<std::size_t> pick(j, tied.size() - 1);
      std::swap(tied[j], tied[pick(rng)]);
      chosen.push_back(tied[j]);
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

WeightMatrix build_weight_matrix(const PointMatrix& train_locations, const PointMatrix& target_locations,
                                 std::size_t k, Rng& rng) {
  const auto n = static_cast<std::size_t>(train_locations.rows());
  if (k < 1 || k > n) {
    fail(ErrorKind::Validation, "weights",
         "k = " + std::to_string(k) + " must lie in [1, N] with N = " + std::to_string(n));
  }
  if (train_locations.cols() != target_locations.cols()) {
    fail(ErrorKind::Validation, "weights", "training and target locations differ in dimension");
  }
  const KdTree tree(train_locations);
  std::vector<std::size_t> indices;
  indices.reserve(static_cast<std::size_t>(target_locations.rows()) * k);
  for (Eigen::Index m = 0; m < target_locations.rows(); ++m) {
    auto row = nearest_with_ties(tree, point(target_locations, m), k, rng);
    indices.insert(indices.end(), row.begin(), row.end());
  }
  return WeightMatrix(n, k, std::move(indices));
}

WeightMatrix build_weight_matrix(const TrainingSet& train, const TargetSet& targets, std::size_t k,
                                 std::uint64_t seed) {
  Rng rng(seed);
  return build_weight_matrix(train.locations(), targets.locations(), k, rng);
}

StepRule StepRule::inverse_sqrt() { return StepRule(); }

StepRule StepRule::sequence(std::vector<double> values) {
  if (values.empty()) fail(ErrorKind::Validation, "k_selection", "step sequence is empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
      fail(ErrorKind::Validation, "k_selection", "step sequence must be positive");
    }
    if (i > 0 && values[i] > values[i - 1]) {
      fail(ErrorKind::Validation, "k_selection", "step sequence must be nonincreasing");
    }
  }
  StepRule rule;
  rule.values_ = std::move(values);
  return rule;
}

double StepRule::operator()(std::size_t t) const {
  if (values_.empty()) return 1.0 / std::sqrt(static_cast<double>(t));
  if (t == 0 || t > values_.size()) {
    fail(ErrorKind::Validation, "k_selection", "step sequence exhausted at t = " + std::to_string(t));
  }
  return values_[t - 1];
}

std::string StepRule::describe() const {
  return values_.empty() ? "inverse_sqrt" : "sequence[" + std::to_string(values_.size()) + "]";
}

KSelectionTrace select_adaptive_k(const PointMatrix& train_in_order, const PointMatrix& targets,
                                  const StepRule& rule) {
  const auto n_total = static_cast<std::size_t>(train_in_order.rows());
  if (n_total == 0) fail(ErrorKind::Validation, "k_selection", "training sequence is empty");
  if (targets.rows() == 0) fail(ErrorKind::Validation, "k_selection", "no targets");
  if (train_in_order.cols() != targets.cols()) {
    fail(ErrorKind::Validation, "k_selection", "training and target locations differ in dimension");
  }
  const auto m_total = static_cast<std::size_t>(targets.rows());

  // Per target, `lower` holds the k smallest distances (max-heap) and `upper`
  // the rest (min-heap), so the k-th and (k+1)-th distances are heap tops.
  using MaxHeap = std::priority_queue<double>;
  using MinHeap = std::priority_queue<double, std::vector<double>, std::greater<>>;
  std::vector<MaxHeap> lower(m_total);
  std::vector<MinHeap> upper(m_total);

  KSelectionTrace trace;
  trace.rule = rule.describe();
  trace.rows.reserve(n_total);
  std::size_t k = 1;

  for (std::size_t n = 0; n < n_total; ++n) {
    const auto s = point(train_in_order, static_cast<Eigen::Index>(n));
    for (std::size_t m = 0; m < m_total; ++m) {
      const double d = euclidean_distance(point(targets, static_cast<Eigen::Index>(m)), s);
      if (lower[m].size() < k) {
        lower[m].push(d);
      } else if (d < lower[m].top()) {
        upper[m].push(lower[m].top());
        lower[m].pop();
        lower[m].push(d);
      } else {
        upper[m].push(d);
      }
    }
    if (n > 0) {
      // prefix holds n + 1 >= k + 1 points, so every upper heap is nonempty
      double r_next = 0.0;
      for (std::size_t m = 0; m < m_total; ++m) r_next = std::max(r_next, upper[m].top());
      if (r_next <= rule(k)) {
        ++k;
        for (std::size_t m = 0; m < m_total; ++m) {
          lower[m].push(upper[m].top());
          upper[m].pop();
        }
      }
    }
    double r = 0.0;
    for (std::size_t m = 0; m < m_total; ++m) r = std::max(r, lower[m].top());
    trace.rows.push_back({n + 1, k, r});
  }
  return trace;
}

double max_nn_radius(const PointMatrix& prefix, const PointMatrix& targets, std::size_t t) {
  const auto n = static_cast<std::size_t>(prefix.rows());
  if (t < 1 || t > n) {
    fail(ErrorKind::Validation, "k_selection",
         "t = " + std::to_string(t) + " must lie in [1, prefix length = " + std::to_string(n) + "]");
  }
  const KdTree tree(prefix);
  double r2 = 0.0;
  for (Eigen::Index m = 0; m < targets.rows(); ++m) {
    r2 = std::max(r2, tree.knn(point(targets, m), t).back().dist2);
  }
  return std::sqrt(r2);
}

std::vector<std::size_t> self_nn_map(const PointMatrix& locations, Rng& rng) {
  const auto n = static_cast<std::size_t>(locations.rows());
  if (n < 2) fail(ErrorKind::Validation, "variance", "self nearest neighbors need at least two training points");
  const KdTree tree(locations);
  std::vector<std::size_t> nn(n);
  for (std::size_t i = 0; i < n; ++i) {
    nn[i] = nearest_with_ties(tree, point(locations, static_cast<Eigen::Index>(i)), 1, rng, i).front();
  }
  return nn;
}

void write_trace_csv(const KSelectionTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Validation, "k_selection", "cannot write '" + path + "'");
  out << "N,k,R\n";
  for (const auto& r : trace.rows) out << r.n << ',' << r.k << ',' << format_double(r.radius) << '\n';
}

}  // namespace spglm
