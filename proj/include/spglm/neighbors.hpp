#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spglm/dataset.hpp"
#include "spglm/kdtree.hpp"

namespace spglm {

using Rng = std::mt19937_64;

// M x N row-stochastic k-nearest-neighbor averaging operator. Row m puts
// weight 1/k on each of its k neighbor indices.
class WeightMatrix {
 public:
  WeightMatrix(std::size_t n_train, std::size_t k, std::vector<std::size_t> indices);

  std::size_t rows() const noexcept { return indices_.size() / k_; }
  std::size_t cols() const noexcept { return n_train_; }
  std::size_t k() const noexcept { return k_; }
  double weight() const noexcept { return 1.0 / static_cast<double>(k_); }

  std::span<const std::size_t> row(std::size_t m) const { return {indices_.data() + m * k_, k_}; }

  Eigen::VectorXd apply(const Eigen::VectorXd& y) const;            // Psi y
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& w) const;  // Psi^T w
  Eigen::MatrixXd to_dense() const;

 private:
  std::size_t n_train_;
  std::size_t k_;
  std::vector<std::size_t> indices_;
};

// The k nearest points of `tree` to `query`. Candidates tied at the k-th
// distance are subsampled uniformly at random; the result is sorted by index.
std::vector<std::size_t> nearest_with_ties(const KdTree& tree, std::span<const double> query, std::size_t k,
                                           Rng& rng, std::size_t exclude = KdTree::kNoExclude);

WeightMatrix build_weight_matrix(const PointMatrix& train_locations, const PointMatrix& target_locations,
                                 std::size_t k, Rng& rng);
WeightMatrix build_weight_matrix(const TrainingSet& train, const TargetSet& targets, std::size_t k,
                                 std::uint64_t seed);

// Positive step sequence a_t (t >= 1) driving the adaptive neighbor recursion.
class StepRule {
 public:
  static StepRule inverse_sqrt();
  static StepRule sequence(std::vector<double> values);  // positive, nonincreasing

  double operator()(std::size_t t) const;
  std::string describe() const;

 private:
  StepRule() = default;
  std::vector<double> values_;  // empty means 1/sqrt(t)
};

struct KTraceRow {
  std::size_t n;
  std::size_t k;
  double radius;  // R_{n,k_n}
};

struct KSelectionTrace {
  std::vector<KTraceRow> rows;
  std::string rule;

  std::size_t final_k() const { return rows.back().k; }
  const KTraceRow& at(std::size_t n) const { return rows.at(n - 1); }
};

// k_1 = 1 and k_{N+1} = k_N + 1 exactly when R_{N+1,k_N+1} <= a_{k_N}, where
// R_{N,t} is the largest distance from a target to its t-th nearest point
// among the first N training points (consumed in the given order).
KSelectionTrace select_adaptive_k(const PointMatrix& train_in_order, const PointMatrix& targets,
                                  const StepRule& rule);

// R_{N,t} for the given prefix.
double max_nn_radius(const PointMatrix& prefix, const PointMatrix& targets, std::size_t t);

// Nearest other training point of each training point (ties broken with rng).
std::vector<std::size_t> self_nn_map(const PointMatrix& locations, Rng& rng);

void write_trace_csv(const KSelectionTrace& trace, const std::string& path);

}  // namespace spglm
