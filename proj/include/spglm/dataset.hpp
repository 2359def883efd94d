#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <filesystem>
#include <span>

namespace spglm {

// One spatial location per row.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::span<const double> point(const PointMatrix& points, Eigen::Index row) {
  return {points.data() + row * points.cols(), static_cast<std::size_t>(points.cols())};
}

double euclidean_distance(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);

// Observed (location, covariates, response) triples. Row order is significant:
// the adaptive neighbor recursion consumes rows in order.
class TrainingSet {
 public:
  TrainingSet(PointMatrix locations, Eigen::MatrixXd covariates, Eigen::VectorXd responses);

  std::size_t size() const noexcept { return static_cast<std::size_t>(responses_.size()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(locations_.cols()); }
  std::size_t num_covariates() const noexcept { return static_cast<std::size_t>(covariates_.cols()); }

  const PointMatrix& locations() const noexcept { return locations_; }
  const Eigen::MatrixXd& covariates() const noexcept { return covariates_; }
  const Eigen::VectorXd& responses() const noexcept { return responses_; }

 private:
  PointMatrix locations_;
  Eigen::MatrixXd covariates_;
  Eigen::VectorXd responses_;
};

// Target locations and covariates. Locations are pairwise distinct and the
// covariate matrix has full column rank.
class TargetSet {
 public:
  TargetSet(PointMatrix locations, Eigen::MatrixXd covariates);

  std::size_t size() const noexcept { return static_cast<std::size_t>(locations_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(locations_.cols()); }
  std::size_t num_covariates() const noexcept { return static_cast<std::size_t>(covariates_.cols()); }

  const PointMatrix& locations() const noexcept { return locations_; }
  const Eigen::MatrixXd& covariates() const noexcept { return covariates_; }

 private:
  PointMatrix locations_;
  Eigen::MatrixXd covariates_;
};

// CSV layout: header s1..sd,x1..xP,y (training) or s1..sd,x1..xP (target).
TrainingSet load_training(const std::filesystem::path& path);
TargetSet load_target(const std::filesystem::path& path);
void save_training(const TrainingSet& data, const std::filesystem::path& path);
void save_target(const TargetSet& data, const std::filesystem::path& path);

}  // namespace spglm
