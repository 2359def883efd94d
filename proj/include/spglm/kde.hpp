#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace spglm {

// Isotropic Gaussian kernel density estimate on R^q, one sample per row.
class GaussianKde {
 public:
  GaussianKde(Eigen::MatrixXd samples, double bandwidth);

  double bandwidth() const noexcept { return bandwidth_; }
  double density(const Eigen::RowVectorXd& x) const;
  Eigen::VectorXd density(const Eigen::MatrixXd& points) const;

 private:
  Eigen::MatrixXd samples_;
  double bandwidth_;
};

// Silverman's rule with the mean per-column standard deviation as the scale.
double silverman_bandwidth(const Eigen::MatrixXd& samples);

// Mean leave-one-out log density at each bandwidth; -inf when some sample
// gets zero density.
std::vector<double> loo_log_density(const Eigen::MatrixXd& samples, const std::vector<double>& bandwidths);

struct BandwidthChoice {
  double bandwidth;
  double silverman;
  std::vector<double> grid;
  std::vector<double> scores;
};

// Maximizes the leave-one-out log density over a log-spaced grid spanning
// [0.01, 10] times Silverman's value, plus Silverman's value itself.
BandwidthChoice select_bandwidth(const Eigen::MatrixXd& samples, std::size_t grid_points = 20);

}  // namespace spglm
