#include "spglm/kde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "spglm/error.hpp"

namespace spglm {

GaussianKde::GaussianKde(Eigen::MatrixXd samples, double bandwidth)
    : samples_(std::move(samples)), bandwidth_(bandwidth) {
  if (samples_.rows() < 1 || samples_.cols() < 1) fail(ErrorKind::Validation, "kde", "empty sample");
  if (!(bandwidth_ > 0.0) || !std::isfinite(bandwidth_)) fail(ErrorKind::Validation, "kde", "bandwidth must be positive");
}

double GaussianKde::density(const Eigen::RowVectorXd& x) const {
  const double h2 = bandwidth_ * bandwidth_;
  const double q = static_cast<double>(samples_.cols());
  const double norm = std::pow(2.0 * std::numbers::pi * h2, -0.5 * q) / static_cast<double>(samples_.rows());
  double s = 0.0;
  for (Eigen::Index i = 0; i < samples_.rows(); ++i) {
    s += std::exp(-0.5 * (samples_.row(i) - x).squaredNorm() / h2);
  }
  return norm * s;
}

Eigen::VectorXd GaussianKde::density(const Eigen::MatrixXd& points) const {
  Eigen::VectorXd out(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) out(i) = density(Eigen::RowVectorXd(points.row(i)));
  return out;
}

double silverman_bandwidth(const Eigen::MatrixXd& samples) {
  const auto n = static_cast<double>(samples.rows());
  const auto q = static_cast<double>(samples.cols());
  if (samples.rows() < 2) fail(ErrorKind::Validation, "kde", "need at least two samples for a bandwidth");
  double sd_sum = 0.0;
  for (Eigen::Index c = 0; c < samples.cols(); ++c) {
    const double mean = samples.col(c).mean();
    sd_sum += std::sqrt((samples.col(c).array() - mean).square().sum() / (n - 1.0));
  }
  const double sd = sd_sum / q;
  if (!(sd > 0.0)) fail(ErrorKind::Validation, "kde", "samples have zero spread");
  return sd * std::pow(4.0 / ((q + 2.0) * n), 1.0 / (q + 4.0));
}

std::vector<double> loo_log_density(const Eigen::MatrixXd& samples, const std::vector<double>& bandwidths) {
  const Eigen::Index n = samples.rows();
  const std::size_t g = bandwidths.size();
  if (n < 2) fail(ErrorKind::Validation, "kde", "leave-one-out needs at least two samples");
  std::vector<double> inv2h2(g);
  for (std::size_t b = 0; b < g; ++b) inv2h2[b] = 0.5 / (bandwidths[b] * bandwidths[b]);

  // sums[i * g + b]: kernel mass at sample i from the others, bandwidth b
  std::vector<double> sums(static_cast<std::size_t>(n) * g, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d2 = (samples.row(i) - samples.row(j)).squaredNorm();
      for (std::size_t b = 0; b < g; ++b) {
        const double k = std::exp(-d2 * inv2h2[b]);
        sums[static_cast<std::size_t>(i) * g + b] += k;
        sums[static_cast<std::size_t>(j) * g + b] += k;
      }
    }
  }
  const double q = static_cast<double>(samples.cols());
  std::vector<double> scores(g, 0.0);
  for (std::size_t b = 0; b < g; ++b) {
    const double log_norm =
        -0.5 * q * std::log(2.0 * std::numbers::pi * bandwidths[b] * bandwidths[b]) - std::log(static_cast<double>(n - 1));
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = sums[static_cast<std::size_t>(i) * g + b];
      if (s <= 0.0) {
        total = -std::numeric_limits<double>::infinity();
        break;
      }
      total += std::log(s) + log_norm;
    }
    scores[b] = total / static_cast<double>(n);
  }
  return scores;
}

BandwidthChoice select_bandwidth(const Eigen::MatrixXd& samples, std::size_t grid_points) {
  if (grid_points < 2) fail(ErrorKind::Validation, "kde", "bandwidth grid needs at least two points");
  BandwidthChoice out;
  out.silverman = silverman_bandwidth(samples);
  const double lo = std::log(0.01), hi = std::log(10.0);
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(grid_points - 1);
    out.grid.push_back(out.silverman * std::exp(lo + t * (hi - lo)));
  }
  // a log grid of even length skips the factor 1, so Silverman's value is
  // added as its own candidate
  out.grid.insert(std::upper_bound(out.grid.begin(), out.grid.end(), out.silverman), out.silverman);
  out.scores = loo_log_density(samples, out.grid);
  std::size_t best = 0;
  for (std::size_t i = 1; i < out.grid.size(); ++i) {
    if (out.scores[i] > out.scores[best]) best = i;
  }
  out.bandwidth = out.grid[best];
  return out;
}

}  // namespace spglm
