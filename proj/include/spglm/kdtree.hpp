#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "spglm/dataset.hpp"

namespace spglm {

struct Neighbor {
  std::size_t index;
  double dist2;  // squared Euclidean distance
};

// Exact k-d tree over a fixed point set. Leaves hold up to 64 points and are
// scanned by brute force, so small sets degenerate to a single linear scan.
class KdTree {
 public:
  static constexpr std::size_t kLeafSize = 64;
  static constexpr std::size_t kNoExclude = std::numeric_limits<std::size_t>::max();

  explicit KdTree(PointMatrix points);

  std::size_t size() const noexcept { return static_cast<std::size_t>(points_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(points_.cols()); }
  const PointMatrix& points() const noexcept { return points_; }

  // The k closest points ordered by (dist2, index); `exclude` is skipped.
  std::vector<Neighbor> knn(std::span<const double> query, std::size_t k,
                            std::size_t exclude = kNoExclude) const;

  // All points with dist2 <= radius2, in index order.
  std::vector<Neighbor> within(std::span<const double> query, double radius2,
                               std::size_t exclude = kNoExclude) const;

 private:
  struct Node {
    std::size_t begin;
    std::size_t end;
    int split_dim;  // -1 for leaves
    double split_value;
    std::size_t left;
    std::size_t right;
  };

  std::size_t build(std::size_t begin, std::size_t end);
  void knn_search(std::size_t node, std::span<const double> query, std::size_t k, std::size_t exclude,
                  std::vector<Neighbor>& heap) const;
  void radius_search(std::size_t node, std::span<const double> query, double radius2, std::size_t exclude,
                     std::vector<Neighbor>& out) const;

  PointMatrix points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace spglm
