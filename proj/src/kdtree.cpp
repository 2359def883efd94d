#include "spglm/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace spglm {

namespace {

bool closer(const Neighbor& a, const Neighbor& b) {
  return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
}

}  // namespace

KdTree::KdTree(PointMatrix points) : points_(std::move(points)), order_(size()) {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  if (size() > 0) {
    nodes_.reserve(2 * (size() / kLeafSize + 1));
    build(0, size());
  }
}

std::size_t KdTree::build(std::size_t begin, std::size_t end) {
  const std::size_t id = nodes_.size();
  nodes_.push_back({begin, end, -1, 0.0, 0, 0});
  if (end - begin <= kLeafSize) return id;

  // split on the dimension of largest spread at the median
  int best_dim = 0;
  double best_spread = -1.0;
  for (Eigen::Index c = 0; c < points_.cols(); ++c) {
    double lo = points_(static_cast<Eigen::Index>(order_[begin]), c);
    double hi = lo;
    for (std::size_t i = begin; i < end; ++i) {
      const double v = points_(static_cast<Eigen::Index>(order_[i]), c);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      best_dim = static_cast<int>(c);
    }
  }
  if (best_spread <= 0.0) return id;  // all coincident: keep as one leaf

  const std::size_t mid = begin + (end - begin) / 2;
  auto key = [&](std::size_t i) { return points_(static_cast<Eigen::Index>(i), best_dim); };
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  const double split = key(order_[mid]);
  const std::size_t left = build(begin, mid);
  const std::size_t right = build(mid, end);
  nodes_[id].split_dim = best_dim;
  nodes_[id].split_value = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::vector<Neighbor> KdTree::knn(std::span<const double> query, std::size_t k, std::size_t exclude) const {
  std::vector<Neighbor> heap;
  if (k == 0 || size() == 0) return heap;
  heap.reserve(k + 1);
  knn_search(0, query, k, exclude, heap);
  std::sort_heap(heap.begin(), heap.end(), closer);
  return heap;
}

void KdTree::knn_search(std::size_t node_id, std::span<const double> query, std::size_t k,
                        std::size_t exclude, std::vector<Neighbor>& heap) const {
  const Node& node = nodes_[node_id];
  if (node.split_dim < 0) {
    for (std::size_t i = node.begin; i < node.end; ++i) {
      const std::size_t idx = order_[i];
      if (idx == exclude) continue;
      const Neighbor cand{idx, squared_distance(query, point(points_, static_cast<Eigen::Index>(idx)))};
      if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end(), closer);
      } else if (closer(cand, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), closer);
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end(), closer);
      }
    }
    return;
  }
  const double diff = query[static_cast<std::size_t>(node.split_dim)] - node.split_value;
  const std::size_t near = diff < 0.0 ? node.left : node.right;
  const std::size_t far = diff < 0.0 ? node.right : node.left;
  knn_search(near, query, k, exclude, heap);
  // ties on the splitting plane must still be visited (<=) to keep index order exact
  if (heap.size() < k || diff * diff <= heap.front().dist2) knn_search(far, query, k, exclude, heap);
}

std::vector<Neighbor> KdTree::within(std::span<const double> query, double radius2, std::size_t exclude) const {
  std::vector<Neighbor> out;
  if (size() == 0) return out;
  radius_search(0, query, radius2, exclude, out);
  std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });
  return out;
}

void KdTree::radius_search(std::size_t node_id, std::span<const double> query, double radius2,
                           std::size_t exclude, std::vector<Neighbor>& out) const {
  const Node& node = nodes_[node_id];
  if (node.split_dim < 0) {
    for (std::size_t i = node.begin; i < node.end; ++i) {
      const std::size_t idx = order_[i];
      if (idx == exclude) continue;
      const double d2 = squared_distance(query, point(points_, static_cast<Eigen::Index>(idx)));
      if (d2 <= radius2) out.push_back({idx, d2});
    }
    return;
  }
  const double diff = query[static_cast<std::size_t>(node.split_dim)] - node.split_value;
  const std::size_t near = diff < 0.0 ? node.left : node.right;
  const std::size_t far = diff < 0.0 ? node.right : node.left;
  radius_search(near, query, radius2, exclude, out);
  if (diff * diff <= radius2) radius_search(far, query, radius2, exclude, out);
}

}  // namespace spglm
