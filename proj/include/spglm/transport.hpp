#pragma once

#include <Eigen/Dense>

#include "spglm/dataset.hpp"

namespace spglm {

// Nonnegative masses on points of R^d. Support points may repeat.
struct DiscreteMeasure {
  PointMatrix support;
  Eigen::VectorXd mass;

  double total() const { return mass.sum(); }
};

// Real weights of any sign attached to points.
struct SignedWeighting {
  PointMatrix points;
  Eigen::VectorXd weights;
};

enum class TransportBackend {
  Auto,            // sorted-CDF formula in one dimension, network simplex otherwise
  NetworkSimplex,  // always network simplex
};

// Points closer than this (Euclidean) are treated as one support point.
inline constexpr double kMergeTolerance = 1e-12;

// Sums weights of coincident points (within kMergeTolerance). Output order
// follows first appearance.
SignedWeighting merge_coincident(const SignedWeighting& input);

// Exact 1-Wasserstein distance with Euclidean ground cost. Totals must agree
// to 1e-9 relative; the common total is taken as their mean.
double wasserstein1(const DiscreteMeasure& a, const DiscreteMeasure& b,
                    TransportBackend backend = TransportBackend::Auto);

// sup over 1-Lipschitz f of |sum_m w_m f(s*_m) - sum_n v_n f(s_n)|, via the
// positive and negative parts of the merged signed measure.
double lipschitz_supremum(const SignedWeighting& targets, const SignedWeighting& train,
                          TransportBackend backend = TransportBackend::Auto);

// Kantorovich-Rubinstein dual LP over potentials at the union support with
// pairwise Lipschitz constraints. Independent check of wasserstein1; dense,
// so only for small supports.
double dual_check(const DiscreteMeasure& a, const DiscreteMeasure& b);

}  // namespace spglm
