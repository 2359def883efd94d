#pragma once

namespace spglm {

double normal_cdf(double x);

// Inverse standard normal CDF for p in (0, 1): Acklam's rational
// approximation polished by one Halley step against erfc.
double normal_quantile(double p);

// z_{alpha/2}, the (1 - alpha/2) quantile.
double two_sided_z(double alpha);

}  // namespace spglm
