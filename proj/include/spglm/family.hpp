#pragma once

#include <string_view>

namespace spglm {

enum class FamilyKind { Bernoulli, Poisson, Gaussian };

// Canonical-link exponential family described by its cumulant function kappa.
// mean() is kappa' and variance() is kappa''. The base measure c(y) is never
// evaluated; it does not depend on the coefficients.
class ExponentialFamily {
 public:
  struct Interval {
    double lower;
    double upper;
  };

  explicit constexpr ExponentialFamily(FamilyKind kind) noexcept : kind_(kind) {}

  // Accepts "bernoulli", "poisson" or "gaussian".
  static ExponentialFamily from_token(std::string_view token);

  FamilyKind kind() const noexcept { return kind_; }
  std::string_view token() const noexcept;

  double cumulant(double theta) const noexcept;
  double mean(double theta) const noexcept;
  double variance(double theta) const noexcept;

  // Open interval of attainable means.
  Interval mean_domain() const noexcept;
  bool in_closed_domain(double mu) const noexcept;
  bool on_boundary(double mu) const noexcept;

  friend bool operator==(const ExponentialFamily&, const ExponentialFamily&) = default;

 private:
  FamilyKind kind_;
};

}  // namespace spglm
