#include "spglm/family.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "spglm/error.hpp"

namespace spglm {

ExponentialFamily ExponentialFamily::from_token(std::string_view token) {
  if (token == "bernoulli") return ExponentialFamily(FamilyKind::Bernoulli);
  if (token == "poisson") return ExponentialFamily(FamilyKind::Poisson);
  if (token == "gaussian") return ExponentialFamily(FamilyKind::Gaussian);
  fail(ErrorKind::Validation, "family", "unknown family token '" + std::string(token) +
                                            "' (expected bernoulli|poisson|gaussian)");
}

std::string_view ExponentialFamily::token() const noexcept {
  switch (kind_) {
    case FamilyKind::Bernoulli: return "bernoulli";
    case FamilyKind::Poisson: return "poisson";
    case FamilyKind::Gaussian: return "gaussian";
  }
  return "";
}

double ExponentialFamily::cumulant(double theta) const noexcept {
  switch (kind_) {
    case FamilyKind::Bernoulli:
      // log(1 + e^theta) without overflow
      return std::log1p(std::exp(-std::abs(theta))) + std::max(theta, 0.0);
    case FamilyKind::Poisson: return std::exp(theta);
    case FamilyKind::Gaussian: return 0.5 * theta * theta;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double ExponentialFamily::mean(double theta) const noexcept {
  switch (kind_) {
    case FamilyKind::Bernoulli:
      if (theta >= 0.0) return 1.0 / (1.0 + std::exp(-theta));
      else {
        const double e = std::exp(theta);
        return e / (1.0 + e);
      }
    case FamilyKind::Poisson: return std::exp(theta);
    case FamilyKind::Gaussian: return theta;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double ExponentialFamily::variance(double theta) const noexcept {
  switch (kind_) {
    case FamilyKind::Bernoulli: {
      // e^{-|t|} / (1 + e^{-|t|})^2 keeps full relative precision in both tails
      const double e = std::exp(-std::abs(theta));
      const double d = 1.0 + e;
      return e / (d * d);
    }
    case FamilyKind::Poisson: return std::exp(theta);
    case FamilyKind::Gaussian: return 1.0;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

ExponentialFamily::Interval ExponentialFamily::mean_domain() const noexcept {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (kind_) {
    case FamilyKind::Bernoulli: return {0.0, 1.0};
    case FamilyKind::Poisson: return {0.0, inf};
    case FamilyKind::Gaussian: return {-inf, inf};
  }
  return {-inf, inf};
}

bool ExponentialFamily::in_closed_domain(double mu) const noexcept {
  if (!std::isfinite(mu)) return false;
  const auto d = mean_domain();
  return mu >= d.lower && mu <= d.upper;
}

bool ExponentialFamily::on_boundary(double mu) const noexcept {
  const auto d = mean_domain();
  return mu == d.lower || mu == d.upper;
}

}  // namespace spglm
