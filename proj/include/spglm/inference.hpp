#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "spglm/dataset.hpp"
#include "spglm/family.hpp"
#include "spglm/glm.hpp"
#include "spglm/neighbors.hpp"

namespace spglm {

// How many neighbors each target borrows from.
class KPolicy {
 public:
  static KPolicy adaptive(StepRule rule = StepRule::inverse_sqrt());
  static KPolicy fixed(std::size_t k);
  // "adaptive" or "fixed:<k>"
  static KPolicy parse(std::string_view token);

  bool is_adaptive() const noexcept { return adaptive_; }
  std::size_t fixed_k() const noexcept { return k_; }
  const StepRule& rule() const noexcept { return rule_; }
  std::string token() const;

 private:
  KPolicy(bool adaptive, std::size_t k, StepRule rule) : adaptive_(adaptive), k_(k), rule_(std::move(rule)) {}
  bool adaptive_;
  std::size_t k_;
  StepRule rule_;
};

struct FitOptions {
  double lipschitz = 0.0;
  double alpha = 0.05;
  KPolicy k_policy = KPolicy::adaptive();
  std::uint64_t seed = 0;
};

struct Interval {
  double lower;
  double upper;
};

struct InferenceResult {
  Eigen::VectorXd beta_hat;
  Eigen::VectorXd sigma_hat;
  Eigen::VectorXd bias_bound;
  std::vector<Interval> intervals;
  double alpha = 0.05;
  double z = 0.0;
  std::size_t k_used = 0;
  double lipschitz = 0.0;
  std::uint64_t seed = 0;
  SolveReport solve;
  std::optional<KSelectionTrace> trace;  // adaptive policy only
};

// Lambda_nn = (Y_n - Y_{nn(n)})^2 / 2.
Eigen::VectorXd variance_diag(const Eigen::VectorXd& responses, std::span<const std::size_t> nn);

// sigma_p = || Lambda^{1/2} Psi^T J^T e_p ||_2.
Eigen::VectorXd sigma_hat(const WeightMatrix& psi, const Eigen::VectorXd& lambda, const Eigen::MatrixXd& jac);

// Same quantity as sqrt(e_p^T J Psi Lambda Psi^T J^T e_p); kept as an
// independent route for verification.
Eigen::VectorXd sigma_hat_quadratic(const WeightMatrix& psi, const Eigen::VectorXd& lambda,
                                    const Eigen::MatrixXd& jac);

// L times the Lipschitz supremum for coefficient p, with target weights
// w = J^T e_p and training weights v = Psi^T w.
double bias_bound(const TargetSet& targets, const TrainingSet& train, const WeightMatrix& psi,
                  const Eigen::MatrixXd& jac, double lipschitz, std::size_t p);

InferenceResult fit(const TrainingSet& train, const TargetSet& targets, const ExponentialFamily& family,
                    const FitOptions& options);

}  // namespace spglm
