#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "spglm/dataset.hpp"
#include "spglm/family.hpp"
#include "spglm/glm.hpp"
#include "spglm/inference.hpp"

namespace spglm {

enum class BaselineMethod { Classic, Sandwich, KdeWeighted };

BaselineMethod baseline_from_token(std::string_view token);
std::string_view to_token(BaselineMethod method);

struct BaselineResult {
  BaselineMethod method;
  Eigen::VectorXd beta_hat;
  Eigen::VectorXd se;
  std::vector<Interval> intervals;
  double alpha = 0.05;
  double z = 0.0;
  SolveReport solve;
  std::optional<double> bandwidth_train;
  std::optional<double> bandwidth_target;
};

// Maximizes sum_n w_n (x_n^T b y_n - kappa(x_n^T b)); unit weights when none given.
GlmSolution fit_training_mle(const TrainingSet& train, const ExponentialFamily& family,
                             const std::optional<Eigen::VectorXd>& weights = std::nullopt);

// sqrt(diag((X^T W Gamma X)^{-1})).
Eigen::VectorXd classic_se(const TrainingSet& train, const ExponentialFamily& family, const Eigen::VectorXd& beta,
                           const Eigen::VectorXd& weights);

// sqrt(diag(H^{-1} M H^{-1})), H = X^T W Gamma X, M = sum_n w_n^2 r_n^2 x_n x_n^T.
Eigen::VectorXd sandwich_se(const TrainingSet& train, const ExponentialFamily& family, const Eigen::VectorXd& beta,
                            const Eigen::VectorXd& weights);

struct KdeWeights {
  Eigen::VectorXd weights;
  double bandwidth_train;
  double bandwidth_target;
};

// Density ratio p_target(x_n) / p_train(x_n) over the non-constant covariate
// columns, each density with its own cross-validated bandwidth.
KdeWeights kde_importance_weights(const TrainingSet& train, const TargetSet& targets);

BaselineResult baseline_interval(BaselineMethod method, const TrainingSet& train, const TargetSet& targets,
                                 const ExponentialFamily& family, double alpha);

}  // namespace spglm
