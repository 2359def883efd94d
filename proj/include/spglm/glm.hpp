#pragma once

#include <Eigen/Dense>
#include <string>

#include "spglm/dataset.hpp"
#include "spglm/family.hpp"

namespace spglm {

struct SolveReport {
  int iterations = 0;
  double final_gradient_norm = 0.0;
  bool converged = false;
};

struct GlmSolution {
  Eigen::VectorXd beta;
  SolveReport report;
};

struct NewtonOptions {
  double tolerance = 1e-10;      // relative to max(1, ||X^T W y||)
  int max_iterations = 200;
  double divergence_norm = 1e6;
  double armijo = 1e-4;
};

// Weighted canonical-link log-likelihood sum_i w_i (x_i^T b y_i - kappa(x_i^T b)).
double glm_objective(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                     const Eigen::VectorXd& weights, const ExponentialFamily& family,
                     const Eigen::VectorXd& beta);

// Damped Newton ascent from beta = 0 with halving backtracking (Armijo).
// Throws NonExistence when boundary responses coincide with divergent
// iterates, NonConvergence at the iteration cap, SingularHessian when the
// curvature matrix cannot be factored. Errors are tagged with `stage`.
GlmSolution maximize_glm_likelihood(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                                    const Eigen::VectorXd& weights, const ExponentialFamily& family,
                                    const std::string& stage, const NewtonOptions& options = {});

// tau(A) = argmax_b sum_m (x*_m^T b) A_m - kappa(x*_m^T b).
GlmSolution tau(const Eigen::VectorXd& means, const TargetSet& targets, const ExponentialFamily& family);

// J = (X*^T Gamma X*)^{-1} X*^T with Gamma = diag(kappa''(X* beta)), a P x M matrix.
Eigen::MatrixXd tau_jacobian_at(const Eigen::VectorXd& beta, const TargetSet& targets,
                                const ExponentialFamily& family);
Eigen::MatrixXd tau_jacobian(const Eigen::VectorXd& means, const TargetSet& targets,
                             const ExponentialFamily& family);

// Ground-truth coefficients tau(E[Y* | S*]).
Eigen::VectorXd population_estimand(const Eigen::VectorXd& true_means, const TargetSet& targets,
                                    const ExponentialFamily& family);

}  // namespace spglm
