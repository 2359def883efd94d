#include "spglm/glm.hpp"

#include <cmath>
#include <string>

#include "spglm/error.hpp"

namespace spglm {

double glm_objective(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                     const Eigen::VectorXd& weights, const ExponentialFamily& family,
                     const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = design * beta;
  double total = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    total += weights(i) * (eta(i) * response(i) - family.cumulant(eta(i)));
  }
  return total;
}

GlmSolution maximize_glm_likelihood(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                                    const Eigen::VectorXd& weights, const ExponentialFamily& family,
                                    const std::string& stage, const NewtonOptions& options) {
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  if (response.size() != n || weights.size() != n) {
    fail(ErrorKind::Validation, stage, "design, response and weights differ in length");
  }
  bool boundary = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(weights(i) >= 0.0) || !std::isfinite(weights(i))) {
      fail(ErrorKind::Validation, stage, "weights must be finite and nonnegative");
    }
    if (weights(i) == 0.0) continue;
    if (!family.in_closed_domain(response(i))) {
      fail(ErrorKind::Validation, stage,
           "response " + std::to_string(response(i)) + " at row " + std::to_string(i + 1) +
               " lies outside the mean domain of the " + std::string(family.token()) + " family");
    }
    boundary = boundary || family.on_boundary(response(i));
  }

  const Eigen::VectorXd wy = weights.cwiseProduct(response);
  const double scale = std::max(1.0, (design.transpose() * wy).norm());
  const double threshold = options.tolerance * scale;

  GlmSolution sol;
  sol.beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd mu(n), curv(n);
  double objective = glm_objective(design, response, weights, family, sol.beta);
  double norm_at_half = -1.0;

  auto divergent_failure = [&](const std::string& what) {
    if (boundary) {
      fail(ErrorKind::NonExistence, stage,
           "maximizer does not exist: boundary responses with divergent iterates (" + what + ")");
    }
    fail(ErrorKind::NonConvergence, stage, what);
  };

  for (int iter = 0; iter <= options.max_iterations; ++iter) {
    const Eigen::VectorXd eta = design * sol.beta;
    for (Eigen::Index i = 0; i < n; ++i) {
      mu(i) = family.mean(eta(i));
      curv(i) = weights(i) * family.variance(eta(i));
    }
    const Eigen::VectorXd grad = design.transpose() * (weights.cwiseProduct(response - mu));
    const double gnorm = grad.norm();
    sol.report.iterations = iter;
    sol.report.final_gradient_norm = gnorm;

    const Eigen::MatrixXd hessian = design.transpose() * curv.asDiagonal() * design;
    Eigen::LLT<Eigen::MatrixXd> llt(hessian);
    if (llt.info() != Eigen::Success || !hessian.allFinite()) {
      if (boundary) divergent_failure("curvature vanished");
      fail(ErrorKind::SingularHessian, stage, "information matrix is not positive definite");
    }
    const Eigen::VectorXd step = llt.solve(grad);
    if (gnorm <= threshold && step.norm() <= 1e-8 * (1.0 + sol.beta.norm())) {
      sol.report.converged = true;
      return sol;
    }
    if (iter == options.max_iterations) break;
    if (iter == options.max_iterations / 2) norm_at_half = sol.beta.norm();

    const double slope = grad.dot(step);
    // Once the Newton decrement is below the objective's rounding noise the
    // Armijo test is meaningless; take the full step.
    const double noise = 1e-10 * std::max(1.0, std::abs(objective));
    double t = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving, t *= 0.5) {
      const Eigen::VectorXd candidate = sol.beta + t * step;
      const double value = glm_objective(design, response, weights, family, candidate);
      const bool sufficient = value >= objective + options.armijo * t * slope;
      const bool in_noise = halving == 0 && slope <= noise && value >= objective - noise;
      if (std::isfinite(value) && (sufficient || in_noise)) {
        sol.beta = candidate;
        objective = value;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No representable ascent left along the Newton direction.
      if (gnorm <= threshold) {
        sol.report.converged = true;
        return sol;
      }
      fail(ErrorKind::NonConvergence, stage, "line search failed to find an ascent step");
    }
    if (sol.beta.norm() > options.divergence_norm) divergent_failure("iterate norm exceeded divergence threshold");
  }

  if (boundary && norm_at_half >= 0.0 && sol.beta.norm() > norm_at_half) {
    divergent_failure("iterates kept growing until the iteration cap");
  }
  fail(ErrorKind::NonConvergence, stage,
       "no convergence after " + std::to_string(options.max_iterations) + " iterations (gradient norm " +
           std::to_string(sol.report.final_gradient_norm) + ")");
}

GlmSolution tau(const Eigen::VectorXd& means, const TargetSet& targets, const ExponentialFamily& family) {
  if (means.size() != static_cast<Eigen::Index>(targets.size())) {
    fail(ErrorKind::Validation, "tau", "mean vector length differs from the number of targets");
  }
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(means.size());
  return maximize_glm_likelihood(targets.covariates(), means, ones, family, "tau");
}

Eigen::MatrixXd tau_jacobian_at(const Eigen::VectorXd& beta, const TargetSet& targets,
                                const ExponentialFamily& family) {
  const Eigen::MatrixXd& x = targets.covariates();
  const Eigen::VectorXd eta = x * beta;
  Eigen::VectorXd gamma(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) gamma(i) = family.variance(eta(i));
  const Eigen::MatrixXd hessian = x.transpose() * gamma.asDiagonal() * x;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hessian, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) {
    fail(ErrorKind::SingularHessian, "tau_jacobian",
         "condition number of X*^T Gamma X* exceeds 1e12");
  }
  return hessian.llt().solve(x.transpose());
}

Eigen::MatrixXd tau_jacobian(const Eigen::VectorXd& means, const TargetSet& targets,
                             const ExponentialFamily& family) {
  return tau_jacobian_at(tau(means, targets, family).beta, targets, family);
}

Eigen::VectorXd population_estimand(const Eigen::VectorXd& true_means, const TargetSet& targets,
                                    const ExponentialFamily& family) {
  return tau(true_means, targets, family).beta;
}

}  // namespace spglm
