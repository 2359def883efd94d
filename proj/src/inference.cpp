#include "spglm/inference.hpp"

#include <charconv>
#include <cmath>

#include "spglm/error.hpp"
#include "spglm/normal.hpp"
#include "spglm/transport.hpp"

namespace spglm {

KPolicy KPolicy::adaptive(StepRule rule) { return KPolicy(true, 0, std::move(rule)); }

KPolicy KPolicy::fixed(std::size_t k) {
  if (k < 1) fail(ErrorKind::Validation, "k_policy", "fixed k must be at least 1");
  return KPolicy(false, k, StepRule::inverse_sqrt());
}

KPolicy KPolicy::parse(std::string_view token) {
  if (token == "adaptive") return adaptive();
  constexpr std::string_view prefix = "fixed:";
  if (token.substr(0, prefix.size()) == prefix) {
    const auto digits = token.substr(prefix.size());
    std::size_t k = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && k >= 1) return fixed(k);
  }
  fail(ErrorKind::Validation, "k_policy", "expected 'adaptive' or 'fixed:<k>', got '" + std::string(token) + "'");
}

std::string KPolicy::token() const { return adaptive_ ? "adaptive" : "fixed:" + std::to_string(k_); }

Eigen::VectorXd variance_diag(const Eigen::VectorXd& responses, std::span<const std::size_t> nn) {
  if (responses.size() < 2) fail(ErrorKind::Validation, "variance", "need at least two training points");
  if (nn.size() != static_cast<std::size_t>(responses.size())) {
    fail(ErrorKind::Validation, "variance", "neighbor map length differs from the number of responses");
  }
  Eigen::VectorXd lambda(responses.size());
  for (Eigen::Index n = 0; n < responses.size(); ++n) {
    const double diff = responses(n) - responses(static_cast<Eigen::Index>(nn[static_cast<std::size_t>(n)]));
    lambda(n) = 0.5 * diff * diff;
  }
  return lambda;
}

Eigen::VectorXd sigma_hat(const WeightMatrix& psi, const Eigen::VectorXd& lambda, const Eigen::MatrixXd& jac) {
  if (jac.cols() != static_cast<Eigen::Index>(psi.rows()) || lambda.size() != static_cast<Eigen::Index>(psi.cols())) {
    fail(ErrorKind::Validation, "sigma_hat", "dimension mismatch between Psi, Lambda and J");
  }
  Eigen::VectorXd out(jac.rows());
  for (Eigen::Index p = 0; p < jac.rows(); ++p) {
    const Eigen::VectorXd v = psi.apply_transpose(jac.row(p).transpose());
    out(p) = std::sqrt((lambda.array() * v.array().square()).sum());
  }
#ifndef NDEBUG
  const Eigen::VectorXd check = sigma_hat_quadratic(psi, lambda, jac);
  for (Eigen::Index p = 0; p < out.size(); ++p) {
    if (std::abs(out(p) - check(p)) > 1e-10 * std::max(1e-300, std::max(out(p), check(p)))) {
      fail(ErrorKind::Infeasible, "sigma_hat", "norm and quadratic forms disagree");
    }
  }
#endif
  return out;
}

Eigen::VectorXd sigma_hat_quadratic(const WeightMatrix& psi, const Eigen::VectorXd& lambda,
                                    const Eigen::MatrixXd& jac) {
  const auto m_total = static_cast<Eigen::Index>(psi.rows());
  const double w2 = psi.weight() * psi.weight();
  // Q = Psi Lambda Psi^T, built from row-support intersections
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(m_total, m_total);
  for (Eigen::Index a = 0; a < m_total; ++a) {
    const auto ra = psi.row(static_cast<std::size_t>(a));
    for (Eigen::Index b = a; b < m_total; ++b) {
      const auto rb = psi.row(static_cast<std::size_t>(b));
      double s = 0.0;
      std::size_t i = 0, j = 0;
      while (i < ra.size() && j < rb.size()) {
        if (ra[i] < rb[j]) ++i;
        else if (rb[j] < ra[i]) ++j;
        else {
          s += lambda(static_cast<Eigen::Index>(ra[i]));
          ++i;
          ++j;
        }
      }
      q(a, b) = q(b, a) = w2 * s;
    }
  }
  const Eigen::MatrixXd cov = jac * q * jac.transpose();
  return cov.diagonal().cwiseMax(0.0).cwiseSqrt();
}

double bias_bound(const TargetSet& targets, const TrainingSet& train, const WeightMatrix& psi,
                  const Eigen::MatrixXd& jac, double lipschitz, std::size_t p) {
  if (!(lipschitz >= 0.0) || !std::isfinite(lipschitz)) {
    fail(ErrorKind::Validation, "bias_bound", "Lipschitz constant must be finite and nonnegative");
  }
  if (p >= static_cast<std::size_t>(jac.rows())) fail(ErrorKind::Validation, "bias_bound", "coefficient index out of range");
  if (lipschitz == 0.0) return 0.0;
  const Eigen::VectorXd w = jac.row(static_cast<Eigen::Index>(p)).transpose();
  const Eigen::VectorXd v = psi.apply_transpose(w);
  return lipschitz * lipschitz_supremum({targets.locations(), w}, {train.locations(), v});
}

InferenceResult fit(const TrainingSet& train, const TargetSet& targets, const ExponentialFamily& family,
                    const FitOptions& options) {
  const double z = two_sided_z(options.alpha);
  if (!(options.lipschitz >= 0.0) || !std::isfinite(options.lipschitz)) {
    fail(ErrorKind::Validation, "fit", "Lipschitz constant must be finite and nonnegative");
  }
  if (train.dim() != targets.dim()) fail(ErrorKind::Validation, "fit", "training and target locations differ in dimension");
  if (train.num_covariates() != targets.num_covariates()) {
    fail(ErrorKind::Validation, "fit", "training and target covariates differ in count");
  }
  if (train.size() < 2) fail(ErrorKind::Validation, "fit", "need at least two training points");

  InferenceResult res;
  res.alpha = options.alpha;
  res.z = z;
  res.lipschitz = options.lipschitz;
  res.seed = options.seed;
  Rng rng(options.seed);

  if (options.k_policy.is_adaptive()) {
    res.trace = select_adaptive_k(train.locations(), targets.locations(), options.k_policy.rule());
    res.k_used = res.trace->final_k();
  } else {
    res.k_used = options.k_policy.fixed_k();
  }
  const WeightMatrix psi = build_weight_matrix(train.locations(), targets.locations(), res.k_used, rng);
  const Eigen::VectorXd means = psi.apply(train.responses());

  const GlmSolution sol = tau(means, targets, family);
  res.solve = sol.report;
  res.beta_hat = sol.beta;
  const Eigen::MatrixXd jac = tau_jacobian_at(sol.beta, targets, family);

  const auto nn = self_nn_map(train.locations(), rng);
  const Eigen::VectorXd lambda = variance_diag(train.responses(), nn);
  res.sigma_hat = sigma_hat(psi, lambda, jac);

  const auto p_total = static_cast<std::size_t>(res.beta_hat.size());
  res.bias_bound.resize(static_cast<Eigen::Index>(p_total));
  res.intervals.resize(p_total);
  for (std::size_t p = 0; p < p_total; ++p) {
    const auto i = static_cast<Eigen::Index>(p);
    res.bias_bound(i) = bias_bound(targets, train, psi, jac, options.lipschitz, p);
    const double half = z * res.sigma_hat(i) + res.bias_bound(i);
    res.intervals[p] = {res.beta_hat(i) - half, res.beta_hat(i) + half};
  }
  return res;
}

}  // namespace spglm
