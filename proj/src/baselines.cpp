#include "spglm/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "spglm/error.hpp"
#include "spglm/kde.hpp"
#include "spglm/normal.hpp"

namespace spglm {

namespace {

constexpr double kDensityFloor = 1e-12;
constexpr double kMaxCondition = 1e12;

Eigen::MatrixXd information_inverse(const TrainingSet& train, const ExponentialFamily& family,
                                    const Eigen::VectorXd& beta, const Eigen::VectorXd& weights,
                                    const char* stage) {
  const Eigen::MatrixXd& x = train.covariates();
  if (beta.size() != x.cols()) fail(ErrorKind::Validation, stage, "coefficient length differs from covariate count");
  if (weights.size() != x.rows()) fail(ErrorKind::Validation, stage, "weight length differs from training size");
  const Eigen::VectorXd theta = x * beta;
  Eigen::VectorXd g(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) g(i) = weights(i) * family.variance(theta(i));
  const Eigen::MatrixXd h = x.transpose() * g.asDiagonal() * x;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
  const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxCondition) fail(ErrorKind::SingularHessian, stage, "information matrix is singular");
  return h.ldlt().solve(Eigen::MatrixXd::Identity(h.rows(), h.cols()));
}

std::vector<Eigen::Index> varying_columns(const Eigen::MatrixXd& x) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    if (x.col(c).maxCoeff() > x.col(c).minCoeff()) keep.push_back(c);
  }
  return keep;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = x.col(cols[i]);
  return out;
}

}  // namespace

BaselineMethod baseline_from_token(std::string_view token) {
  if (token == "classic") return BaselineMethod::Classic;
  if (token == "sandwich") return BaselineMethod::Sandwich;
  if (token == "kde_weighted") return BaselineMethod::KdeWeighted;
  fail(ErrorKind::Validation, "baseline", "unknown baseline '" + std::string(token) + "'");
}

std::string_view to_token(BaselineMethod method) {
  switch (method) {
    case BaselineMethod::Classic: return "classic";
    case BaselineMethod::Sandwich: return "sandwich";
    case BaselineMethod::KdeWeighted: return "kde_weighted";
  }
  return "classic";
}

GlmSolution fit_training_mle(const TrainingSet& train, const ExponentialFamily& family,
                             const std::optional<Eigen::VectorXd>& weights) {
  const Eigen::VectorXd w = weights ? *weights : Eigen::VectorXd::Ones(static_cast<Eigen::Index>(train.size()));
  if (w.size() != static_cast<Eigen::Index>(train.size())) {
    fail(ErrorKind::Validation, "training_mle", "weight length differs from training size");
  }
  if ((w.array() < 0.0).any() || !w.allFinite()) fail(ErrorKind::Validation, "training_mle", "weights must be finite and nonnegative");
  return maximize_glm_likelihood(train.covariates(), train.responses(), w, family, "training_mle");
}

Eigen::VectorXd classic_se(const TrainingSet& train, const ExponentialFamily& family, const Eigen::VectorXd& beta,
                           const Eigen::VectorXd& weights) {
  return information_inverse(train, family, beta, weights, "classic_se").diagonal().cwiseMax(0.0).cwiseSqrt();
}

Eigen::VectorXd sandwich_se(const TrainingSet& train, const ExponentialFamily& family, const Eigen::VectorXd& beta,
                            const Eigen::VectorXd& weights) {
  const Eigen::MatrixXd hinv = information_inverse(train, family, beta, weights, "sandwich_se");
  const Eigen::MatrixXd& x = train.covariates();
  const Eigen::VectorXd theta = x * beta;
  Eigen::VectorXd s(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double r = train.responses()(i) - family.mean(theta(i));
    s(i) = weights(i) * weights(i) * r * r;
  }
  const Eigen::MatrixXd meat = x.transpose() * s.asDiagonal() * x;
  return (hinv * meat * hinv).diagonal().cwiseMax(0.0).cwiseSqrt();
}

KdeWeights kde_importance_weights(const TrainingSet& train, const TargetSet& targets) {
  const auto keep = varying_columns(train.covariates());
  if (keep.empty()) fail(ErrorKind::Validation, "kde_weights", "training covariates are all constant");
  const Eigen::MatrixXd xs = select_columns(train.covariates(), keep);
  const Eigen::MatrixXd xt = select_columns(targets.covariates(), keep);
  if (xt.rows() < 2) fail(ErrorKind::Validation, "kde_weights", "need at least two targets for a density estimate");

  const BandwidthChoice bs = select_bandwidth(xs);
  const BandwidthChoice bt = select_bandwidth(xt);
  const GaussianKde ps(xs, bs.bandwidth);
  const GaussianKde pt(xt, bt.bandwidth);

  const Eigen::VectorXd num = pt.density(xs);
  const Eigen::VectorXd den = ps.density(xs);
  Eigen::VectorXd w(num.size());
  std::vector<double> unfloored;
  std::vector<Eigen::Index> floored;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (den(i) < kDensityFloor) {
      w(i) = num(i) / kDensityFloor;
      floored.push_back(i);
    } else {
      w(i) = num(i) / den(i);
      unfloored.push_back(w(i));
    }
  }
  if (!floored.empty() && !unfloored.empty()) {
    std::sort(unfloored.begin(), unfloored.end());
    const auto idx = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(unfloored.size()))) - 1;
    const double cap = unfloored[std::min(idx, unfloored.size() - 1)];
    for (Eigen::Index i : floored) w(i) = std::min(w(i), cap);
  }
  if (!(w.maxCoeff() > 0.0)) fail(ErrorKind::Validation, "kde_weights", "all importance weights are zero");
  return {w, bs.bandwidth, bt.bandwidth};
}

BaselineResult baseline_interval(BaselineMethod method, const TrainingSet& train, const TargetSet& targets,
                                 const ExponentialFamily& family, double alpha) {
  BaselineResult res;
  res.method = method;
  res.alpha = alpha;
  res.z = two_sided_z(alpha);
  if (train.num_covariates() != targets.num_covariates()) {
    fail(ErrorKind::Validation, "baseline", "training and target covariates differ in count");
  }
  Eigen::VectorXd w = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(train.size()));
  if (method == BaselineMethod::KdeWeighted) {
    const KdeWeights kw = kde_importance_weights(train, targets);
    w = kw.weights / kw.weights.mean();
    res.bandwidth_train = kw.bandwidth_train;
    res.bandwidth_target = kw.bandwidth_target;
  }
  const GlmSolution sol = fit_training_mle(train, family, w);
  res.beta_hat = sol.beta;
  res.solve = sol.report;
  res.se = method == BaselineMethod::Sandwich ? sandwich_se(train, family, sol.beta, w)
                                              : classic_se(train, family, sol.beta, w);
  for (Eigen::Index p = 0; p < res.beta_hat.size(); ++p) {
    const double half = res.z * res.se(p);
    res.intervals.push_back({res.beta_hat(p) - half, res.beta_hat(p) + half});
  }
  return res;
}

}  // namespace spglm
