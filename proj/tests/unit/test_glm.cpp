#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spglm/error.hpp"
#include "spglm/glm.hpp"

using namespace spglm;

namespace {

TargetSet targets_from(const Eigen::MatrixXd& x) {
  PointMatrix s(x.rows(), 1);
  for (Eigen::Index i = 0; i < x.rows(); ++i) s(i, 0) = static_cast<double>(i);
  return TargetSet(s, x);
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Validation;
}

}  // namespace

TEST_CASE("tau on forced instances") {
  const ExponentialFamily bern(FamilyKind::Bernoulli), pois(FamilyKind::Poisson);
  {
    Eigen::MatrixXd x(2, 1);
    x << 1, -1;
    const auto sol = tau(Eigen::Vector2d(0.5, 0.5), targets_from(x), bern);
    CHECK(std::abs(sol.beta(0)) < 1e-14);
    CHECK(sol.report.converged);
  }
  {
    Eigen::MatrixXd x(1, 1);
    x << 1;
    Eigen::VectorXd a(1);
    a << std::exp(1.0);
    CHECK(tau(a, targets_from(x), pois).beta(0) == Catch::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("gaussian tau equals the least-squares solution") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  const ExponentialFamily gauss(FamilyKind::Gaussian);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::MatrixXd x(8, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
    Eigen::VectorXd a(8);
    for (auto& v : a) v = g(rng);
    const TargetSet t = targets_from(x);
    const Eigen::VectorXd ls = (x.transpose() * x).ldlt().solve(x.transpose() * a);
    const auto sol = tau(a, t, gauss);
    CHECK((sol.beta - ls).norm() <= 1e-10 * (1 + ls.norm()));
    // scale equivariance
    const auto scaled = tau(2.5 * a, t, gauss);
    CHECK((scaled.beta - 2.5 * sol.beta).norm() <= 1e-10 * (1 + sol.beta.norm()));
  }
}

TEST_CASE("bernoulli three-target instance matches grid and bisection") {
  Eigen::MatrixXd x(3, 1);
  x << 1, 0.5, -1;
  const Eigen::Vector3d a(0.8, 0.6, 0.3);
  const ExponentialFamily bern(FamilyKind::Bernoulli);
  const double ref = oracle::tau_scalar(a, x.col(0), bern);
  CHECK(std::abs(tau(a, targets_from(x), bern).beta(0) - ref) <= 1e-6);
}

TEST_CASE("tau on seeded instances matches grid and bisection") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(-2.0, 2.0), ua(0.05, 0.95), up(0.2, 5.0);
  for (int rep = 0; rep < 25; ++rep) {
    const bool poisson = rep % 3 == 2;
    const ExponentialFamily fam(poisson ? FamilyKind::Poisson : FamilyKind::Bernoulli);
    const Eigen::Index m = 2 + rep % 6;
    Eigen::MatrixXd x(m, 1);
    Eigen::VectorXd a(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      x(i, 0) = ux(rng);
      a(i) = poisson ? up(rng) : ua(rng);
    }
    const double ref = oracle::tau_scalar(a, x.col(0), fam);
    if (std::abs(ref) > 9.9) continue;  // maximizer outside the grid window
    const auto sol = tau(a, targets_from(x), fam);
    INFO("instance " << rep);
    CHECK(std::abs(sol.beta(0) - ref) <= 1e-6);
    CHECK(sol.report.converged);
    CHECK(sol.report.final_gradient_norm <= 1e-10 * std::max(1.0, (x.transpose() * a).norm()));
  }
}

TEST_CASE("returned maximizer beats random perturbations") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> ua(0.05, 0.95);
  const ExponentialFamily bern(FamilyKind::Bernoulli);
  Eigen::MatrixXd x(6, 2);
  x.col(0).setOnes();
  for (Eigen::Index i = 0; i < 6; ++i) x(i, 1) = g(rng);
  Eigen::VectorXd a(6);
  for (auto& v : a) v = ua(rng);
  const TargetSet t = targets_from(x);
  const Eigen::VectorXd beta = tau(a, t, bern).beta;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(6);
  const double best = glm_objective(x, a, ones, bern, beta);
  for (int k = 0; k < 64; ++k) {
    Eigen::Vector2d e(g(rng), g(rng));
    e *= 1e-3 / e.norm();
    CHECK(glm_objective(x, a, ones, bern, beta + e) <= best);
  }
}

TEST_CASE("boundary means with divergent iterates are reported as non-existence") {
  Eigen::MatrixXd x(2, 1);
  x << 1, -1;
  const ExponentialFamily bern(FamilyKind::Bernoulli);
  const TargetSet t = targets_from(x);
  CHECK(kind_of([&] { tau(Eigen::Vector2d(1.0, 0.0), t, bern); }) == ErrorKind::NonExistence);
  try {
    tau(Eigen::Vector2d(1.0, 0.0), t, bern);
  } catch (const Error& e) {
    CHECK(e.stage() == "tau");
  }
  // boundary values alone are fine when the maximizer exists
  Eigen::MatrixXd x2(2, 1);
  x2 << 1, 0.5;
  const auto sol = tau(Eigen::Vector2d(1.0, 0.5), targets_from(x2), bern);
  CHECK(sol.report.converged);
  CHECK(sol.beta(0) > 0.0);
}

TEST_CASE("iteration cap and domain violations") {
  Eigen::MatrixXd x(3, 1);
  x << 1, 0.5, -1;
  const ExponentialFamily bern(FamilyKind::Bernoulli);
  NewtonOptions opt;
  opt.max_iterations = 1;
  CHECK(kind_of([&] {
          maximize_glm_likelihood(x, Eigen::Vector3d(0.8, 0.6, 0.3), Eigen::Vector3d::Ones(), bern, "tau", opt);
        }) == ErrorKind::NonConvergence);
  CHECK(kind_of([&] { tau(Eigen::Vector3d(0.8, 1.6, 0.3), targets_from(x), bern); }) == ErrorKind::Validation);
}

TEST_CASE("jacobian closed forms") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(5, 2);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  const TargetSet t = targets_from(x);
  Eigen::VectorXd a(5);
  for (auto& v : a) v = g(rng);
  const Eigen::MatrixXd j = tau_jacobian(a, t, ExponentialFamily(FamilyKind::Gaussian));
  const Eigen::MatrixXd ref = (x.transpose() * x).inverse() * x.transpose();
  CHECK((j - ref).cwiseAbs().maxCoeff() <= 1e-12);

  Eigen::MatrixXd xs(2, 1);
  xs << 1, -1;
  const Eigen::MatrixXd js = tau_jacobian(Eigen::Vector2d(0.5, 0.5), targets_from(xs), ExponentialFamily(FamilyKind::Bernoulli));
  // Gamma = I/4, so J = 2 * [1, -1]
  CHECK(js(0, 0) == Catch::Approx(2.0).epsilon(1e-14));
  CHECK(js(0, 1) == Catch::Approx(-2.0).epsilon(1e-14));
}

TEST_CASE("jacobian matches finite differences of tau") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> ua(0.15, 0.85);
  const ExponentialFamily bern(FamilyKind::Bernoulli);
  for (int rep = 0; rep < 25; ++rep) {
    Eigen::MatrixXd x(5, 2);
    x.col(0).setOnes();
    for (Eigen::Index i = 0; i < 5; ++i) x(i, 1) = g(rng);
    Eigen::VectorXd a(5);
    for (auto& v : a) v = ua(rng);
    const TargetSet t = targets_from(x);
    const Eigen::MatrixXd j = tau_jacobian(a, t, bern);
    const double h = 1e-6;
    for (Eigen::Index m = 0; m < 5; ++m) {
      Eigen::VectorXd ap = a, am = a;
      ap(m) += h;
      am(m) -= h;
      const Eigen::VectorXd fd = (tau(ap, t, bern).beta - tau(am, t, bern).beta) / (2 * h);
      for (Eigen::Index p = 0; p < 2; ++p) CHECK(std::abs(fd(p) - j(p, m)) <= 1e-4);
    }
    // differentiated first-order condition
    const Eigen::VectorXd beta = tau(a, t, bern).beta;
    Eigen::VectorXd gam(5);
    for (Eigen::Index m = 0; m < 5; ++m) gam(m) = bern.variance(x.row(m).dot(beta));
    const Eigen::MatrixXd lhs = x.transpose() * gam.asDiagonal() * x * j;
    CHECK((lhs - Eigen::MatrixXd(x.transpose())).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((j * gam.asDiagonal() * x - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("ill-conditioned curvature is refused") {
  Eigen::MatrixXd x(2, 2);
  x << 1, 0, 0, 1e-7;
  const TargetSet t = targets_from(x);
  CHECK(kind_of([&] { tau_jacobian_at(Eigen::Vector2d(0, 0), t, ExponentialFamily(FamilyKind::Gaussian)); }) ==
        ErrorKind::SingularHessian);
}

TEST_CASE("population estimand") {
  const ExponentialFamily bern(FamilyKind::Bernoulli);
  const TargetSet t = targets_from(Eigen::MatrixXd::Ones(4, 1));
  const double c = 0.3;
  CHECK(population_estimand(Eigen::VectorXd::Constant(4, c), t, bern)(0) ==
        Catch::Approx(std::log(c / (1 - c))).epsilon(1e-12));

  // truth s^2 at targets +-0.5 with covariate s and no intercept
  Eigen::MatrixXd x(2, 1);
  x << -0.5, 0.5;
  const Eigen::VectorXd beta =
      population_estimand(Eigen::Vector2d(0.25, 0.25), targets_from(x), ExponentialFamily(FamilyKind::Gaussian));
  CHECK(std::abs(beta(0)) < 1e-15);
}
