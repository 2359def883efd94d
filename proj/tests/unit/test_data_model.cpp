#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "spglm/csv.hpp"
#include "spglm/dataset.hpp"
#include "spglm/error.hpp"
#include "spglm/family.hpp"

using namespace spglm;
using Catch::Matchers::ContainsSubstring;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "spglm_data_model";
  fs::create_directories(dir);
  return dir / name;
}

fs::path write_file(const std::string& name, const std::string& body) {
  const fs::path p = scratch(name);
  std::ofstream(p) << body;
  return p;
}

template <class F>
std::string error_text(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("cumulant values at reference points") {
  const ExponentialFamily bern(FamilyKind::Bernoulli), pois(FamilyKind::Poisson), gauss(FamilyKind::Gaussian);
  CHECK(bern.cumulant(0.0) == Catch::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(bern.mean(0.0) == 0.5);
  CHECK(bern.variance(0.0) == 0.25);
  CHECK(pois.mean(1.0) == Catch::Approx(std::exp(1.0)).epsilon(1e-15));
  CHECK(gauss.cumulant(3.0) == 4.5);
  CHECK(gauss.variance(-7.0) == 1.0);

  // 1 - sigma(40) = e^-40 / (1 + e^-40) ~ 4.248e-18
  CHECK(std::abs(bern.mean(40.0) - 1.0) <= 1e-12);
  CHECK(std::isfinite(bern.cumulant(800.0)));
  CHECK(bern.cumulant(800.0) == Catch::Approx(800.0));
  CHECK(bern.cumulant(-800.0) >= 0.0);
  CHECK(bern.variance(-800.0) >= 0.0);
}

TEST_CASE("cumulant derivatives match central differences on [-30, 30]") {
  for (auto kind : {FamilyKind::Bernoulli, FamilyKind::Poisson, FamilyKind::Gaussian}) {
    const ExponentialFamily fam(kind);
    for (int i = 0; i <= 600; ++i) {
      const double t = -30.0 + 0.1 * i;
      const double h = 1e-5 * std::max(1.0, std::abs(t));
      const double d1 = (fam.cumulant(t + h) - fam.cumulant(t - h)) / (2 * h);
      INFO(fam.token() << " theta=" << t);
      CHECK(std::abs(d1 - fam.mean(t)) <= 1e-6 * std::abs(fam.mean(t)) + 1e-300);

      // For the logistic mean near 1 differentiate the reflected form
      // -mean(-t), which holds the same function without cancellation.
      double d2;
      if (kind == FamilyKind::Bernoulli && t > 0.0) {
        CHECK(fam.mean(t) + fam.mean(-t) == Catch::Approx(1.0).epsilon(1e-15));
        d2 = (-fam.mean(-(t + h)) + fam.mean(-(t - h))) / (2 * h);
      } else {
        d2 = (fam.mean(t + h) - fam.mean(t - h)) / (2 * h);
      }
      CHECK(std::abs(d2 - fam.variance(t)) <= 1e-5 * fam.variance(t));
      CHECK(fam.variance(t) > 0.0);
    }
  }
}

TEST_CASE("family tokens and mean domains") {
  CHECK(ExponentialFamily::from_token("bernoulli").kind() == FamilyKind::Bernoulli);
  CHECK(ExponentialFamily::from_token("poisson").kind() == FamilyKind::Poisson);
  CHECK(ExponentialFamily::from_token("gaussian").kind() == FamilyKind::Gaussian);
  CHECK_THROWS_AS(ExponentialFamily::from_token("binomial"), Error);
  const ExponentialFamily bern(FamilyKind::Bernoulli);
  CHECK(bern.on_boundary(0.0));
  CHECK(bern.on_boundary(1.0));
  CHECK_FALSE(bern.on_boundary(0.5));
  CHECK_FALSE(bern.in_closed_domain(1.5));
  CHECK(ExponentialFamily(FamilyKind::Poisson).on_boundary(0.0));
  CHECK_FALSE(ExponentialFamily(FamilyKind::Gaussian).on_boundary(0.0));
}

TEST_CASE("load_training parses a small file") {
  const auto p = write_file("train3.csv", "s1,s2,x1,y\n0,0,1,0\n0.5,1,1,1\n-1,2.5,1,1\n");
  const TrainingSet t = load_training(p);
  CHECK(t.size() == 3);
  CHECK(t.dim() == 2);
  CHECK(t.num_covariates() == 1);
  CHECK(t.locations()(2, 1) == 2.5);
  CHECK(t.responses()(1) == 1.0);
}

TEST_CASE("load_training errors name the offending row") {
  const auto missing = write_file("missing.csv", "s1,x1,y\n0,1,0\n1,1\n");
  CHECK_THAT(error_text([&] { load_training(missing); }), ContainsSubstring("line 3"));
  const auto text = write_file("text.csv", "s1,x1,y\n0,1,0\n1,abc,1\n");
  CHECK_THAT(error_text([&] { load_training(text); }), ContainsSubstring("line 3"));
  const auto empty = write_file("empty.csv", "s1,x1,y\n");
  CHECK_THROWS_AS(load_training(empty), Error);
  const auto header = write_file("header.csv", "a,b,c\n0,1,0\n");
  CHECK_THROWS_AS(load_training(header), Error);
  CHECK_THROWS_AS(load_training(scratch("does_not_exist.csv")), Error);
}

TEST_CASE("load_target validation") {
  const auto ok = write_file("tgt_ok.csv", "s1,s2,x1\n0,0,1\n1,0,2\n");
  CHECK(load_target(ok).size() == 2);
  const auto dup = write_file("tgt_dup.csv", "s1,s2,x1\n0,0,1\n0.5,0.5,1\n0,0,2\n");
  CHECK_THAT(error_text([&] { load_target(dup); }), ContainsSubstring("duplicate"));
  CHECK_THAT(error_text([&] { load_target(dup); }), ContainsSubstring("rows 1 and 3"));
  const auto rank = write_file("tgt_rank.csv", "s1,x1\n0,0\n1,0\n2,0\n");
  CHECK_THAT(error_text([&] { load_target(rank); }), ContainsSubstring("rank"));
}

TEST_CASE("training set constructor invariants") {
  PointMatrix s(2, 1);
  s << 0, 1;
  Eigen::MatrixXd x(2, 1);
  x << 1, 1;
  Eigen::VectorXd y(3);
  y << 0, 1, 0;
  CHECK_THROWS_AS(TrainingSet(s, x, y), Error);
  Eigen::VectorXd y2(2);
  y2 << 0, std::nan("");
  CHECK_THROWS_AS(TrainingSet(s, x, y2), Error);
}

TEST_CASE("save then load reproduces generated datasets bit for bit") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int rep = 0; rep < 5; ++rep) {
    const Eigen::Index n = 20 + rep, d = 1 + rep % 3, p = 1 + rep % 2;
    PointMatrix s(n, d);
    Eigen::MatrixXd x(n, p);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) s(i, j) = g(rng);
      for (Eigen::Index j = 0; j < p; ++j) x(i, j) = g(rng) * 1e-7;
      y(i) = g(rng) * 1e9;
    }
    const TrainingSet t(s, x, y);
    save_training(t, scratch("rt.csv"));
    const TrainingSet back = load_training(scratch("rt.csv"));
    CHECK(back.locations() == t.locations());
    CHECK(back.covariates() == t.covariates());
    CHECK(back.responses() == t.responses());
    save_training(back, scratch("rt2.csv"));
    CHECK(load_training(scratch("rt2.csv")).responses() == t.responses());

    const TargetSet tg(s, x);
    save_target(tg, scratch("rt_t.csv"));
    const TargetSet tback = load_target(scratch("rt_t.csv"));
    CHECK(tback.locations() == tg.locations());
    CHECK(tback.covariates() == tg.covariates());
  }
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1e300, 123456789.123456789}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("euclidean distance") {
  const double a[] = {0.0, 0.0}, b[] = {3.0, 4.0};
  CHECK(euclidean_distance(a, b) == 5.0);
  CHECK(squared_distance(a, b) == 25.0);
  CHECK(euclidean_distance(b, a) == euclidean_distance(a, b));
}
