// One line per criterion; exit status is the number of failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "spglm/baselines.hpp"
#include "spglm/glm.hpp"
#include "spglm/inference.hpp"
#include "spglm/simulation.hpp"
#include "spglm/transport.hpp"

using namespace spglm;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

const MethodSummary& row(const StudyResult& s, const std::string& method) {
  for (const auto& r : s.summary) {
    if (r.method == method) return r;
  }
  throw std::runtime_error("missing method " + method);
}

SimConfig desk(Design d, double parameter, std::uint64_t seed_base) {
  SimConfig c;
  c.design = d;
  c.parameter = parameter;
  c.n_train = 2000;
  c.n_target = 100;
  c.n_replicates = 100;
  c.seed_base = seed_base;
  c.lipschitz = 0.25;
  c.alpha = 0.05;
  return c;
}

const std::vector<double> kScales{1.0 / 16, 4.0 / 16, 8.0 / 16, 16.0 / 16};
const std::vector<double> kShifts{1.0 / 16, 4.0 / 16, 8.0 / 16};

// Studies are shared between criteria 1-3.
std::vector<StudyResult> g_infill;
std::vector<StudyResult> g_extrap;

Verdict coverage_infill() {
  bool ok = true;
  std::ostringstream d;
  for (std::size_t i = 0; i < kScales.size(); ++i) {
    g_infill.push_back(run_study(desk(Design::Infill, kScales[i], 100000 + 1000 * i)));
    const auto& s = row(g_infill.back(), "proposed");
    ok = ok && s.n_failed == 0 && s.coverage >= 0.90;
    d << " scale=" << fmt(kScales[i]) << ":" << fmt(s.coverage) << (s.n_failed ? "(failed " + std::to_string(s.n_failed) + ")" : "");
  }
  return {ok, "coverage" + d.str() + " (need >= 0.9)"};
}

Verdict sign_fp_proposed() {
  for (std::size_t i = 0; i < kShifts.size(); ++i) {
    SimConfig c = desk(Design::Extrapolation, kShifts[i], 200000 + 1000 * i);
    if (i == 2) c.methods = {"proposed", "classic", "sandwich", "kde_weighted"};
    g_extrap.push_back(run_study(c));
  }
  bool ok = true;
  double worst = 0.0;
  std::ostringstream d;
  auto check = [&](const StudyResult& r, const std::string& label) {
    const auto& s = row(r, "proposed");
    ok = ok && s.n_failed == 0 && s.fp_prop <= 0.02;
    worst = std::max(worst, s.fp_prop);
    d << " " << label << ":" << fmt(s.fp_prop);
  };
  for (std::size_t i = 0; i < kScales.size(); ++i) check(g_infill[i], "scale=" + fmt(kScales[i]));
  for (std::size_t i = 0; i < kShifts.size(); ++i) check(g_extrap[i], "shift=" + fmt(kShifts[i]));
  return {ok, "max sign-FP " + fmt(worst) + " (need <= 0.02);" + d.str()};
}

Verdict baselines_fail() {
  const StudyResult& r = g_extrap[2];
  bool ok = true;
  std::ostringstream d;
  for (const char* m : {"classic", "sandwich", "kde_weighted"}) {
    const auto& s = row(r, m);
    const bool good = s.coverage <= 0.50 && s.fp_prop >= 0.25;
    ok = ok && good;
    d << " " << m << ": coverage " << fmt(s.coverage) << " fp " << fmt(s.fp_prop) << (good ? "" : " [x]");
  }
  return {ok, "shift=0.5 (need coverage <= 0.5, fp >= 0.25);" + d.str()};
}

Verdict counterexample() {
  const std::size_t reps = 200;
  const ExponentialFamily gauss(FamilyKind::Gaussian);
  auto slope = [&](const SimData& d, const KPolicy& k, std::uint64_t seed) {
    FitOptions o;
    o.lipschitz = 0.0;
    o.k_policy = k;
    o.seed = seed;
    return fit(d.train, d.targets, gauss, o).beta_hat(0);
  };
  std::vector<double> k1;
  double mae_small = 0.0, mae_large = 0.0, ols = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    const SimData big = gen_counterexample(50000, 300000 + r);
    const SimData small = gen_counterexample(2000, 400000 + r);
    k1.push_back(slope(big, KPolicy::fixed(1), r));
    mae_large += std::abs(slope(big, KPolicy::adaptive(), r)) / reps;
    mae_small += std::abs(slope(small, KPolicy::adaptive(), r)) / reps;
    ols += fit_training_mle(big.train, gauss).beta(0) / reps;
  }
  double mean = 0.0, var = 0.0;
  for (double v : k1) mean += v / reps;
  for (double v : k1) var += (v - mean) * (v - mean) / (reps - 1);
  const double sd = std::sqrt(var);
  const bool ok = sd >= 0.4 && mae_large <= 0.5 * mae_small && std::abs(ols - 0.3606) <= 0.05;
  return {ok, "k=1 sd " + fmt(sd) + " (need >= 0.4); adaptive MAE " + fmt(mae_small) + " -> " + fmt(mae_large) +
                  " (need ratio <= 0.5); training OLS " + fmt(ols) + " (need within 0.05 of 0.3606)"};
}

Verdict oracle_suite() {
  std::ostringstream d;
  bool ok = true;

  // tau against grid search and bisection
  double tau_err = 0.0;
  {
    std::mt19937_64 rng(501);
    std::uniform_real_distribution<double> ux(-2.0, 2.0), ua(0.05, 0.95);
    const ExponentialFamily bern(FamilyKind::Bernoulli);
    for (int rep = 0, done = 0; done < 25; ++rep) {
      const Eigen::Index m = 2 + rep % 6;
      Eigen::MatrixXd x(m, 1);
      Eigen::VectorXd a(m);
      PointMatrix s(m, 1);
      for (Eigen::Index i = 0; i < m; ++i) {
        x(i, 0) = ux(rng);
        a(i) = ua(rng);
        s(i, 0) = static_cast<double>(i);
      }
      const double ref = oracle::tau_scalar(a, x.col(0), bern);
      if (std::abs(ref) > 9.9) continue;
      tau_err = std::max(tau_err, std::abs(tau(a, TargetSet(s, x), bern).beta(0) - ref));
      ++done;
    }
  }
  ok = ok && tau_err <= 1e-6;
  d << "tau " << fmt(tau_err);

  // jacobian against central differences
  double jac_err = 0.0;
  {
    std::mt19937_64 rng(502);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> ua(0.15, 0.85);
    const ExponentialFamily bern(FamilyKind::Bernoulli);
    for (int rep = 0; rep < 25; ++rep) {
      Eigen::MatrixXd x(6, 2);
      PointMatrix s(6, 1);
      for (Eigen::Index i = 0; i < 6; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = g(rng);
        s(i, 0) = static_cast<double>(i);
      }
      Eigen::VectorXd a(6);
      for (auto& v : a) v = ua(rng);
      const TargetSet t(s, x);
      const Eigen::MatrixXd j = tau_jacobian(a, t, bern);
      const double h = 1e-6;
      for (Eigen::Index m = 0; m < 6; ++m) {
        Eigen::VectorXd ap = a, am = a;
        ap(m) += h;
        am(m) -= h;
        const Eigen::VectorXd fd = (tau(ap, t, bern).beta - tau(am, t, bern).beta) / (2 * h);
        jac_err = std::max(jac_err, (fd - j.col(m)).cwiseAbs().maxCoeff());
      }
    }
  }
  ok = ok && jac_err <= 1e-4;
  d << "; jacobian " << fmt(jac_err);

  // transport: primal network simplex vs dual LP, then vertex enumeration
  double gap = 0.0, vertex = 0.0;
  {
    std::mt19937_64 rng(503);
    std::uniform_int_distribution<int> size(1, 7), dim(1, 3);
    for (int rep = 0; rep < 100; ++rep) {
      const Eigen::Index dm = dim(rng);
      const double total = 0.3 + 0.05 * rep;
      const auto a = oracle::random_measure(rng, size(rng), dm, total);
      const auto b = oracle::random_measure(rng, size(rng), dm, total);
      const double primal = wasserstein1(a, b, TransportBackend::NetworkSimplex);
      gap = std::max(gap, std::abs(primal - dual_check(a, b)) / std::max(primal, 1e-12));
    }
    for (int rep = 0; rep < 20; ++rep) {
      const auto a = oracle::random_measure(rng, 3, 2, 1.0);
      const auto b = oracle::random_measure(rng, 3, 2, 1.0);
      const double ref = oracle::w1_vertex_enumeration(a, b);
      vertex = std::max(vertex, std::abs(wasserstein1(a, b, TransportBackend::NetworkSimplex) - ref) / ref);
    }
  }
  ok = ok && gap <= 1e-7 && vertex <= 1e-7;
  d << "; W1 primal/dual " << fmt(gap) << ", 3x3 enumeration " << fmt(vertex);

  // standard error forms and the variance diagonal
  double se_err = 0.0;
  bool lambda_exact = true;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SimData sim = gen_infill(0.5, 600, 20, 504 + seed);
    Rng rng(seed);
    const WeightMatrix psi = build_weight_matrix(sim.train.locations(), sim.targets.locations(), 4 + seed, rng);
    const auto nn = self_nn_map(sim.train.locations(), rng);
    lambda_exact = lambda_exact && nn == oracle::self_nn_brute(sim.train.locations());
    const Eigen::VectorXd lambda = variance_diag(sim.train.responses(), nn);
    for (Eigen::Index n = 0; n < lambda.size(); ++n) {
      const double diff = sim.train.responses()(n) - sim.train.responses()(static_cast<Eigen::Index>(nn[n]));
      lambda_exact = lambda_exact && lambda(n) == 0.5 * diff * diff;
    }
    const Eigen::VectorXd means = psi.apply(sim.train.responses());
    const Eigen::MatrixXd jac = tau_jacobian(means.cwiseMax(0.02).cwiseMin(0.98), sim.targets, sim.family);
    const Eigen::VectorXd a = sigma_hat(psi, lambda, jac), b = sigma_hat_quadratic(psi, lambda, jac);
    for (Eigen::Index p = 0; p < a.size(); ++p) se_err = std::max(se_err, std::abs(a(p) - b(p)) / a(p));
  }
  ok = ok && se_err <= 1e-12 && lambda_exact;
  d << "; sigma forms " << fmt(se_err) << "; variance diagonal " << (lambda_exact ? "exact" : "MISMATCH");
  return {ok, d.str()};
}

Verdict adaptive_k() {
  bool ok = true;
  std::ostringstream d;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SimData sim = gen_infill(0.25, 10000, 100, 600 + seed);
    const KSelectionTrace t = select_adaptive_k(sim.train.locations(), sim.targets.locations(), StepRule::inverse_sqrt());
    bool steps = t.rows.front().k == 1;
    for (std::size_t i = 1; i < t.rows.size(); ++i) {
      const std::size_t dk = t.rows[i].k - t.rows[i - 1].k;
      steps = steps && t.rows[i].k >= t.rows[i - 1].k && dk <= 1 && t.rows[i].k <= t.rows[i].n;
    }
    const bool grows = t.at(10000).k > t.at(1000).k;
    const bool shrinks = t.at(10000).radius < t.at(1000).radius;
    ok = ok && steps && grows && shrinks;
    if (seed < 3 || !(steps && grows && shrinks)) {
      d << " seed " << seed << ": k " << t.at(1000).k << "->" << t.at(10000).k << ", R " << fmt(t.at(1000).radius)
        << "->" << fmt(t.at(10000).radius) << (steps ? "" : " [steps]");
    }
  }
  return {ok, "10 seeds;" + d.str() + (ok ? " ..." : "")};
}

Verdict variance_consistency() {
  bool ok = true;
  double sum_small = 0.0, sum_large = 0.0;
  int decreased = 0;
  std::string missed;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    double dev[2];
    for (int which = 0; which < 2; ++which) {
      const std::size_t n = which == 0 ? 1000 : 10000;
      const SimData sim = gen_infill(0.25, n, 100, 700 + seed);
      const KSelectionTrace t =
          select_adaptive_k(sim.train.locations(), sim.targets.locations(), StepRule::inverse_sqrt());
      Rng rng(seed);
      const WeightMatrix psi = build_weight_matrix(sim.train.locations(), sim.targets.locations(), t.final_k(), rng);
      const Eigen::VectorXd lambda = variance_diag(sim.train.responses(), self_nn_map(sim.train.locations(), rng));
      const Eigen::VectorXd f = sim.target_means();
      double total = 0.0;
      for (std::size_t m = 0; m < psi.rows(); ++m) {
        // k * sum_n (1/k)^2 lambda_n over the row support
        double acc = 0.0;
        for (std::size_t idx : psi.row(m)) acc += lambda(static_cast<Eigen::Index>(idx));
        const double diag = acc / static_cast<double>(psi.k());
        const Eigen::Index mi = static_cast<Eigen::Index>(m);
        total += std::abs(diag - f(mi) * (1 - f(mi)));
      }
      dev[which] = total / static_cast<double>(psi.rows());
    }
    sum_small += dev[0] / 10;
    sum_large += dev[1] / 10;
    if (dev[1] < dev[0]) ++decreased;
    else missed += " seed " + std::to_string(seed) + ": " + fmt(dev[0]) + " -> " + fmt(dev[1]);
    ok = ok && dev[1] < dev[0];
  }
  return {ok, "mean abs deviation " + fmt(sum_small) + " -> " + fmt(sum_large) + ", decreased in " +
                  std::to_string(decreased) + "/10 seeds (need all)" + missed};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"1 infill coverage", coverage_infill},
      {"2 proposed sign false positives", sign_fp_proposed},
      {"3 baselines fail under extrapolation", baselines_fail},
      {"4 counterexample regression", counterexample},
      {"5 oracle equivalence", oracle_suite},
      {"6 adaptive k properties", adaptive_k},
      {"7 variance consistency", variance_consistency},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %s: %s [%.0fs]\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str(), secs);
    std::fflush(stdout);
    if (!v.pass) ++failures;
  }
  return failures;
}
