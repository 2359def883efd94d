#include "spglm/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "spglm/dense_lp.hpp"
#include "spglm/error.hpp"
#include "spglm/kdtree.hpp"
#include "spglm/network_simplex.hpp"

namespace spglm {

namespace {

constexpr double kMassTolerance = 1e-9;

void check_measure(const DiscreteMeasure& m, const char* name) {
  if (m.support.rows() != m.mass.size()) {
    fail(ErrorKind::Validation, "transport", std::string(name) + ": support and mass differ in length");
  }
  for (Eigen::Index i = 0; i < m.mass.size(); ++i) {
    if (!(m.mass(i) >= 0.0) || !std::isfinite(m.mass(i))) {
      fail(ErrorKind::Validation, "transport", std::string(name) + ": masses must be finite and nonnegative");
    }
  }
  if (!m.support.allFinite()) fail(ErrorKind::Validation, "transport", std::string(name) + ": non-finite support point");
}

DiscreteMeasure positive_part(const DiscreteMeasure& m) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < m.mass.size(); ++i) {
    if (m.mass(i) > 0.0) keep.push_back(i);
  }
  DiscreteMeasure out{PointMatrix(static_cast<Eigen::Index>(keep.size()), m.support.cols()),
                      Eigen::VectorXd(static_cast<Eigen::Index>(keep.size()))};
  for (std::size_t r = 0; r < keep.size(); ++r) {
    out.support.row(static_cast<Eigen::Index>(r)) = m.support.row(keep[r]);
    out.mass(static_cast<Eigen::Index>(r)) = m.mass(keep[r]);
  }
  return out;
}

// Largest-remainder rounding of mass / total onto integers summing to `scale`.
std::vector<std::int64_t> integer_masses(const Eigen::VectorXd& mass, double total, std::int64_t scale) {
  const auto n = static_cast<std::size_t>(mass.size());
  std::vector<std::int64_t> out(n);
  std::vector<double> remainder(n);
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double exact = mass(static_cast<Eigen::Index>(i)) / total * static_cast<double>(scale);
    out[i] = static_cast<std::int64_t>(std::floor(exact));
    remainder[i] = exact - static_cast<double>(out[i]);
    assigned += out[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  std::int64_t missing = scale - assigned;
  for (std::size_t i = 0; missing > 0; i = (i + 1) % n, --missing) ++out[order[i]];
  for (std::size_t i = 0; missing < 0; i = (i + 1) % n) {
    if (out[order[n - 1 - i]] > 0) {
      --out[order[n - 1 - i]];
      ++missing;
    }
  }
  return out;
}

double wasserstein_line(const DiscreteMeasure& a, const DiscreteMeasure& b, double ta, double tb) {
  const double common = 0.5 * (ta + tb);
  std::vector<std::pair<double, double>> events;
  events.reserve(static_cast<std::size_t>(a.mass.size() + b.mass.size()));
  for (Eigen::Index i = 0; i < a.mass.size(); ++i) events.emplace_back(a.support(i, 0), a.mass(i) / ta);
  for (Eigen::Index i = 0; i < b.mass.size(); ++i) events.emplace_back(b.support(i, 0), -b.mass(i) / tb);
  std::sort(events.begin(), events.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  double cdf = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < events.size(); ++i) {
    cdf += events[i].second;
    total += std::abs(cdf) * (events[i + 1].first - events[i].first);
  }
  return common * total;
}

}  // namespace

SignedWeighting merge_coincident(const SignedWeighting& input) {
  const auto n = static_cast<std::size_t>(input.points.rows());
  if (input.weights.size() != input.points.rows()) {
    fail(ErrorKind::Validation, "transport", "points and weights differ in length");
  }
  std::vector<std::size_t> rep(n);
  std::iota(rep.begin(), rep.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (rep[x] != x) x = rep[x] = rep[rep[x]];
    return x;
  };
  if (n > 1) {
    const KdTree tree(input.points);
    const double r2 = kMergeTolerance * kMergeTolerance;
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& nb : tree.within(point(input.points, static_cast<Eigen::Index>(i)), r2)) {
        const std::size_t a = find(i), b = find(nb.index);
        if (a != b) rep[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  std::vector<std::size_t> slot(n, n);
  std::vector<std::size_t> firsts;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (slot[r] == n) {
      slot[r] = firsts.size();
      firsts.push_back(i);
    }
  }
  SignedWeighting out{PointMatrix(static_cast<Eigen::Index>(firsts.size()), input.points.cols()),
                      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(firsts.size()))};
  for (std::size_t s = 0; s < firsts.size(); ++s) {
    out.points.row(static_cast<Eigen::Index>(s)) = input.points.row(static_cast<Eigen::Index>(firsts[s]));
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.weights(static_cast<Eigen::Index>(slot[find(i)])) += input.weights(static_cast<Eigen::Index>(i));
  }
  return out;
}

double wasserstein1(const DiscreteMeasure& a_in, const DiscreteMeasure& b_in, TransportBackend backend) {
  check_measure(a_in, "first measure");
  check_measure(b_in, "second measure");
  if (a_in.support.rows() > 0 && b_in.support.rows() > 0 && a_in.support.cols() != b_in.support.cols()) {
    fail(ErrorKind::Validation, "transport", "measures live in different dimensions");
  }
  const double ta = a_in.total();
  const double tb = b_in.total();
  if (std::abs(ta - tb) > kMassTolerance * std::max({ta, tb, 1.0})) {
    fail(ErrorKind::MassImbalance, "transport",
         "total masses differ: " + std::to_string(ta) + " vs " + std::to_string(tb));
  }
  if (ta <= 0.0 || tb <= 0.0) return 0.0;

  const DiscreteMeasure a = positive_part(a_in);
  const DiscreteMeasure b = positive_part(b_in);
  if (backend == TransportBackend::Auto && a.support.cols() == 1) return wasserstein_line(a, b, ta, tb);

  constexpr std::int64_t kScale = std::int64_t{1} << 40;
  const auto ia = integer_masses(a.mass, ta, kScale);
  const auto ib = integer_masses(b.mass, tb, kScale);
  std::vector<Eigen::Index> ka, kb;
  std::vector<std::int64_t> supply, demand;
  for (std::size_t i = 0; i < ia.size(); ++i) {
    if (ia[i] > 0) {
      ka.push_back(static_cast<Eigen::Index>(i));
      supply.push_back(ia[i]);
    }
  }
  for (std::size_t j = 0; j < ib.size(); ++j) {
    if (ib[j] > 0) {
      kb.push_back(static_cast<Eigen::Index>(j));
      demand.push_back(ib[j]);
    }
  }
  CostMatrix cost(static_cast<Eigen::Index>(ka.size()), static_cast<Eigen::Index>(kb.size()));
  for (std::size_t i = 0; i < ka.size(); ++i) {
    for (std::size_t j = 0; j < kb.size(); ++j) {
      cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          euclidean_distance(point(a.support, ka[i]), point(b.support, kb[j]));
    }
  }
  const auto sol = solve_transportation(supply, demand, cost);
  return 0.5 * (ta + tb) * sol.cost / static_cast<double>(kScale);
}

double lipschitz_supremum(const SignedWeighting& targets, const SignedWeighting& train, TransportBackend backend) {
  if (targets.points.rows() != targets.weights.size() || train.points.rows() != train.weights.size()) {
    fail(ErrorKind::Validation, "bias_bound", "points and weights differ in length");
  }
  if (!targets.weights.allFinite() || !train.weights.allFinite()) {
    fail(ErrorKind::Validation, "bias_bound", "non-finite weight");
  }
  const double sw = targets.weights.sum();
  const double sv = train.weights.sum();
  const double scale = std::max({1.0, targets.weights.cwiseAbs().sum(), train.weights.cwiseAbs().sum()});
  if (std::abs(sw - sv) > kMassTolerance * scale) {
    fail(ErrorKind::MassImbalance, "bias_bound",
         "target and training weights have different net mass: " + std::to_string(sw) + " vs " + std::to_string(sv));
  }

  std::vector<std::pair<const PointMatrix*, Eigen::Index>> rows;
  std::vector<double> signed_mass;
  for (Eigen::Index i = 0; i < targets.weights.size(); ++i) {
    if (targets.weights(i) != 0.0) {
      rows.emplace_back(&targets.points, i);
      signed_mass.push_back(targets.weights(i));
    }
  }
  for (Eigen::Index i = 0; i < train.weights.size(); ++i) {
    if (train.weights(i) != 0.0) {
      rows.emplace_back(&train.points, i);
      signed_mass.push_back(-train.weights(i));
    }
  }
  if (rows.empty()) return 0.0;
  const Eigen::Index d = rows.front().first->cols();
  SignedWeighting combined{PointMatrix(static_cast<Eigen::Index>(rows.size()), d),
                           Eigen::VectorXd(static_cast<Eigen::Index>(rows.size()))};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].first->cols() != d) fail(ErrorKind::Validation, "bias_bound", "points differ in dimension");
    combined.points.row(static_cast<Eigen::Index>(r)) = rows[r].first->row(rows[r].second);
    combined.weights(static_cast<Eigen::Index>(r)) = signed_mass[r];
  }
  const SignedWeighting merged = merge_coincident(combined);

  DiscreteMeasure plus{merged.points, merged.weights.cwiseMax(0.0)};
  DiscreteMeasure minus{merged.points, (-merged.weights).cwiseMax(0.0)};
  if (plus.total() == 0.0 && minus.total() == 0.0) return 0.0;
  try {
    return wasserstein1(plus, minus, backend);
  } catch (const Error& e) {
    throw Error(e.kind(), "bias_bound", e.what());
  }
}

double dual_check(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  check_measure(a, "first measure");
  check_measure(b, "second measure");
  const double ta = a.total(), tb = b.total();
  if (std::abs(ta - tb) > kMassTolerance * std::max({ta, tb, 1.0})) {
    fail(ErrorKind::MassImbalance, "dual_check", "total masses differ");
  }
  const Eigen::Index na = a.support.rows(), nb = b.support.rows();
  const Eigen::Index d = na > 0 ? a.support.cols() : b.support.cols();
  SignedWeighting combined{PointMatrix(na + nb, d), Eigen::VectorXd(na + nb)};
  for (Eigen::Index i = 0; i < na; ++i) {
    combined.points.row(i) = a.support.row(i);
    combined.weights(i) = a.mass(i);
  }
  for (Eigen::Index j = 0; j < nb; ++j) {
    combined.points.row(na + j) = b.support.row(j);
    combined.weights(na + j) = -b.mass(j);
  }
  const SignedWeighting mu = merge_coincident(combined);
  const Eigen::Index n = mu.points.rows();
  if (n <= 1) return 0.0;

  // Anchor f_0 = 0 and substitute g_i = f_i + d(i, 0) >= 0 for i >= 1.
  Eigen::MatrixXd dist(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) dist(i, j) = euclidean_distance(point(mu.points, i), point(mu.points, j));
  }
  const Eigen::Index vars = n - 1;
  const Eigen::Index cons = vars * (vars - 1) + vars;
  Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(cons, vars);
  Eigen::VectorXd rhs(cons);
  Eigen::Index row = 0;
  for (Eigen::Index i = 1; i < n; ++i) {
    for (Eigen::Index j = 1; j < n; ++j) {
      if (i == j) continue;
      lhs(row, i - 1) = 1.0;
      lhs(row, j - 1) = -1.0;
      rhs(row) = std::max(0.0, dist(i, j) + dist(i, 0) - dist(j, 0));
      ++row;
    }
    lhs(row, i - 1) = 1.0;
    rhs(row) = 2.0 * dist(i, 0);
    ++row;
  }
  Eigen::VectorXd c = mu.weights.tail(vars);
  const double offset = -(mu.weights.tail(vars).array() * dist.col(0).tail(vars).array()).sum();
  const auto lp = maximize_lp(c, lhs, rhs);
  if (lp.status != LpStatus::Optimal) fail(ErrorKind::Infeasible, "dual_check", "dual LP is unbounded");
  return lp.value + offset;
}

}  // namespace spglm
