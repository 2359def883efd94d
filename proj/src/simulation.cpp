#include "spglm/simulation.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <thread>

#include "spglm/baselines.hpp"
#include "spglm/csv.hpp"
#include "spglm/error.hpp"
#include "spglm/glm.hpp"

namespace spglm {

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double infill_logit(double x) {
  if (x < -0.125) return x;
  if (x < 0.125) return 0.875 - x;
  return 0.625 + x;
}

double extrapolation_logit(double x) { return x < 0.875 ? x : 0.875 - x; }

Eigen::VectorXd SimData::target_means() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(targets.size()));
  for (Eigen::Index m = 0; m < out.size(); ++m) out(m) = truth(point(targets.locations(), m));
  return out;
}

namespace {

SimData logistic_design(double (*logit)(double), double t_lo1, double t_hi1, double t_lo2, double t_hi2,
                        std::size_t n_train, std::size_t n_target, std::uint64_t seed) {
  if (n_train < 1 || n_target < 1) fail(ErrorKind::Validation, "simulate", "counts must be at least 1");
  Rng rng(seed);
  std::uniform_real_distribution<double> train_u(-1.0, 1.0);
  const auto n = static_cast<Eigen::Index>(n_train);
  const auto m = static_cast<Eigen::Index>(n_target);

  PointMatrix s(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    s(i, 0) = train_u(rng);
    s(i, 1) = train_u(rng);
  }
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::bernoulli_distribution coin(logistic(logit(s(i, 0))));
    y(i) = coin(rng) ? 1.0 : 0.0;
  }
  std::uniform_real_distribution<double> u1(t_lo1, t_hi1), u2(t_lo2, t_hi2);
  PointMatrix st(m, 2);
  for (Eigen::Index i = 0; i < m; ++i) {
    st(i, 0) = u1(rng);
    st(i, 1) = u2(rng);
  }
  Eigen::MatrixXd x(n, 2), xt(m, 2);
  x.col(0).setOnes();
  x.col(1) = s.col(0);
  xt.col(0).setOnes();
  xt.col(1) = st.col(0);
  return SimData{TrainingSet(std::move(s), std::move(x), std::move(y)), TargetSet(std::move(st), std::move(xt)),
                 ExponentialFamily(FamilyKind::Bernoulli),
                 [logit](std::span<const double> p) { return logistic(logit(p[0])); }};
}

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

bool on_sixteenth_grid(double v, int max_i) {
  for (int i = 1; i <= max_i; ++i) {
    if (v == i / 16.0) return true;
  }
  return false;
}

}  // namespace

SimData gen_infill(double scale, std::size_t n_train, std::size_t n_target, std::uint64_t seed) {
  if (!(scale > 0.0 && scale <= 1.0)) fail(ErrorKind::Validation, "simulate", "infill scale must lie in (0, 1]");
  return logistic_design(infill_logit, -scale, scale, -scale, scale, n_train, n_target, seed);
}

SimData gen_extrapolation(double shift, std::size_t n_train, std::size_t n_target, std::uint64_t seed) {
  if (!(shift > 0.0) || !std::isfinite(shift)) fail(ErrorKind::Validation, "simulate", "shift must be positive");
  return logistic_design(extrapolation_logit, 1.0 - shift, 1.0 + shift, -1.0, 1.0, n_train, n_target, seed);
}

SimData gen_counterexample(std::size_t n_train, std::uint64_t seed) {
  if (n_train < 2) fail(ErrorKind::Validation, "simulate", "need at least two training points");
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-0.75, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(n_train);
  PointMatrix s(n, 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) s(i, 0) = u(rng);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = s(i, 0) * s(i, 0) + noise(rng);
  Eigen::MatrixXd x = s;
  PointMatrix st(2, 1);
  st << -0.5, 0.5;
  Eigen::MatrixXd xt = st;
  return SimData{TrainingSet(std::move(s), std::move(x), std::move(y)), TargetSet(std::move(st), std::move(xt)),
                 ExponentialFamily(FamilyKind::Gaussian), [](std::span<const double> p) { return p[0] * p[0]; }};
}

std::size_t SimConfig::target_coefficient() const {
  if (coefficient) return *coefficient;
  return design == Design::Counterexample ? 0 : 1;
}

void validate(const SimConfig& cfg) {
  const char* stage = "config";
  if (cfg.n_train < 2 || cfg.n_target < 1 || cfg.n_replicates < 1) {
    fail(ErrorKind::Validation, stage, "n_train must be at least 2, n_target and n_replicates at least 1");
  }
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) fail(ErrorKind::Validation, stage, "alpha must lie in (0, 1)");
  if (!(cfg.lipschitz >= 0.0) || !std::isfinite(cfg.lipschitz)) {
    fail(ErrorKind::Validation, stage, "lipschitz must be finite and nonnegative");
  }
  if (cfg.methods.empty()) fail(ErrorKind::Validation, stage, "at least one method is required");
  for (const auto& m : cfg.methods) standard_method(m);
  const std::size_t p_total = cfg.design == Design::Counterexample ? 1 : 2;
  if (cfg.target_coefficient() >= p_total) fail(ErrorKind::Validation, stage, "coefficient index out of range");
  switch (cfg.design) {
    case Design::Infill:
      if (!(cfg.parameter > 0.0 && cfg.parameter <= 1.0)) fail(ErrorKind::Validation, stage, "scale must lie in (0, 1]");
      if (!cfg.custom && !on_sixteenth_grid(cfg.parameter, 16)) {
        fail(ErrorKind::Validation, stage, "scale must be i/16 for i in 1..16 unless custom is set");
      }
      break;
    case Design::Extrapolation:
      if (!(cfg.parameter > 0.0) || !std::isfinite(cfg.parameter)) fail(ErrorKind::Validation, stage, "shift must be positive");
      if (!cfg.custom && !on_sixteenth_grid(cfg.parameter, 8)) {
        fail(ErrorKind::Validation, stage, "shift must be i/16 for i in 1..8 unless custom is set");
      }
      break;
    case Design::Counterexample:
      break;
  }
}

SimData generate(const SimConfig& cfg, std::uint64_t seed) {
  switch (cfg.design) {
    case Design::Infill: return gen_infill(cfg.parameter, cfg.n_train, cfg.n_target, seed);
    case Design::Extrapolation: return gen_extrapolation(cfg.parameter, cfg.n_train, cfg.n_target, seed);
    case Design::Counterexample: return gen_counterexample(cfg.n_train, seed);
  }
  fail(ErrorKind::Validation, "simulate", "unknown design");
}

ReplicateRecord make_record(std::size_t replicate, std::string method, double beta_true, double estimate,
                            double lower, double upper) {
  ReplicateRecord r;
  r.replicate = replicate;
  r.method = std::move(method);
  r.beta_true = beta_true;
  r.estimate = estimate;
  r.lower = lower;
  r.upper = upper;
  r.covered = lower <= beta_true && beta_true <= upper;
  r.width = upper - lower;
  const bool above = lower > 0.0, below = upper < 0.0;
  // a zero estimand has no sign, so any sign claim counts as wrong
  r.sign_tp = (above && beta_true > 0.0) || (below && beta_true < 0.0);
  r.sign_fp = (above || below) && !r.sign_tp;
  return r;
}

ReplicateRecord failed_record(std::size_t replicate, std::string method, double beta_true, std::string error) {
  ReplicateRecord r;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.replicate = replicate;
  r.method = std::move(method);
  r.beta_true = beta_true;
  r.estimate = r.lower = r.upper = r.width = nan;
  r.failed = true;
  r.error = std::move(error);
  return r;
}

std::vector<MethodSummary> summarize(const std::vector<ReplicateRecord>& records) {
  std::vector<MethodSummary> out;
  std::map<std::string, std::size_t> slot;
  for (const auto& r : records) {
    auto [it, fresh] = slot.try_emplace(r.method, out.size());
    if (fresh) out.push_back(MethodSummary{r.method});
    MethodSummary& s = out[it->second];
    if (r.failed) {
      ++s.n_failed;
      continue;
    }
    ++s.n_effective;
    s.coverage += r.covered;
    s.mean_width += r.width;
    s.fp_prop += r.sign_fp;
    s.tp_prop += r.sign_tp;
  }
  for (auto& s : out) {
    if (s.n_effective == 0) {
      s.coverage = s.mean_width = s.fp_prop = s.tp_prop = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const auto n = static_cast<double>(s.n_effective);
    s.coverage /= n;
    s.mean_width /= n;
    s.fp_prop /= n;
    s.tp_prop /= n;
  }
  return out;
}

NamedMethod standard_method(const std::string& token) {
  if (token == "proposed") {
    return {token, [](const SimData& d, const SimConfig& cfg, std::uint64_t seed) {
              FitOptions opt;
              opt.lipschitz = cfg.lipschitz;
              opt.alpha = cfg.alpha;
              opt.k_policy = cfg.k_policy;
              opt.seed = mix(seed);
              InferenceResult res = fit(d.train, d.targets, d.family, opt);
              const std::size_t p = cfg.target_coefficient();
              return MethodOutcome{res.beta_hat(static_cast<Eigen::Index>(p)), res.intervals.at(p), std::move(res.trace)};
            }};
  }
  const BaselineMethod method = baseline_from_token(token);
  return {token, [method](const SimData& d, const SimConfig& cfg, std::uint64_t) {
            const BaselineResult res = baseline_interval(method, d.train, d.targets, d.family, cfg.alpha);
            const std::size_t p = cfg.target_coefficient();
            return MethodOutcome{res.beta_hat(static_cast<Eigen::Index>(p)), res.intervals.at(p), std::nullopt};
          }};
}

StudyResult run_study(const SimConfig& cfg, std::size_t jobs) {
  validate(cfg);
  std::vector<NamedMethod> methods;
  for (const auto& m : cfg.methods) methods.push_back(standard_method(m));
  return run_study(cfg, methods, jobs);
}

StudyResult run_study(const SimConfig& cfg, const std::vector<NamedMethod>& methods, std::size_t jobs) {
  const std::size_t reps = cfg.n_replicates;
  std::vector<std::vector<ReplicateRecord>> per_rep(reps);
  std::optional<KSelectionTrace> first_trace;

  auto run_one = [&](std::size_t r) {
    const std::uint64_t seed = cfg.seed_base + r;
    auto& rows = per_rep[r];
    double beta_true = std::numeric_limits<double>::quiet_NaN();
    std::optional<SimData> data;
    std::string setup_error;
    try {
      data.emplace(generate(cfg, seed));
      const Eigen::VectorXd truth = population_estimand(data->target_means(), data->targets, data->family);
      beta_true = truth(static_cast<Eigen::Index>(cfg.target_coefficient()));
    } catch (const std::exception& e) {
      setup_error = e.what();
    }
    for (const auto& m : methods) {
      if (!setup_error.empty()) {
        rows.push_back(failed_record(r, m.name, beta_true, setup_error));
        continue;
      }
      try {
        MethodOutcome out = m.run(*data, cfg, seed);
        rows.push_back(make_record(r, m.name, beta_true, out.estimate, out.interval.lower, out.interval.upper));
        if (r == 0 && out.trace && !first_trace) first_trace = std::move(out.trace);
      } catch (const std::exception& e) {
        rows.push_back(failed_record(r, m.name, beta_true, e.what()));
      }
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, reps));
  if (workers == 1) {
    for (std::size_t r = 0; r < reps; ++r) run_one(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < reps; r = next++) run_one(r);
      });
    }
  }

  StudyResult out;
  for (auto& rows : per_rep) {
    for (auto& row : rows) out.records.push_back(std::move(row));
  }
  out.summary = summarize(out.records);
  out.first_trace = std::move(first_trace);
  return out;
}

void write_records_csv(const std::vector<ReplicateRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Validation, "simulate", "cannot write '" + path + "'");
  out << "replicate,method,beta_true,lower,upper,covered,width,sign_fp,sign_tp,failed\n";
  for (const auto& r : records) {
    out << r.replicate << ',' << r.method << ',' << format_double(r.beta_true) << ',' << format_double(r.lower) << ','
        << format_double(r.upper) << ',' << int(r.covered) << ',' << format_double(r.width) << ',' << int(r.sign_fp)
        << ',' << int(r.sign_tp) << ',' << int(r.failed) << '\n';
  }
}

void write_summary_csv(const std::vector<MethodSummary>& summary, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Validation, "simulate", "cannot write '" + path + "'");
  out << "method,coverage,mean_width,fp_prop,tp_prop,n_effective\n";
  for (const auto& s : summary) {
    out << s.method << ',' << format_double(s.coverage) << ',' << format_double(s.mean_width) << ','
        << format_double(s.fp_prop) << ',' << format_double(s.tp_prop) << ',' << s.n_effective << '\n';
  }
}

}  // namespace spglm
