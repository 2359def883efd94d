#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spglm/dataset.hpp"
#include "spglm/family.hpp"
#include "spglm/inference.hpp"
#include "spglm/neighbors.hpp"

namespace spglm {

double logistic(double x);
// Link-scale mean surfaces of the two logistic designs, as functions of the
// first coordinate.
double infill_logit(double x);
double extrapolation_logit(double x);

struct SimData {
  TrainingSet train;
  TargetSet targets;
  ExponentialFamily family;
  std::function<double(std::span<const double>)> truth;  // E[Y | S = s]

  Eigen::VectorXd target_means() const;
};

// Train uniform on [-1,1]^2, targets uniform on [-scale,scale]^2, covariates
// (1, s1), Bernoulli responses.
SimData gen_infill(double scale, std::size_t n_train, std::size_t n_target, std::uint64_t seed);
// Targets uniform on [1-shift, 1+shift] x [-1,1], otherwise as gen_infill.
SimData gen_extrapolation(double shift, std::size_t n_train, std::size_t n_target, std::uint64_t seed);
// Train uniform on [-0.75, 1], targets at -0.5 and 0.5, covariate s (no
// intercept), Y = s^2 + N(0,1), Gaussian family.
SimData gen_counterexample(std::size_t n_train, std::uint64_t seed);

enum class Design { Infill, Extrapolation, Counterexample };

struct SimConfig {
  Design design = Design::Infill;
  double parameter = 0.25;  // scale (infill) or shift (extrapolation)
  std::size_t n_train = 2000;
  std::size_t n_target = 100;
  std::size_t n_replicates = 100;
  std::uint64_t seed_base = 0;
  std::vector<std::string> methods{"proposed"};
  double alpha = 0.05;
  double lipschitz = 0.25;
  KPolicy k_policy = KPolicy::adaptive();
  bool custom = false;  // lifts the grid restriction on scale/shift
  std::optional<std::size_t> coefficient;  // defaults to the slope (or the only coefficient)

  std::size_t target_coefficient() const;
};

void validate(const SimConfig& cfg);
SimData generate(const SimConfig& cfg, std::uint64_t seed);

struct ReplicateRecord {
  std::size_t replicate = 0;
  std::string method;
  double beta_true = 0.0;
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool covered = false;
  double width = 0.0;
  bool sign_fp = false;
  bool sign_tp = false;
  bool failed = false;
  std::string error;
};

ReplicateRecord make_record(std::size_t replicate, std::string method, double beta_true, double estimate,
                            double lower, double upper);
ReplicateRecord failed_record(std::size_t replicate, std::string method, double beta_true, std::string error);

struct MethodSummary {
  std::string method;
  double coverage = 0.0;
  double mean_width = 0.0;
  double fp_prop = 0.0;
  double tp_prop = 0.0;
  std::size_t n_effective = 0;
  std::size_t n_failed = 0;
};

// One row per method in first-appearance order.
std::vector<MethodSummary> summarize(const std::vector<ReplicateRecord>& records);

struct MethodOutcome {
  double estimate;
  Interval interval;
  std::optional<KSelectionTrace> trace;
};

using MethodFn = std::function<MethodOutcome(const SimData&, const SimConfig&, std::uint64_t seed)>;

struct NamedMethod {
  std::string name;
  MethodFn run;
};

// "proposed", "classic", "sandwich" or "kde_weighted".
NamedMethod standard_method(const std::string& token);

struct StudyResult {
  std::vector<ReplicateRecord> records;  // replicate-major, methods in config order
  std::vector<MethodSummary> summary;
  std::optional<KSelectionTrace> first_trace;
};

// Replicate r draws its data from seed_base + r. Method failures become
// failed rows. Output does not depend on `jobs`.
StudyResult run_study(const SimConfig& cfg, std::size_t jobs = 1);
StudyResult run_study(const SimConfig& cfg, const std::vector<NamedMethod>& methods, std::size_t jobs = 1);

void write_records_csv(const std::vector<ReplicateRecord>& records, const std::string& path);
void write_summary_csv(const std::vector<MethodSummary>& summary, const std::string& path);

}  // namespace spglm
