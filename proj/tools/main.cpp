#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "spglm/baselines.hpp"
#include "spglm/config.hpp"
#include "spglm/csv.hpp"
#include "spglm/dataset.hpp"
#include "spglm/error.hpp"
#include "spglm/inference.hpp"
#include "spglm/report.hpp"
#include "spglm/simulation.hpp"
#include "spglm/transport.hpp"

namespace fs = std::filesystem;
using namespace spglm;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct FitArgs {
  std::string config, train, target, family, k, method, out, ktrace;
  double lipschitz = 0.0, alpha = 0.05;
  std::uint64_t seed = 0;
};

struct SimulateArgs {
  std::string config, out_dir;
  bool paper_scale = false;
  std::size_t jobs = 1;
};

struct BiasArgs {
  std::string targets, train, backend = "auto";
  double lipschitz = 1.0;
};

// Header s1..sd,w.
SignedWeighting load_weighted_points(const fs::path& path) {
  const NumericCsv csv = read_numeric_csv(path, "bias_bound");
  const std::size_t d = count_indexed_columns(csv.header, 0, 's');
  if (d == 0 || csv.header.size() != d + 1 || csv.header.back() != "w") {
    fail(ErrorKind::Validation, "bias_bound", "'" + path.string() + "' must have header s1,...,sd,w");
  }
  if (csv.rows.empty()) fail(ErrorKind::Validation, "bias_bound", "'" + path.string() + "' has no rows");
  const auto n = static_cast<Eigen::Index>(csv.rows.size());
  SignedWeighting sw{PointMatrix(n, static_cast<Eigen::Index>(d)), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = csv.rows[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < d; ++j) sw.points(i, static_cast<Eigen::Index>(j)) = row[j];
    sw.weights(i) = row[d];
  }
  return sw;
}

// Splits a signed measure into its positive and negative parts.
std::pair<DiscreteMeasure, DiscreteMeasure> split(const SignedWeighting& targets, const SignedWeighting& train) {
  const auto m = targets.points.rows(), n = train.points.rows();
  SignedWeighting all{PointMatrix(m + n, targets.points.cols()), Eigen::VectorXd(m + n)};
  all.points << targets.points, train.points;
  all.weights << targets.weights, -train.weights;
  const SignedWeighting merged = merge_coincident(all);
  std::vector<Eigen::Index> pos, neg;
  for (Eigen::Index i = 0; i < merged.weights.size(); ++i) {
    if (merged.weights(i) > 0.0) pos.push_back(i);
    if (merged.weights(i) < 0.0) neg.push_back(i);
  }
  auto take = [&](const std::vector<Eigen::Index>& idx, double sign) {
    DiscreteMeasure out{PointMatrix(static_cast<Eigen::Index>(idx.size()), merged.points.cols()),
                        Eigen::VectorXd(static_cast<Eigen::Index>(idx.size()))};
    for (std::size_t i = 0; i < idx.size(); ++i) {
      out.support.row(static_cast<Eigen::Index>(i)) = merged.points.row(idx[i]);
      out.mass(static_cast<Eigen::Index>(i)) = sign * merged.weights(idx[i]);
    }
    return out;
  };
  return {take(pos, 1.0), take(neg, -1.0)};
}

void write_json(const nlohmann::json& doc, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Validation, "output", "cannot write '" + path + "'");
  out << doc.dump(2) << '\n';
}

int cmd_fit(const FitArgs& a, const CLI::App& sub) {
  FitConfig cfg;
  if (!a.config.empty()) cfg = load_fit_config(a.config);
  // command-line values win over the config file
  auto pick = [&](const char* flag, auto& from_config, const auto& from_cli) {
    if (sub.count(flag) > 0) from_config = from_cli;
  };
  pick("--train", cfg.train, fs::path(a.train));
  pick("--target", cfg.target, fs::path(a.target));
  pick("--family", cfg.family, a.family);
  pick("--lipschitz", cfg.lipschitz, a.lipschitz);
  pick("--alpha", cfg.alpha, a.alpha);
  pick("--k", cfg.k_policy, a.k);
  pick("--seed", cfg.seed, a.seed);
  pick("--method", cfg.method, a.method);
  pick("--out", cfg.out, fs::path(a.out));
  pick("--ktrace", cfg.ktrace, fs::path(a.ktrace));

  auto require = [](bool present, const char* what) {
    if (!present) fail(ErrorKind::Validation, "usage", std::string("missing required option ") + what);
  };
  require(cfg.train.has_value(), "--train");
  require(cfg.target.has_value(), "--target");
  require(cfg.family.has_value(), "--family");
  require(cfg.out.has_value(), "--out");
  const std::string method = cfg.method.value_or("proposed");
  if (method == "proposed") require(cfg.lipschitz.has_value(), "--lipschitz");

  const TrainingSet train = load_training(*cfg.train);
  const TargetSet targets = load_target(*cfg.target);
  const ExponentialFamily family = ExponentialFamily::from_token(*cfg.family);
  const double alpha = cfg.alpha.value_or(0.05);

  nlohmann::json doc;
  if (method == "proposed") {
    FitOptions opt;
    opt.lipschitz = *cfg.lipschitz;
    opt.alpha = alpha;
    opt.k_policy = KPolicy::parse(cfg.k_policy.value_or("adaptive"));
    opt.seed = cfg.seed.value_or(0);
    const InferenceResult res = fit(train, targets, family, opt);
    doc = to_json(res);
    if (cfg.ktrace) {
      if (!res.trace) fail(ErrorKind::Validation, "usage", "--ktrace needs the adaptive k policy");
      write_trace_csv(*res.trace, cfg.ktrace->string());
    }
  } else {
    if (cfg.ktrace) fail(ErrorKind::Validation, "usage", "--ktrace applies to the proposed method only");
    doc = to_json(baseline_interval(baseline_from_token(method), train, targets, family, alpha));
  }
  write_json(doc, cfg.out->string());
  return 0;
}

int cmd_simulate(const SimulateArgs& a) {
  StudyConfig cfg = load_study_config(a.config);
  if (a.paper_scale) {
    cfg.sim.n_train = 10000;
    cfg.sim.n_replicates = 250;
  }
  fs::path out_dir;
  if (!a.out_dir.empty()) out_dir = a.out_dir;
  else if (cfg.out_dir) out_dir = *cfg.out_dir;
  else fail(ErrorKind::Validation, "usage", "missing --out-dir (and no out_dir in config)");
  if (a.jobs < 1) fail(ErrorKind::Validation, "usage", "--jobs must be at least 1");
  fs::create_directories(out_dir);

  const StudyResult study = run_study(cfg.sim, a.jobs);
  write_records_csv(study.records, (out_dir / "records.csv").string());
  write_summary_csv(study.summary, (out_dir / "summary.csv").string());
  if (study.first_trace) write_trace_csv(*study.first_trace, (out_dir / "ktrace.csv").string());

  for (const auto& s : study.summary) {
    std::printf("%-13s coverage %.3f  width %.4f  fp %.3f  tp %.3f  n %zu  failed %zu\n", s.method.c_str(),
                s.coverage, s.mean_width, s.fp_prop, s.tp_prop, s.n_effective, s.n_failed);
  }
  return 0;
}

int cmd_bias_bound(const BiasArgs& a) {
  TransportBackend backend = TransportBackend::Auto;
  if (a.backend == "simplex") backend = TransportBackend::NetworkSimplex;
  else if (a.backend != "auto") fail(ErrorKind::Validation, "usage", "--backend must be auto or simplex");
  if (!(a.lipschitz >= 0.0)) fail(ErrorKind::Validation, "usage", "--lipschitz must be nonnegative");
  const SignedWeighting targets = load_weighted_points(a.targets);
  const SignedWeighting train = load_weighted_points(a.train);
  if (targets.points.cols() != train.points.cols()) {
    fail(ErrorKind::Validation, "bias_bound", "point files differ in dimension");
  }
  const double sup = lipschitz_supremum(targets, train, backend);
  const auto [pos, neg] = split(targets, train);
  const double dual = pos.mass.size() == 0 || neg.mass.size() == 0 ? 0.0 : dual_check(pos, neg);
  std::printf("supremum %s\ndual_check %s\nbound %s\n", format_double(sup).c_str(), format_double(dual).c_str(),
              format_double(a.lipschitz * sup).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial GLM confidence intervals"};
  app.require_subcommand(1);

  FitArgs fa;
  auto* fit_cmd = app.add_subcommand("fit", "Fit one dataset and write the interval document");
  fit_cmd->add_option("--config", fa.config, "JSON fit config")->check(CLI::ExistingFile);
  fit_cmd->add_option("--train", fa.train, "Training CSV (s1..sd,x1..xP,y)");
  fit_cmd->add_option("--target", fa.target, "Target CSV (s1..sd,x1..xP)");
  fit_cmd->add_option("--family", fa.family, "bernoulli | poisson | gaussian");
  fit_cmd->add_option("--lipschitz", fa.lipschitz, "Lipschitz constant of the mean surface");
  fit_cmd->add_option("--alpha", fa.alpha, "Nominal miscoverage level");
  fit_cmd->add_option("--k", fa.k, "adaptive | fixed:<k>");
  fit_cmd->add_option("--seed", fa.seed, "Tie-breaking seed");
  fit_cmd->add_option("--method", fa.method, "proposed | classic | sandwich | kde_weighted");
  fit_cmd->add_option("--out", fa.out, "Output JSON path");
  fit_cmd->add_option("--ktrace", fa.ktrace, "Write the adaptive k trace (N,k,R) here");

  SimulateArgs sa;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a simulation study");
  sim_cmd->add_option("--config", sa.config, "JSON study config")->required();
  sim_cmd->add_option("--out-dir", sa.out_dir, "Directory for records.csv, summary.csv, ktrace.csv");
  sim_cmd->add_flag("--paper-scale", sa.paper_scale, "N=10000 and 250 replicates");
  sim_cmd->add_option("--jobs", sa.jobs, "Worker threads");

  BiasArgs ba;
  auto* bias_cmd = app.add_subcommand("bias-bound", "Lipschitz supremum between two weighted point sets");
  bias_cmd->add_option("--targets", ba.targets, "Target points CSV (s1..sd,w)")->required()->check(CLI::ExistingFile);
  bias_cmd->add_option("--train", ba.train, "Training points CSV (s1..sd,w)")->required()->check(CLI::ExistingFile);
  bias_cmd->add_option("--lipschitz", ba.lipschitz, "Multiplier for the reported bound");
  bias_cmd->add_option("--backend", ba.backend, "auto | simplex");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*fit_cmd) return cmd_fit(fa, *fit_cmd);
    if (*sim_cmd) return cmd_simulate(sa);
    if (*bias_cmd) return cmd_bias_bound(ba);
  } catch (const Error& e) {
    std::cerr << "spglm: stage " << e.stage() << " [" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return e.numerical() ? kExitNumerical : kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "spglm: stage io: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}
