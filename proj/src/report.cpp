#include "spglm/report.hpp"

#include <cmath>

namespace spglm {

namespace {

nlohmann::json solver_json(const SolveReport& s) {
  return {{"iterations", s.iterations}, {"final_gradient_norm", s.final_gradient_norm}, {"converged", s.converged}};
}

}  // namespace

nlohmann::json to_json(const InferenceResult& r) {
  nlohmann::json doc;
  doc["method"] = "proposed";
  doc["alpha"] = r.alpha;
  doc["z"] = r.z;
  doc["k_used"] = r.k_used;
  doc["L"] = r.lipschitz;
  doc["seed"] = r.seed;
  doc["solver"] = solver_json(r.solve);
  if (r.trace) {
    doc["k_trace"] = {{"rule", r.trace->rule}, {"n_total", r.trace->rows.size()},
                      {"final_radius", r.trace->rows.back().radius}};
  }
  auto coefs = nlohmann::json::array();
  for (Eigen::Index p = 0; p < r.beta_hat.size(); ++p) {
    const auto i = static_cast<std::size_t>(p);
    coefs.push_back({{"beta_hat", r.beta_hat(p)},
                     {"sigma_hat", r.sigma_hat(p)},
                     {"bias_bound", r.bias_bound(p)},
                     {"lower", r.intervals[i].lower},
                     {"upper", r.intervals[i].upper}});
  }
  doc["coefficients"] = std::move(coefs);
  return doc;
}

nlohmann::json to_json(const BaselineResult& r) {
  nlohmann::json doc;
  doc["method"] = std::string(to_token(r.method));
  doc["alpha"] = r.alpha;
  doc["z"] = r.z;
  doc["solver"] = solver_json(r.solve);
  if (r.bandwidth_train) doc["bandwidth_train"] = *r.bandwidth_train;
  if (r.bandwidth_target) doc["bandwidth_target"] = *r.bandwidth_target;
  auto coefs = nlohmann::json::array();
  for (Eigen::Index p = 0; p < r.beta_hat.size(); ++p) {
    const auto i = static_cast<std::size_t>(p);
    coefs.push_back({{"beta_hat", r.beta_hat(p)},
                     {"se", r.se(p)},
                     {"lower", r.intervals[i].lower},
                     {"upper", r.intervals[i].upper}});
  }
  doc["coefficients"] = std::move(coefs);
  return doc;
}

}  // namespace spglm
