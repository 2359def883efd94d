#pragma once

#include "json.hpp"

#include "spglm/baselines.hpp"
#include "spglm/inference.hpp"

namespace spglm {

// {"method", "alpha", "z", "k_used", "L", "seed", "solver": {...},
//  "coefficients": [{"beta_hat", "sigma_hat", "bias_bound", "lower", "upper"}, ...]}
nlohmann::json to_json(const InferenceResult& result);

// Same layout; "se" replaces sigma_hat/bias_bound, plus bandwidths for kde_weighted.
nlohmann::json to_json(const BaselineResult& result);

}  // namespace spglm
