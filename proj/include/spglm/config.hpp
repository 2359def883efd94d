#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "spglm/inference.hpp"
#include "spglm/simulation.hpp"

namespace spglm {

// Study config. Relative paths are resolved against the config's directory.
struct StudyConfig {
  SimConfig sim;
  std::optional<std::filesystem::path> out_dir;
};

// Fit config; every field may also come from the command line.
struct FitConfig {
  std::optional<std::filesystem::path> train;
  std::optional<std::filesystem::path> target;
  std::optional<std::string> family;
  std::optional<double> lipschitz;
  std::optional<double> alpha;
  std::optional<std::string> k_policy;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> ktrace;
};

// Unknown keys and wrongly typed values are validation errors (stage "config").
StudyConfig parse_study_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
StudyConfig load_study_config(const std::filesystem::path& path);
FitConfig parse_fit_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
FitConfig load_fit_config(const std::filesystem::path& path);

Design design_from_token(std::string_view token);
std::string_view to_token(Design design);

}  // namespace spglm
