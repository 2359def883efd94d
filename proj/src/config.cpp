#include "spglm/config.hpp"

#include <fstream>
#include <set>

#include "spglm/error.hpp"

namespace spglm {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& msg) { fail(ErrorKind::Validation, "config", msg); }

void reject_unknown(const json& doc, const std::set<std::string>& allowed) {
  if (!doc.is_object()) config_error("top level must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.contains(key)) config_error("unknown key '" + key + "'");
  }
}

template <class T>
std::optional<T> get(const json& doc, const std::string& key) {
  const auto it = doc.find(key);
  if (it == doc.end()) return std::nullopt;
  try {
    if constexpr (std::is_same_v<T, std::uint64_t> || std::is_same_v<T, std::size_t>) {
      if (!it->is_number_unsigned()) throw std::invalid_argument("not a nonnegative integer");
    } else if constexpr (std::is_same_v<T, double>) {
      if (!it->is_number()) throw std::invalid_argument("not a number");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw std::invalid_argument("not a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) throw std::invalid_argument("not a string");
    }
    return it->get<T>();
  } catch (const std::exception&) {
    config_error("key '" + key + "' has the wrong type");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    config_error("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace

Design design_from_token(std::string_view token) {
  if (token == "infill") return Design::Infill;
  if (token == "extrapolation") return Design::Extrapolation;
  if (token == "counterexample") return Design::Counterexample;
  config_error("design must be infill, extrapolation or counterexample");
}

std::string_view to_token(Design design) {
  switch (design) {
    case Design::Infill: return "infill";
    case Design::Extrapolation: return "extrapolation";
    case Design::Counterexample: return "counterexample";
  }
  return "infill";
}

StudyConfig parse_study_config(const json& doc, const std::filesystem::path& base_dir) {
  reject_unknown(doc, {"design", "scale", "shift", "n_train", "n_target", "n_replicates", "seed_base", "methods",
                       "alpha", "lipschitz", "k_policy", "custom", "coefficient", "out_dir"});
  StudyConfig out;
  SimConfig& c = out.sim;
  const auto design = get<std::string>(doc, "design");
  if (!design) config_error("missing required key 'design'");
  c.design = design_from_token(*design);

  const auto scale = get<double>(doc, "scale");
  const auto shift = get<double>(doc, "shift");
  switch (c.design) {
    case Design::Infill:
      if (shift) config_error("'shift' applies to the extrapolation design only");
      if (!scale) config_error("infill design requires 'scale'");
      c.parameter = *scale;
      break;
    case Design::Extrapolation:
      if (scale) config_error("'scale' applies to the infill design only");
      if (!shift) config_error("extrapolation design requires 'shift'");
      c.parameter = *shift;
      break;
    case Design::Counterexample:
      if (scale || shift) config_error("counterexample design takes neither 'scale' nor 'shift'");
      c.parameter = 0.0;
      c.n_target = 2;
      break;
  }
  if (auto v = get<std::size_t>(doc, "n_train")) c.n_train = *v;
  if (auto v = get<std::size_t>(doc, "n_target")) {
    if (c.design == Design::Counterexample && *v != 2) config_error("counterexample design has exactly 2 targets");
    c.n_target = *v;
  }
  if (auto v = get<std::size_t>(doc, "n_replicates")) c.n_replicates = *v;
  if (auto v = get<std::uint64_t>(doc, "seed_base")) c.seed_base = *v;
  if (auto v = get<double>(doc, "alpha")) c.alpha = *v;
  if (auto v = get<double>(doc, "lipschitz")) c.lipschitz = *v;
  if (auto v = get<std::string>(doc, "k_policy")) c.k_policy = KPolicy::parse(*v);
  if (auto v = get<bool>(doc, "custom")) c.custom = *v;
  if (auto v = get<std::size_t>(doc, "coefficient")) c.coefficient = *v;
  if (doc.contains("methods")) {
    const json& m = doc["methods"];
    if (!m.is_array()) config_error("'methods' must be an array of strings");
    c.methods.clear();
    for (const auto& item : m) {
      if (!item.is_string()) config_error("'methods' must be an array of strings");
      c.methods.push_back(item.get<std::string>());
    }
  }
  if (auto v = get<std::string>(doc, "out_dir")) out.out_dir = resolve(base_dir, *v);
  validate(c);
  return out;
}

StudyConfig load_study_config(const std::filesystem::path& path) {
  return parse_study_config(read_json(path), path.parent_path());
}

FitConfig parse_fit_config(const json& doc, const std::filesystem::path& base_dir) {
  reject_unknown(doc, {"train", "target", "family", "lipschitz", "alpha", "k_policy", "seed", "method", "out", "ktrace"});
  FitConfig c;
  if (auto v = get<std::string>(doc, "train")) c.train = resolve(base_dir, *v);
  if (auto v = get<std::string>(doc, "target")) c.target = resolve(base_dir, *v);
  if (auto v = get<std::string>(doc, "out")) c.out = resolve(base_dir, *v);
  if (auto v = get<std::string>(doc, "ktrace")) c.ktrace = resolve(base_dir, *v);
  c.family = get<std::string>(doc, "family");
  c.lipschitz = get<double>(doc, "lipschitz");
  c.alpha = get<double>(doc, "alpha");
  c.k_policy = get<std::string>(doc, "k_policy");
  c.seed = get<std::uint64_t>(doc, "seed");
  c.method = get<std::string>(doc, "method");
  return c;
}

FitConfig load_fit_config(const std::filesystem::path& path) {
  return parse_fit_config(read_json(path), path.parent_path());
}

}  // namespace spglm
