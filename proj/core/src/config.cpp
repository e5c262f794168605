#include "pumpfit/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "pumpfit/digest.hpp"
#include "pumpfit/error.hpp"
#include "pumpfit/rng.hpp"

namespace pumpfit {
namespace {

void check_keys(const YAML::Node& node, std::string_view where, const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError(std::string(where) + " must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + std::string(where));
  }
}

template <class T>
void read(const YAML::Node& node, const char* key, T& out, std::string_view where) {
  if (!node[key]) return;
  try {
    out = node[key].as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("bad value for '" + std::string(key) + "' in " + std::string(where));
  }
}

void read_count(const YAML::Node& node, const char* key, std::size_t& out, std::string_view where) {
  if (!node[key]) return;
  long long v = 0;
  read(node, key, v, where);
  if (v < 0) throw ConfigError("'" + std::string(key) + "' in " + std::string(where) + " must be nonnegative");
  out = static_cast<std::size_t>(v);
}

}  // namespace

void RunConfig::validate() const {
  try {
    duty.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const auto space = design_space();
  if (variables.empty()) throw ConfigError("variables must name at least one design variable");
  std::set<std::string> seen;
  for (const auto& v : variables) {
    if (!space.contains(v)) throw ConfigError("unknown design variable '" + v + "'");
    if (!seen.insert(v).second) throw ConfigError("design variable '" + v + "' listed twice");
  }
  if (train_samples < 3) throw ConfigError("samples.train must be >= 3");
  if (test_samples < 2) throw ConfigError("samples.test must be >= 2");
  try {
    split.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (!(noise_sigma >= 0.0 && noise_sigma < 1.0)) throw ConfigError("oracle.noise_sigma must lie in [0, 1)");
  if (!std::isfinite(nonquadratic_scale)) throw ConfigError("oracle.nonquadratic_scale must be finite");
  if (models.empty()) throw ConfigError("models must list at least one model");
  for (std::size_t i = 0; i < models.size(); ++i)
    for (std::size_t j = i + 1; j < models.size(); ++j)
      if (models[i] == models[j]) throw ConfigError("model '" + std::string(to_string(models[i])) + "' listed twice");
  const auto& rbf = surrogate.rbf;
  if (rbf.n_centers < 1 || rbf.n_centers > train_samples) throw ConfigError("rbf.n_centers must lie in [1, samples.train]");
  if (rbf.width_rule == WidthRule::fixed && !(rbf.fixed_width > 0.0)) throw ConfigError("rbf.fixed_width must be > 0");
  const auto& krg = surrogate.krg;
  if (!(krg.theta_min > 0.0) || !(krg.theta_max >= krg.theta_min) || !std::isfinite(krg.theta_max)) {
    throw ConfigError("kriging theta bounds need 0 < theta_min <= theta_max");
  }
  if (!(krg.nugget >= 0.0)) throw ConfigError("kriging.nugget must be >= 0");
  if (krg.starts < 1) throw ConfigError("kriging.starts must be >= 1");
  if (neural.hidden < 1) throw ConfigError("nn.hidden must be >= 1");
  neural.train.validate();
  if (augmentation) augment.validate();
  const bool has_nn = std::find(models.begin(), models.end(), ModelKind::nn) != models.end();
  if (augmentation && !has_nn) throw ConfigError("augmentation retrains the network; add nn to models");
}

nlohmann::json RunConfig::to_json() const {
  std::vector<std::string> model_names;
  for (auto m : models) model_names.emplace_back(to_string(m));
  const auto& t = neural.train;
  return {
      {"duty_point",
       {{"flow_m3s", duty.flow_m3s}, {"head_m", duty.head_m}, {"speed_rpm", duty.speed_rpm}, {"power_kw", duty.power_kw}}},
      {"variables", variables},
      {"samples", {{"train", train_samples}, {"test", test_samples}}},
      {"seed", seed},
      {"split", {{"train", split.train_fraction}, {"val", split.val_fraction}, {"test", split.test_fraction}}},
      {"oracle", {{"noise_sigma", noise_sigma}, {"nonquadratic_scale", nonquadratic_scale}}},
      {"models", model_names},
      {"rbf",
       {{"n_centers", surrogate.rbf.n_centers},
        {"width", std::string(to_string(surrogate.rbf.width_rule))},
        {"fixed_width", surrogate.rbf.fixed_width}}},
      {"kriging",
       {{"theta_min", surrogate.krg.theta_min},
        {"theta_max", surrogate.krg.theta_max},
        {"nugget", surrogate.krg.nugget},
        {"starts", surrogate.krg.starts}}},
      {"nn",
       {{"hidden", neural.hidden},
        {"activation", std::string(to_string(neural.activation))},
        {"joint", neural.joint},
        {"max_epochs", t.max_epochs},
        {"mu_init", t.mu_init},
        {"mu_increase", t.mu_increase},
        {"mu_decrease", t.mu_decrease},
        {"mu_max", t.mu_max},
        {"min_gradient", t.min_gradient},
        {"performance_goal", t.performance_goal}}},
      {"augmentation",
       {{"enabled", augmentation},
        {"interpolation_factor", augment.interpolation_factor},
        {"pairing", std::string(to_string(augment.pairing))}}},
      {"output", {{"directory", output_dir.generic_string()}}}};
}

std::string RunConfig::digest() const {
  auto j = to_json();
  j.erase("output");
  return sha256_hex(j.dump());
}

std::uint64_t RunConfig::stream_seed(std::string_view stream) const { return derive_seed(seed, stream); }

OracleOptions RunConfig::oracle_options(std::string_view stream) const {
  return {noise_sigma, stream_seed(stream), nonquadratic_scale};
}

RunConfig parse_config(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  RunConfig c;
  if (!root || root.IsNull()) return c;
  check_keys(root, "config",
             {"duty_point", "variables", "samples", "seed", "split", "oracle", "models", "rbf", "kriging", "nn",
              "augmentation", "output"});

  if (auto n = root["duty_point"]) {
    check_keys(n, "duty_point", {"flow_m3h", "flow_m3s", "head_m", "speed_rpm", "power_kw"});
    if (n["flow_m3h"] && n["flow_m3s"]) throw ConfigError("give duty_point flow in m3h or m3s, not both");
    double q = 0.0;
    if (n["flow_m3h"]) {
      read(n, "flow_m3h", q, "duty_point");
      c.duty.flow_m3s = m3h_to_m3s(q);
    }
    read(n, "flow_m3s", c.duty.flow_m3s, "duty_point");
    read(n, "head_m", c.duty.head_m, "duty_point");
    read(n, "speed_rpm", c.duty.speed_rpm, "duty_point");
    read(n, "power_kw", c.duty.power_kw, "duty_point");
  }
  read(root, "variables", c.variables, "config");
  if (auto n = root["samples"]) {
    check_keys(n, "samples", {"train", "test"});
    read_count(n, "train", c.train_samples, "samples");
    read_count(n, "test", c.test_samples, "samples");
  }
  if (root["seed"]) {
    long long s = 0;
    read(root, "seed", s, "config");
    if (s < 0) throw ConfigError("seed must be nonnegative");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (auto n = root["split"]) {
    check_keys(n, "split", {"train", "val", "test"});
    read(n, "train", c.split.train_fraction, "split");
    read(n, "val", c.split.val_fraction, "split");
    read(n, "test", c.split.test_fraction, "split");
  }
  if (auto n = root["oracle"]) {
    check_keys(n, "oracle", {"noise_sigma", "nonquadratic_scale"});
    read(n, "noise_sigma", c.noise_sigma, "oracle");
    read(n, "nonquadratic_scale", c.nonquadratic_scale, "oracle");
  }
  if (root["models"]) {
    std::vector<std::string> names;
    read(root, "models", names, "config");
    c.models.clear();
    for (const auto& m : names) c.models.push_back(model_kind_from_string(m));
  }
  if (auto n = root["rbf"]) {
    check_keys(n, "rbf", {"n_centers", "width", "fixed_width"});
    read_count(n, "n_centers", c.surrogate.rbf.n_centers, "rbf");
    std::string w;
    read(n, "width", w, "rbf");
    if (!w.empty()) c.surrogate.rbf.width_rule = width_rule_from_string(w);
    read(n, "fixed_width", c.surrogate.rbf.fixed_width, "rbf");
  }
  if (auto n = root["kriging"]) {
    check_keys(n, "kriging", {"theta_min", "theta_max", "nugget", "starts"});
    read(n, "theta_min", c.surrogate.krg.theta_min, "kriging");
    read(n, "theta_max", c.surrogate.krg.theta_max, "kriging");
    read(n, "nugget", c.surrogate.krg.nugget, "kriging");
    read_count(n, "starts", c.surrogate.krg.starts, "kriging");
  }
  if (auto n = root["nn"]) {
    check_keys(n, "nn", {"hidden", "activation", "joint", "max_epochs", "mu_init", "mu_increase", "mu_decrease",
                         "mu_max", "min_gradient", "performance_goal"});
    read_count(n, "hidden", c.neural.hidden, "nn");
    std::string a;
    read(n, "activation", a, "nn");
    if (!a.empty()) c.neural.activation = activation_from_string(a);
    read(n, "joint", c.neural.joint, "nn");
    auto& t = c.neural.train;
    read_count(n, "max_epochs", t.max_epochs, "nn");
    read(n, "mu_init", t.mu_init, "nn");
    read(n, "mu_increase", t.mu_increase, "nn");
    read(n, "mu_decrease", t.mu_decrease, "nn");
    read(n, "mu_max", t.mu_max, "nn");
    read(n, "min_gradient", t.min_gradient, "nn");
    read(n, "performance_goal", t.performance_goal, "nn");
  }
  if (auto n = root["augmentation"]) {
    check_keys(n, "augmentation", {"enabled", "interpolation_factor", "pairing"});
    read(n, "enabled", c.augmentation, "augmentation");
    read(n, "interpolation_factor", c.augment.interpolation_factor, "augmentation");
    std::string p;
    read(n, "pairing", p, "augmentation");
    if (!p.empty()) c.augment.pairing = pairing_from_string(p);
  }
  if (auto n = root["output"]) {
    check_keys(n, "output", {"directory"});
    std::string d;
    read(n, "directory", d, "output");
    if (!d.empty()) c.output_dir = d;
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::filesystem::path resolve_output_dir(const std::filesystem::path& dir) {
  const char* root = std::getenv(kOutputRootEnv);
  if (root && *root && dir.is_relative()) return std::filesystem::path(root) / dir;
  return dir;
}

}  // namespace pumpfit
