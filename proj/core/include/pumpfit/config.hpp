#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pumpfit/augmentation.hpp"
#include "pumpfit/dataset.hpp"
#include "pumpfit/design_space.hpp"
#include "pumpfit/oracle.hpp"
#include "pumpfit/predictor.hpp"

namespace pumpfit {

/// Everything a study depends on. All randomness derives from `seed`.
struct RunConfig {
  DutyPoint duty = DutyPoint::reference();
  std::vector<std::string> variables{"D2", "b2", "beta2"};
  std::size_t train_samples = 60;
  std::size_t test_samples = 10;
  std::uint64_t seed = 0;
  SplitSpec split;  // split.seed is overwritten from `seed`
  double noise_sigma = 0.005;
  double nonquadratic_scale = 1.0;
  std::vector<ModelKind> models{ModelKind::rsf, ModelKind::rbf, ModelKind::krg, ModelKind::nn};
  SurrogateOptions surrogate;
  NeuralOptions neural;
  bool augmentation = true;
  AugmentConfig augment;
  /// Not part of the digest: moving a run does not change its identity.
  std::filesystem::path output_dir = "runs/default";

  /// Throws ConfigError on the first violated constraint.
  void validate() const;
  /// Canonical, fully resolved form (keys sorted, defaults filled in).
  nlohmann::json to_json() const;
  /// SHA-256 of the canonical JSON without the output directory.
  std::string digest() const;

  DesignSpace design_space() const { return design_bounds(duty); }
  OracleOptions oracle_options(std::string_view stream) const;
  /// Per-stream seeds: "lhs/train", "lhs/test", "oracle/train", "rbf", ...
  std::uint64_t stream_seed(std::string_view stream) const;
};

/// Parses a YAML document; unknown keys are rejected.
RunConfig parse_config(std::string_view yaml_text);
RunConfig load_config(const std::filesystem::path& path);

/// Environment variable that, when set, replaces the root of relative output directories.
inline constexpr const char* kOutputRootEnv = "PUMPFIT_OUTPUT_ROOT";
std::filesystem::path resolve_output_dir(const std::filesystem::path& dir);

}  // namespace pumpfit
