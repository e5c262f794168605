#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pumpfit/augmentation.hpp"
#include "pumpfit/config.hpp"
#include "pumpfit/dataset.hpp"
#include "pumpfit/error.hpp"
#include "pumpfit/metrics.hpp"
#include "pumpfit/predictor.hpp"

namespace pumpfit {

/// A failure inside a named pipeline stage; wraps the original error.
class StageError : public Error {
 public:
  enum class Cause { data, config, numerical };
  StageError(std::string stage, Cause cause, const std::string& what);
  const std::string& stage() const { return stage_; }
  Cause cause() const { return cause_; }

 private:
  std::string stage_;
  Cause cause_;
};

/// Runs `fn`, rethrowing any library error as a StageError named `stage`.
template <class F>
auto run_stage(std::string_view stage, F&& fn) -> decltype(fn());

// Individual stages. The pipeline is exactly their composition, so running
// them one at a time (as the CLI subcommands do) reproduces its artifacts.

/// LHS design points for stream "train" or "test".
Dataset sample_stage(const RunConfig& cfg, std::string_view stream);
/// Oracle outputs for `inputs` with the noise stream of `stream`.
Dataset evaluate_stage(const RunConfig& cfg, const Dataset& inputs, std::string_view stream);
SplitIndices nn_split_indices(const RunConfig& cfg, std::size_t rows);

struct TrainedModel {
  std::unique_ptr<Predictor> predictor;
  std::vector<TrainReport> reports;  // networks only
};

/// Fits `kind` on the full training set; the network uses its train split
/// and monitors the validation split.
TrainedModel train_stage(const RunConfig& cfg, ModelKind kind, const Dataset& train);
AugmentedDataset augment_stage(const RunConfig& cfg, const Dataset& train);
/// The network retrained on the augmented rows whose source row lies in the
/// network's train split; original validation rows are monitored.
TrainedModel train_nnda_stage(const RunConfig& cfg, const AugmentedDataset& augmented);

/// Provenance lines written into every CSV artifact.
CsvMetadata run_metadata(const RunConfig& cfg, std::string_view artifact);
nlohmann::json run_meta_json(const RunConfig& cfg);

struct PipelineResult {
  Dataset train, test;
  SplitIndices nn_split;
  std::vector<std::unique_ptr<Predictor>> models;  // config order
  std::vector<TrainReport> nn_reports;
  std::optional<AugmentedDataset> augmented;
  std::unique_ptr<Predictor> nnda;
  std::vector<TrainReport> nnda_reports;
  ValidationReport comparison;                   // every configured model
  std::optional<ValidationReport> augmentation;  // NN vs NNDA
  nlohmann::json manifest;

  const Predictor& model(std::string_view label) const;
};

/// The full study. Writes artifacts below `out` when given.
PipelineResult run_pipeline(const RunConfig& cfg, const std::optional<std::filesystem::path>& out = std::nullopt);

/// Report writers shared with the CLI.
void write_report(const ValidationReport& r, const std::filesystem::path& json_path,
                  const std::filesystem::path& csv_path);
void write_plots(const ValidationReport& r, const std::filesystem::path& dir, std::string_view prefix);
void write_training_report(const std::vector<TrainReport>& reports, const RunConfig& cfg,
                           const std::filesystem::path& json_path, const std::filesystem::path& csv_path);
void write_text(const std::filesystem::path& path, const std::string& text);

// ---------------------------------------------------------------------------

template <class F>
auto run_stage(std::string_view stage, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const ConfigError& e) {
    throw StageError(std::string(stage), StageError::Cause::config, e.what());
  } catch (const NumericalError& e) {
    throw StageError(std::string(stage), StageError::Cause::numerical, e.what());
  } catch (const std::exception& e) {
    throw StageError(std::string(stage), StageError::Cause::data, e.what());
  }
}

}  // namespace pumpfit
