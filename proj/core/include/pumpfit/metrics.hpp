#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pumpfit/dataset.hpp"
#include "pumpfit/predictor.hpp"

namespace pumpfit {

/// √(Σ(yᵢ − ŷᵢ)²) / (m·ȳ), the mean-normalized error with m outside the root.
double rmse_paper(std::span<const double> reference, std::span<const double> predicted);
/// √(Σ(yᵢ − ŷᵢ)²/m) / ȳ.
double rmse_conventional(std::span<const double> reference, std::span<const double> predicted);
/// 1 − Σ(yᵢ − ŷᵢ)² / Σ(yᵢ − ȳ)².
double r_squared(std::span<const double> reference, std::span<const double> predicted);
/// Mean of |ŷᵢ − yᵢ|.
double mean_error(std::span<const double> reference, std::span<const double> predicted);

struct MetricRow {
  std::string model;
  std::string objective;
  double rmse_paper = 0.0;         // ratio; ×100 for percent
  double rmse_conventional = 0.0;  // ratio
  double r_squared = 0.0;          // ratio
  double mean_error = 0.0;         // objective units
  std::vector<double> reference;
  std::vector<double> predicted;
  std::vector<double> delta;       // predicted − reference
};

struct ValidationReport {
  std::vector<MetricRow> rows;  // model-major, objectives in test order
  nlohmann::json metadata = nlohmann::json::object();

  const MetricRow& at(std::string_view model, std::string_view objective) const;
  std::vector<std::string> models() const;
  std::vector<std::string> objectives() const;

  nlohmann::json to_json() const;
  /// One row per model × objective.
  std::string to_csv() const;
  /// Per-sample series for one objective: index, reference, then one
  /// prediction and one delta column per model.
  std::string plot_csv(std::string_view objective) const;
};

/// Scores every model on every output of `test`. Models must accept the
/// test input columns and produce every test output by name.
ValidationReport compare(std::span<const Predictor* const> models, const Dataset& test);

}  // namespace pumpfit
