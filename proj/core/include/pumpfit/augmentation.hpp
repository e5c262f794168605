#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "pumpfit/dataset.hpp"

namespace pumpfit {

/// How per-attribute perturbations combine into generated rows.
///   plus_minus:  r⁺ shifts every attribute by +bias, r⁻ by −bias.
///   independent: each attribute of r⁺ takes a seeded random sign s and the
///                matching attribute of r⁻ takes −s.
enum class Pairing { plus_minus, independent };

std::string_view to_string(Pairing p);
Pairing pairing_from_string(std::string_view s);

struct AugmentConfig {
  double interpolation_factor = 0.025;
  Pairing pairing = Pairing::plus_minus;
  std::uint64_t seed = 0;  // independent pairing only

  /// Requires 0 < IF < 0.5. The degenerate IF = 0 is only reachable through
  /// `augment_unchecked`.
  void validate() const;
};

/// IF × the smallest |values[index] − values[j]| over j ≠ index (0 for a duplicate).
double attribute_bias(std::span<const double> values, std::size_t index, double interpolation_factor);

struct RowProvenance {
  std::size_t source = 0;  // row in the original dataset
  int sign = 0;            // 0 original, +1 r⁺, −1 r⁻
};

struct AugmentedDataset {
  Dataset original;
  /// Originals, then every r⁺, then every r⁻ (3N rows).
  Dataset data;
  std::vector<RowProvenance> provenance;  // one per row of `data`
  /// Per-row, per-attribute bias of the original dataset.
  std::vector<std::vector<double>> bias;
};

/// Triples `d`: each row gains one copy shifted up and one shifted down by
/// the per-attribute nearest-gap bias, inputs and outputs alike.
AugmentedDataset augment(const Dataset& d, const AugmentConfig& cfg = {});
/// As `augment` but accepting any IF in [0, 0.5).
AugmentedDataset augment_unchecked(const Dataset& d, const AugmentConfig& cfg);

/// `##` metadata token and comment columns marking an augmented CSV.
inline constexpr std::string_view kAugmentedKey = "augmented";
inline constexpr std::string_view kSourceColumn = "#source";
inline constexpr std::string_view kSignColumn = "#sign";

/// True when the CSV carries an augmentation marker or provenance columns.
bool is_augmented(const CsvMetadata& meta);
/// Provenance as the two trailing comment columns (#source, #sign).
std::vector<CsvMetadata::CommentColumn> provenance_columns(const AugmentedDataset& a);

}  // namespace pumpfit
