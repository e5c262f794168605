#include "pumpfit/augmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "pumpfit/error.hpp"
#include "pumpfit/rng.hpp"

namespace pumpfit {
namespace {

// Nearest gap of every entry of `v`, from neighbours in sorted order.
std::vector<double> nearest_gaps(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> gap(v.size(), std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    const double g = std::abs(v[order[k + 1]] - v[order[k]]);
    gap[order[k]] = std::min(gap[order[k]], g);
    gap[order[k + 1]] = std::min(gap[order[k + 1]], g);
  }
  return gap;
}

}  // namespace

std::string_view to_string(Pairing p) { return p == Pairing::plus_minus ? "plus_minus" : "independent"; }

Pairing pairing_from_string(std::string_view s) {
  if (s == "plus_minus") return Pairing::plus_minus;
  if (s == "independent") return Pairing::independent;
  throw ConfigError("unknown pairing '" + std::string(s) + "' (expected plus_minus or independent)");
}

void AugmentConfig::validate() const {
  if (!(interpolation_factor > 0.0 && interpolation_factor < 0.5)) {
    throw ConfigError("interpolation factor must satisfy 0 < IF < 0.5");
  }
}

double attribute_bias(std::span<const double> values, std::size_t index, double interpolation_factor) {
  if (values.size() < 2) throw DataError("attribute bias needs at least 2 values");
  if (index >= values.size()) throw DataError("attribute bias index out of range");
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (j != index) gap = std::min(gap, std::abs(values[index] - values[j]));
  }
  return interpolation_factor * gap;
}

AugmentedDataset augment(const Dataset& d, const AugmentConfig& cfg) {
  cfg.validate();
  return augment_unchecked(d, cfg);
}

AugmentedDataset augment_unchecked(const Dataset& d, const AugmentConfig& cfg) {
  if (!(cfg.interpolation_factor >= 0.0 && cfg.interpolation_factor < 0.5)) {
    throw ConfigError("interpolation factor must lie in [0, 0.5)");
  }
  const std::size_t n = d.n_rows(), m = d.n_attributes();
  if (n < 2) throw DataError("augmentation needs at least 2 rows");

  AugmentedDataset out;
  out.original = d;
  out.bias.assign(n, std::vector<double>(m, 0.0));
  for (std::size_t k = 0; k < m; ++k) {
    const auto col = d.column(k);
    const auto gap = nearest_gaps(col);
    for (std::size_t i = 0; i < n; ++i) out.bias[i][k] = cfg.interpolation_factor * gap[i];
  }

  std::vector<std::vector<int>> sign(n, std::vector<int>(m, 1));
  if (cfg.pairing == Pairing::independent) {
    Rng rng(derive_seed(cfg.seed, "augment-signs"));
    std::bernoulli_distribution coin(0.5);
    for (auto& row : sign)
      for (int& s : row) s = coin(rng) ? 1 : -1;
  }

  std::vector<double> values = d.values();
  values.reserve(3 * n * m);
  for (int dir : {+1, -1}) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < m; ++k) values.push_back(d.at(i, k) + dir * sign[i][k] * out.bias[i][k]);
    }
  }
  if (!std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); })) {
    throw NumericalError("augmentation produced non-finite values");
  }
  out.data = Dataset(d.attributes(), std::move(values));

  out.provenance.reserve(3 * n);
  for (std::size_t i = 0; i < n; ++i) out.provenance.push_back({i, 0});
  for (std::size_t i = 0; i < n; ++i) out.provenance.push_back({i, +1});
  for (std::size_t i = 0; i < n; ++i) out.provenance.push_back({i, -1});
  return out;
}

bool is_augmented(const CsvMetadata& meta) {
  if (meta.value(kAugmentedKey)) return true;
  return std::any_of(meta.comment_columns.begin(), meta.comment_columns.end(),
                     [](const auto& c) { return c.name == kSourceColumn || c.name == kSignColumn; });
}

std::vector<CsvMetadata::CommentColumn> provenance_columns(const AugmentedDataset& a) {
  CsvMetadata::CommentColumn source{std::string(kSourceColumn), {}}, sign{std::string(kSignColumn), {}};
  for (const auto& p : a.provenance) {
    source.cells.push_back(std::to_string(p.source));
    sign.cells.push_back(p.sign > 0 ? "+" : p.sign < 0 ? "-" : "0");
  }
  return {std::move(source), std::move(sign)};
}

}  // namespace pumpfit
