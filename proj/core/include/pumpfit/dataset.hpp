#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace pumpfit {

enum class Role { input, output };

std::string_view to_string(Role role);

struct AttributeSpec {
  std::string name;
  Role role = Role::input;
  std::string unit;

  bool operator==(const AttributeSpec&) const = default;
};

/// Ordered samples of named attributes, stored row-major. Immutable once built.
///
/// Every row carries one finite value per attribute, attribute names are unique
/// and at least one input attribute is present. Output attributes are optional
/// so that freshly sampled design points (inputs only) are representable;
/// operations that need targets check for them.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<AttributeSpec> attributes, std::vector<double> values);
  Dataset(std::vector<AttributeSpec> attributes,
          const std::vector<std::vector<double>>& rows);

  const std::vector<AttributeSpec>& attributes() const { return attributes_; }
  std::size_t n_attributes() const { return attributes_.size(); }
  std::size_t n_rows() const {
    return attributes_.empty() ? 0 : values_.size() / attributes_.size();
  }
  bool empty() const { return n_rows() == 0; }

  std::span<const double> row(std::size_t i) const;
  double at(std::size_t row, std::size_t attribute) const {
    return values_[row * attributes_.size() + attribute];
  }
  const std::vector<double>& values() const { return values_; }

  /// Index of attribute `name`; throws DataError when absent.
  std::size_t index_of(std::string_view name) const;
  bool has(std::string_view name) const;

  std::vector<std::size_t> indices(Role role) const;
  std::vector<std::string> names(Role role) const;
  std::size_t count(Role role) const { return indices(role).size(); }

  std::vector<double> column(std::size_t attribute) const;
  /// Rows × attributes matrix of the attributes with the given role.
  Eigen::MatrixXd matrix(Role role) const;
  Eigen::MatrixXd matrix(const std::vector<std::size_t>& attribute_indices) const;

  Dataset select_rows(std::span<const std::size_t> rows) const;
  /// Rows of `this` followed by rows of `other`; schemas must match.
  Dataset concat(const Dataset& other) const;

  bool operator==(const Dataset&) const = default;

 private:
  void validate() const;

  std::vector<AttributeSpec> attributes_;
  std::vector<double> values_;
};

/// Hex SHA-256 of the dataset's canonical CSV text.
std::string digest(const Dataset& d);

// ---------------------------------------------------------------------------
// CSV I/O

struct CsvOptions {
  bool require_outputs = true;
};

/// Metadata comment lines (`## key=value ...`) preceding the header row and
/// extra comment columns (names starting with '#') that loaders skip.
struct CsvMetadata {
  struct CommentColumn {
    std::string name;  // including the leading '#'
    std::vector<std::string> cells;
  };
  std::vector<std::string> lines;
  std::vector<CommentColumn> comment_columns;

  /// Value of the first `key=value` token among the lines.
  std::optional<std::string> value(std::string_view key) const;
};

struct CsvDocument {
  Dataset data;
  CsvMetadata meta;  // comment columns are returned with their cells
};

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
Dataset parse_csv(std::string_view text, const CsvOptions& options = {});
CsvDocument parse_csv_document(std::string_view text, const CsvOptions& options = {});
CsvDocument load_csv_document(const std::filesystem::path& path, const CsvOptions& options = {});

std::string to_csv(const Dataset& d, const CsvMetadata& meta = {});
void save_csv(const Dataset& d, const std::filesystem::path& path,
              const CsvMetadata& meta = {});

/// Shortest text that parses back to exactly `v` ("%.17g" fallback).
std::string format_double(double v);

// ---------------------------------------------------------------------------
// Splitting

struct SplitSpec {
  double train_fraction = 0.8;
  double val_fraction = 0.1;
  double test_fraction = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SplitIndices {
  std::vector<std::size_t> train, val, test;
};

struct Split {
  Dataset train, val, test;
  SplitIndices indices;
};

/// Seeded shuffle, then val/test sizes round(f·N); the remainder goes to
/// train. Each part keeps the original row order.
SplitIndices split_indices(std::size_t n_rows, const SplitSpec& spec);
Split split(const Dataset& d, const SplitSpec& spec);

// ---------------------------------------------------------------------------
// Min-max normalization onto [-1, 1]

class Normalizer {
 public:
  Normalizer() = default;
  Normalizer(std::vector<double> min, std::vector<double> max);

  /// Column-wise min/max of `m` (rows are samples).
  static Normalizer fit(const Eigen::MatrixXd& m);

  std::size_t size() const { return min_.size(); }
  const std::vector<double>& min() const { return min_; }
  const std::vector<double>& max() const { return max_; }

  double apply(double v, std::size_t k) const;
  double invert(double v, std::size_t k) const;
  std::vector<double> apply(std::span<const double> v) const;
  std::vector<double> invert(std::span<const double> v) const;
  Eigen::MatrixXd apply(const Eigen::MatrixXd& m) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& m) const;

  bool operator==(const Normalizer&) const = default;

 private:
  std::vector<double> min_, max_;
};

/// Per-attribute normalizer over every column of `d`.
Normalizer fit_normalizer(const Dataset& d);
/// Normalizer restricted to the attributes of one role, in attribute order.
Normalizer fit_normalizer(const Dataset& d, Role role);

Dataset apply(const Normalizer& n, const Dataset& d);
Dataset invert(const Normalizer& n, const Dataset& d);

}  // namespace pumpfit
