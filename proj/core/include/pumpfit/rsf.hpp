#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "pumpfit/dataset.hpp"

namespace pumpfit {

/// Complete quadratic response surface
///   y = a0 + Σ a_i x_i + Σ a_ii x_i² + Σ_{i<j} a_ij x_i x_j
/// with coefficients ordered [1, x…, x²…, x1x2, x1x3, …, x(d−1)xd].
class RsfModel {
 public:
  RsfModel() = default;
  RsfModel(std::size_t dimension, Eigen::VectorXd coefficients);

  static std::size_t basis_size(std::size_t dimension) {
    return 1 + 2 * dimension + dimension * (dimension - 1) / 2;
  }
  static Eigen::VectorXd basis(std::span<const double> x);
  static std::vector<std::string> basis_labels(std::span<const std::string> names);

  /// Least-squares fit through a column-pivoted QR of the design matrix.
  /// Throws DataError when rows < basis size and NumericalError naming the
  /// dependent basis columns when the design matrix is rank deficient.
  static RsfModel fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

  std::size_t dimension() const { return dimension_; }
  const Eigen::VectorXd& coefficients() const { return coefficients_; }
  double predict(std::span<const double> x) const;

  nlohmann::json to_json() const;
  static RsfModel from_json(const nlohmann::json& j);

 private:
  std::size_t dimension_ = 0;
  Eigen::VectorXd coefficients_;
};

/// RSF on the raw input columns of `train` for one output attribute.
RsfModel fit_rsf(const Dataset& train, std::string_view objective);

}  // namespace pumpfit
