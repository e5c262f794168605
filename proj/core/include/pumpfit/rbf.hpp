#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "pumpfit/dataset.hpp"

namespace pumpfit {

enum class WidthRule { median_pairwise, mean_nearest_neighbor, fixed };

std::string_view to_string(WidthRule rule);
WidthRule width_rule_from_string(std::string_view s);

struct RbfOptions {
  std::size_t n_centers = 30;
  WidthRule width_rule = WidthRule::median_pairwise;
  double fixed_width = 1.0;
  std::uint64_t seed = 0;
};

/// Gaussian radial-basis expansion f(x) = Σ w_i exp(−‖x − c_i‖² / (2σ²)).
class RbfModel {
 public:
  RbfModel() = default;
  RbfModel(Eigen::MatrixXd centers, Eigen::VectorXd weights, double sigma);

  /// Centers are all samples when n_centers equals the row count, otherwise
  /// seeded k-means (k-means++ start) means over canonically ordered rows.
  /// Weights are the least-squares solution of y = D·w by column-pivoted QR;
  /// a 1e-10 ridge is appended only when D is numerically rank deficient.
  static RbfModel fit(Eigen::MatrixXd x, Eigen::VectorXd y, const RbfOptions& options = {});

  std::size_t n_centers() const { return static_cast<std::size_t>(centers_.rows()); }
  std::size_t dimension() const { return static_cast<std::size_t>(centers_.cols()); }
  const Eigen::MatrixXd& centers() const { return centers_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  double sigma() const { return sigma_; }
  bool ridged() const { return ridged_; }

  double predict(std::span<const double> x) const;

  nlohmann::json to_json() const;
  static RbfModel from_json(const nlohmann::json& j);

 private:
  Eigen::MatrixXd centers_;
  Eigen::VectorXd weights_;
  double sigma_ = 1.0;
  bool ridged_ = false;
};

/// Gaussian width for a center set under `rule` (1 for a lone center).
double rbf_width(const Eigen::MatrixXd& centers, WidthRule rule, double fixed_width = 1.0);

/// Seeded k-means with k-means++ seeding; rows of the result are cluster means.
Eigen::MatrixXd kmeans_centers(const Eigen::MatrixXd& x, std::size_t k, std::uint64_t seed);

RbfModel fit_rbf(const Dataset& train, std::string_view objective, const RbfOptions& options = {});

}  // namespace pumpfit
