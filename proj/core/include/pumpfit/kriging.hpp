#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "pumpfit/dataset.hpp"

namespace pumpfit {

struct KrigingOptions {
  double theta_min = 1e-2;
  double theta_max = 1e2;
  double nugget = 1e-8;
  std::size_t starts = 8;
  std::uint64_t seed = 0;
};

/// Ordinary Kriging with the Gaussian correlation
///   R(x_i, x_j) = Π_d exp(−θ_d |x_i^d − x_j^d|²)
/// and constant trend. Prediction is ŷ(x) = β̂ + r(x)ᵀ R⁻¹ (Y − β̂·1).
class KrigingModel {
 public:
  KrigingModel() = default;

  /// θ by maximum concentrated likelihood: compass search in log10 θ from
  /// `starts` seeded starting points. The nugget is raised tenfold (up to
  /// 1e-6) only when no θ yields a positive-definite correlation matrix.
  static KrigingModel fit(Eigen::MatrixXd x, Eigen::VectorXd y, const KrigingOptions& options = {});

  /// Model for a given θ (no search).
  static KrigingModel with_theta(Eigen::MatrixXd x, Eigen::VectorXd y, std::vector<double> theta,
                                 double nugget);

  /// Concentrated log-likelihood −(N/2)·ln σ̂² − ½·ln|R|; nullopt when R is not
  /// positive definite at this nugget.
  static std::optional<double> log_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                              std::span<const double> theta, double nugget);

  double predict(std::span<const double> x) const;

  std::size_t dimension() const { return static_cast<std::size_t>(x_.cols()); }
  const std::vector<double>& theta() const { return theta_; }
  double beta() const { return beta_; }
  double process_variance() const { return sigma2_; }
  double nugget() const { return nugget_; }
  double log_likelihood() const { return log_likelihood_; }
  const Eigen::MatrixXd& inputs() const { return x_; }
  const Eigen::VectorXd& targets() const { return y_; }

  nlohmann::json to_json() const;
  static KrigingModel from_json(const nlohmann::json& j);

 private:
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  std::vector<double> theta_;
  double nugget_ = 0.0;
  double beta_ = 0.0;
  double sigma2_ = 0.0;
  double log_likelihood_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd weights_;  // R⁻¹ (Y − β̂·1)
};

/// Gaussian correlation matrix of the rows of `x` (without nugget).
Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& x, std::span<const double> theta);

KrigingModel fit_krg(const Dataset& train, std::string_view objective, const KrigingOptions& options = {});

}  // namespace pumpfit
