#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace pumpfit {

enum class Activation { tanh, logistic };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view s);

/// Single hidden layer, linear output layer.
struct MlpTopology {
  std::size_t n_inputs = 3;
  std::size_t n_hidden = 50;
  std::size_t n_outputs = 2;
  Activation hidden_activation = Activation::tanh;

  std::size_t parameter_count() const {
    return n_hidden * n_inputs + n_hidden + n_outputs * n_hidden + n_outputs;
  }
  void validate() const;
  bool operator==(const MlpTopology&) const = default;
};

/// Layer weights and thresholds. The flat parameter vector concatenates
/// hidden weights (row-major, hidden × input), hidden thresholds, output
/// weights (row-major, output × hidden) and output thresholds.
struct MlpWeights {
  Eigen::MatrixXd hidden_weights;    // h × n
  Eigen::VectorXd hidden_bias;       // h
  Eigen::MatrixXd output_weights;    // o × h
  Eigen::VectorXd output_bias;       // o

  Eigen::VectorXd flatten() const;
  static MlpWeights unflatten(const MlpTopology& t, const Eigen::VectorXd& flat);
  bool operator==(const MlpWeights& o) const;
};

/// Every weight and threshold i.i.d. uniform on [−1, 1].
MlpWeights init_weights(const MlpTopology& t, std::uint64_t seed);

Eigen::VectorXd forward(const MlpTopology& t, const MlpWeights& w, std::span<const double> x);
/// Row-wise forward pass; rows of `x` are samples.
Eigen::MatrixXd forward(const MlpTopology& t, const MlpWeights& w, const Eigen::MatrixXd& x);

/// Sum of squared residuals E_D = Σ (ŷ − y)² and E_W = Σ w².
struct ErrorTerms {
  double data = 0.0;
  double weights = 0.0;
};
ErrorTerms error_terms(const MlpTopology& t, const MlpWeights& w, const Eigen::MatrixXd& x,
                       const Eigen::MatrixXd& y);

/// ∇(β·E_D + α·E_W) by reverse accumulation, in flat parameter order.
Eigen::VectorXd gradient(const MlpTopology& t, const MlpWeights& w, const Eigen::MatrixXd& x,
                         const Eigen::MatrixXd& y, double alpha, double beta);

/// ∂ŷ/∂w, one row per (sample, output) pair ordered sample-major.
Eigen::MatrixXd jacobian(const MlpTopology& t, const MlpWeights& w, const Eigen::MatrixXd& x);

struct TrainConfig {
  std::size_t max_epochs = 1000;
  double mu_init = 1e-3;
  double mu_increase = 10.0;
  double mu_decrease = 0.1;
  double mu_max = 1e10;
  double min_gradient = 1e-7;
  /// Stop once the training MSE reaches this value.
  double performance_goal = 0.0;
  /// false: plain Levenberg–Marquardt on β·E_D + α·E_W with the fixed
  /// `alpha`/`beta` below, no re-estimation.
  bool bayesian = true;
  double alpha = 0.0;
  double beta = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);

struct EpochRecord {
  std::size_t epoch = 0;
  double objective = 0.0;     // β·E_D + α·E_W
  double performance = 0.0;   // E_D / (samples · outputs), the training MSE
  double data_error = 0.0;    // E_D
  double weight_error = 0.0;  // E_W
  double gradient_norm = 0.0;
  double mu = 0.0;
  double gamma = 0.0;         // effective number of parameters
  double alpha = 0.0;
  double beta = 0.0;
  double val_performance = -1.0;  // −1 when no validation rows
  bool objective_rose = false;    // rose across a hyperparameter re-estimate
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::string stop_reason;
  bool failed = false;
  std::vector<double> regression_r;  // training-set correlation per output

  const EpochRecord& final() const { return epochs.back(); }
};

nlohmann::json to_json(const TrainReport& r);

struct TrainResult {
  MlpWeights weights;
  TrainReport report;
};

/// Levenberg–Marquardt on F = β·E_D + α·E_W with the Gauss–Newton Hessian
/// 2(βJᵀJ + αI). After each epoch α and β are re-estimated from the evidence:
///   γ = P − α·tr((βJᵀJ + αI)⁻¹),  α = γ/(2E_W),  β = (N − γ)/(2E_D)
/// with N the number of target values. Validation rows are only monitored.
/// Inputs and targets are expected on the normalized scale.
TrainResult train_bayesian_regularization(const MlpTopology& t, const Eigen::MatrixXd& x,
                                          const Eigen::MatrixXd& y, const Eigen::MatrixXd& x_val,
                                          const Eigen::MatrixXd& y_val, const TrainConfig& cfg);

TrainResult train_bayesian_regularization(const MlpTopology& t, const Eigen::MatrixXd& x,
                                          const Eigen::MatrixXd& y, const TrainConfig& cfg);

/// Training starting from given weights instead of a seeded initialization.
TrainResult train_bayesian_regularization(const MlpTopology& t, MlpWeights start, const Eigen::MatrixXd& x,
                                          const Eigen::MatrixXd& y, const Eigen::MatrixXd& x_val,
                                          const Eigen::MatrixXd& y_val, const TrainConfig& cfg);

nlohmann::json to_json(const MlpTopology& t);
MlpTopology topology_from_json(const nlohmann::json& j);

}  // namespace pumpfit
