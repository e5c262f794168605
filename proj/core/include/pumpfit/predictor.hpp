#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "pumpfit/dataset.hpp"
#include "pumpfit/kriging.hpp"
#include "pumpfit/neural_net.hpp"
#include "pumpfit/rbf.hpp"
#include "pumpfit/rsf.hpp"

namespace pumpfit {

enum class ModelKind { rsf, rbf, krg, nn };

std::string_view to_string(ModelKind k);
ModelKind model_kind_from_string(std::string_view s);
/// Upper-case report label ("RSF", "RBF", "KRG", "NN").
std::string default_label(ModelKind k);

/// A fitted model mapping raw design variables to raw objective values.
/// Implementations are immutable after construction and safe to share.
class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual ModelKind kind() const = 0;
  const std::string& label() const { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }
  const std::vector<std::string>& input_names() const { return inputs_; }
  const std::vector<std::string>& output_names() const { return outputs_; }

  /// Free-form provenance (config digest, seed) stored under "meta".
  const nlohmann::json& meta() const { return meta_; }
  void set_meta(nlohmann::json meta) { meta_ = std::move(meta); }

  /// One value per output name.
  virtual std::vector<double> predict(std::span<const double> x) const = 0;
  /// Rows are samples; columns follow input_names() / output_names().
  virtual Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const;
  /// Looks the inputs up by name in `d`; returns the inputs plus predicted outputs.
  Dataset predict(const Dataset& d) const;

  virtual nlohmann::json to_json() const = 0;

 protected:
  Predictor(std::vector<std::string> inputs, std::vector<std::string> outputs, std::string label);
  nlohmann::json common_json() const;

 private:
  std::vector<std::string> inputs_, outputs_;
  std::string label_;
  nlohmann::json meta_ = nlohmann::json::object();
};

// ---------------------------------------------------------------------------

struct SurrogateOptions {
  RbfOptions rbf;
  KrigingOptions krg;
};

/// RSF, RBF or Kriging: one independent model per objective, all fitted on
/// inputs min–max normalized onto [−1, 1] over the training rows.
class SurrogatePredictor final : public Predictor {
 public:
  using Model = std::variant<RsfModel, RbfModel, KrigingModel>;

  SurrogatePredictor(ModelKind kind, std::vector<std::string> inputs, std::vector<std::string> outputs,
                     Normalizer input_normalizer, std::vector<Model> models);

  ModelKind kind() const override { return kind_; }
  const Normalizer& input_normalizer() const { return input_norm_; }
  const std::vector<Model>& models() const { return models_; }

  std::vector<double> predict(std::span<const double> x) const override;
  using Predictor::predict;
  nlohmann::json to_json() const override;
  static SurrogatePredictor from_json(const nlohmann::json& j);

 private:
  ModelKind kind_;
  Normalizer input_norm_;
  std::vector<Model> models_;
};

/// Fits `kind` (not nn) to every output attribute of `train`.
SurrogatePredictor fit_surrogate(ModelKind kind, const Dataset& train, const SurrogateOptions& options = {});

// ---------------------------------------------------------------------------

struct NeuralOptions {
  std::size_t hidden = 50;
  Activation activation = Activation::tanh;
  /// One network for all objectives; false trains one network per objective.
  bool joint = true;
  TrainConfig train;
};

/// Single-hidden-layer network(s) trained on inputs and targets normalized
/// onto [−1, 1] over the training rows.
class NeuralPredictor final : public Predictor {
 public:
  struct Network {
    MlpTopology topology;
    MlpWeights weights;
    std::vector<std::size_t> outputs;  // positions in output_names()
  };

  NeuralPredictor(std::vector<std::string> inputs, std::vector<std::string> outputs, Normalizer input_normalizer,
                  Normalizer output_normalizer, std::vector<Network> networks, std::string label = "NN");

  ModelKind kind() const override { return ModelKind::nn; }
  const Normalizer& input_normalizer() const { return input_norm_; }
  const Normalizer& output_normalizer() const { return output_norm_; }
  const std::vector<Network>& networks() const { return networks_; }

  std::vector<double> predict(std::span<const double> x) const override;
  Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const override;
  using Predictor::predict;
  nlohmann::json to_json() const override;
  static NeuralPredictor from_json(const nlohmann::json& j);

 private:
  Normalizer input_norm_, output_norm_;
  std::vector<Network> networks_;
};

struct NeuralFit {
  std::unique_ptr<NeuralPredictor> predictor;
  std::vector<TrainReport> reports;  // one per network
};

/// Trains on every output of `train`; `val` rows (may be empty) are monitored
/// on the training normalization and never influence the weights.
NeuralFit fit_neural(const Dataset& train, const Dataset& val, const NeuralOptions& options);

/// Reconstructs any predictor from its JSON document.
std::unique_ptr<Predictor> predictor_from_json(const nlohmann::json& j);
std::unique_ptr<Predictor> load_predictor(const std::filesystem::path& path);
void save_predictor(const Predictor& p, const std::filesystem::path& path);

nlohmann::json to_json(const Normalizer& n);
Normalizer normalizer_from_json(const nlohmann::json& j);

}  // namespace pumpfit
