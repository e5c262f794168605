#include "pumpfit/predictor.hpp"

#include <fstream>

#include "pumpfit/error.hpp"
#include "pumpfit/rng.hpp"

namespace pumpfit {

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::rsf: return "rsf";
    case ModelKind::rbf: return "rbf";
    case ModelKind::krg: return "krg";
    case ModelKind::nn: return "nn";
  }
  return "?";
}

ModelKind model_kind_from_string(std::string_view s) {
  if (s == "rsf" || s == "RSF") return ModelKind::rsf;
  if (s == "rbf" || s == "RBF") return ModelKind::rbf;
  if (s == "krg" || s == "KRG" || s == "kriging") return ModelKind::krg;
  if (s == "nn" || s == "NN") return ModelKind::nn;
  throw ConfigError("unknown model kind '" + std::string(s) + "'");
}

std::string default_label(ModelKind k) {
  std::string s(to_string(k));
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

nlohmann::json to_json(const Normalizer& n) { return {{"min", n.min()}, {"max", n.max()}}; }

Normalizer normalizer_from_json(const nlohmann::json& j) {
  return Normalizer(j.at("min").get<std::vector<double>>(), j.at("max").get<std::vector<double>>());
}

// ---------------------------------------------------------------------------

Predictor::Predictor(std::vector<std::string> inputs, std::vector<std::string> outputs, std::string label)
    : inputs_(std::move(inputs)), outputs_(std::move(outputs)), label_(std::move(label)) {
  if (inputs_.empty()) throw DataError("predictor needs at least one input");
  if (outputs_.empty()) throw DataError("predictor needs at least one output");
}

Eigen::MatrixXd Predictor::predict(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.cols()) != inputs_.size()) throw DataError("predictor: input dimension mismatch");
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(outputs_.size()));
  std::vector<double> row(inputs_.size());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (std::size_t k = 0; k < row.size(); ++k) row[k] = x(i, static_cast<Eigen::Index>(k));
    const auto y = predict(row);
    for (std::size_t k = 0; k < y.size(); ++k) out(i, static_cast<Eigen::Index>(k)) = y[k];
  }
  return out;
}

Dataset Predictor::predict(const Dataset& d) const {
  std::vector<std::size_t> cols;
  std::vector<AttributeSpec> attrs;
  for (const auto& name : inputs_) {
    if (!d.has(name)) throw DataError("input column '" + name + "' required by " + label_ + " is missing");
    cols.push_back(d.index_of(name));
    attrs.push_back({name, Role::input, d.attributes()[cols.back()].unit});
  }
  const Eigen::MatrixXd x = d.matrix(cols);
  const Eigen::MatrixXd y = predict(x);
  for (const auto& name : outputs_) {
    attrs.push_back({name, Role::output, d.has(name) ? d.attributes()[d.index_of(name)].unit : ""});
  }
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(x.rows()) * attrs.size());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index k = 0; k < x.cols(); ++k) values.push_back(x(i, k));
    for (Eigen::Index k = 0; k < y.cols(); ++k) values.push_back(y(i, k));
  }
  return Dataset(std::move(attrs), std::move(values));
}

nlohmann::json Predictor::common_json() const {
  return {{"kind", std::string(to_string(kind()))},
          {"label", label_},
          {"inputs", inputs_},
          {"outputs", outputs_},
          {"meta", meta_}};
}

// ---------------------------------------------------------------------------

SurrogatePredictor::SurrogatePredictor(ModelKind kind, std::vector<std::string> inputs,
                                       std::vector<std::string> outputs, Normalizer input_normalizer,
                                       std::vector<Model> models)
    : Predictor(std::move(inputs), std::move(outputs), default_label(kind)),
      kind_(kind),
      input_norm_(std::move(input_normalizer)),
      models_(std::move(models)) {
  if (kind_ == ModelKind::nn) throw DataError("nn is not a surrogate kind");
  if (models_.size() != output_names().size()) throw DataError("surrogate needs one model per output");
  if (input_norm_.size() != input_names().size()) throw DataError("surrogate normalizer does not match inputs");
  const std::size_t expect = kind_ == ModelKind::rsf ? 0 : kind_ == ModelKind::rbf ? 1 : 2;
  for (const auto& m : models_) {
    if (m.index() != expect) throw DataError("surrogate model type does not match its kind");
  }
}

std::vector<double> SurrogatePredictor::predict(std::span<const double> x) const {
  const auto u = input_norm_.apply(x);
  std::vector<double> y;
  y.reserve(models_.size());
  for (const auto& m : models_) y.push_back(std::visit([&](const auto& model) { return model.predict(u); }, m));
  return y;
}

nlohmann::json SurrogatePredictor::to_json() const {
  auto j = common_json();
  j["input_normalizer"] = pumpfit::to_json(input_norm_);
  nlohmann::json models = nlohmann::json::array();
  for (const auto& m : models_) models.push_back(std::visit([](const auto& model) { return model.to_json(); }, m));
  j["models"] = std::move(models);
  return j;
}

SurrogatePredictor SurrogatePredictor::from_json(const nlohmann::json& j) {
  const auto kind = model_kind_from_string(j.at("kind").get<std::string>());
  std::vector<Model> models;
  for (const auto& m : j.at("models")) {
    switch (kind) {
      case ModelKind::rsf: models.emplace_back(RsfModel::from_json(m)); break;
      case ModelKind::rbf: models.emplace_back(RbfModel::from_json(m)); break;
      case ModelKind::krg: models.emplace_back(KrigingModel::from_json(m)); break;
      case ModelKind::nn: throw DataError("nn document passed to the surrogate loader");
    }
  }
  SurrogatePredictor p(kind, j.at("inputs").get<std::vector<std::string>>(),
                       j.at("outputs").get<std::vector<std::string>>(),
                       normalizer_from_json(j.at("input_normalizer")), std::move(models));
  p.set_label(j.value("label", default_label(kind)));
  p.set_meta(j.value("meta", nlohmann::json::object()));
  return p;
}

SurrogatePredictor fit_surrogate(ModelKind kind, const Dataset& train, const SurrogateOptions& options) {
  const auto outputs = train.indices(Role::output);
  if (outputs.empty()) throw DataError("training data has no output columns");
  const Normalizer norm = fit_normalizer(train, Role::input);
  const Eigen::MatrixXd u = norm.apply(train.matrix(Role::input));

  std::vector<SurrogatePredictor::Model> models;
  for (std::size_t k : outputs) {
    Eigen::VectorXd y = train.matrix(std::vector<std::size_t>{k}).col(0);
    switch (kind) {
      case ModelKind::rsf: models.emplace_back(RsfModel::fit(u, y)); break;
      case ModelKind::rbf: models.emplace_back(RbfModel::fit(u, std::move(y), options.rbf)); break;
      case ModelKind::krg: models.emplace_back(KrigingModel::fit(u, std::move(y), options.krg)); break;
      case ModelKind::nn: throw DataError("use fit_neural for neural networks");
    }
  }
  return SurrogatePredictor(kind, train.names(Role::input), train.names(Role::output), norm, std::move(models));
}

// ---------------------------------------------------------------------------

NeuralPredictor::NeuralPredictor(std::vector<std::string> inputs, std::vector<std::string> outputs,
                                 Normalizer input_normalizer, Normalizer output_normalizer,
                                 std::vector<Network> networks, std::string label)
    : Predictor(std::move(inputs), std::move(outputs), std::move(label)),
      input_norm_(std::move(input_normalizer)),
      output_norm_(std::move(output_normalizer)),
      networks_(std::move(networks)) {
  if (input_norm_.size() != input_names().size() || output_norm_.size() != output_names().size()) {
    throw DataError("network normalizers do not match the attribute lists");
  }
  std::vector<int> covered(output_names().size(), 0);
  for (const auto& n : networks_) {
    if (n.topology.n_inputs != input_names().size() || n.topology.n_outputs != n.outputs.size()) {
      throw DataError("network topology does not match its attributes");
    }
    for (std::size_t o : n.outputs) {
      if (o >= covered.size()) throw DataError("network output index out of range");
      ++covered[o];
    }
  }
  for (int c : covered) {
    if (c != 1) throw DataError("every output must be produced by exactly one network");
  }
}

std::vector<double> NeuralPredictor::predict(std::span<const double> x) const {
  const auto u = input_norm_.apply(x);
  std::vector<double> y(output_names().size());
  for (const auto& n : networks_) {
    const Eigen::VectorXd out = forward(n.topology, n.weights, u);
    for (std::size_t k = 0; k < n.outputs.size(); ++k) {
      y[n.outputs[k]] = output_norm_.invert(out(static_cast<Eigen::Index>(k)), n.outputs[k]);
    }
  }
  return y;
}

Eigen::MatrixXd NeuralPredictor::predict(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd u = input_norm_.apply(x);
  Eigen::MatrixXd y(x.rows(), static_cast<Eigen::Index>(output_names().size()));
  for (const auto& n : networks_) {
    const Eigen::MatrixXd out = forward(n.topology, n.weights, u);
    for (std::size_t k = 0; k < n.outputs.size(); ++k) y.col(static_cast<Eigen::Index>(n.outputs[k])) = out.col(static_cast<Eigen::Index>(k));
  }
  return output_norm_.invert(y);
}

nlohmann::json NeuralPredictor::to_json() const {
  auto j = common_json();
  j["input_normalizer"] = pumpfit::to_json(input_norm_);
  j["output_normalizer"] = pumpfit::to_json(output_norm_);
  nlohmann::json nets = nlohmann::json::array();
  for (const auto& n : networks_) {
    const Eigen::VectorXd flat = n.weights.flatten();
    nets.push_back({{"topology", pumpfit::to_json(n.topology)},
                    {"outputs", n.outputs},
                    {"weights", std::vector<double>(flat.data(), flat.data() + flat.size())}});
  }
  j["networks"] = std::move(nets);
  return j;
}

NeuralPredictor NeuralPredictor::from_json(const nlohmann::json& j) {
  std::vector<Network> nets;
  for (const auto& n : j.at("networks")) {
    const auto topo = topology_from_json(n.at("topology"));
    const auto flat = n.at("weights").get<std::vector<double>>();
    nets.push_back({topo,
                    MlpWeights::unflatten(topo, Eigen::Map<const Eigen::VectorXd>(
                                                    flat.data(), static_cast<Eigen::Index>(flat.size()))),
                    n.at("outputs").get<std::vector<std::size_t>>()});
  }
  NeuralPredictor p(j.at("inputs").get<std::vector<std::string>>(), j.at("outputs").get<std::vector<std::string>>(),
                    normalizer_from_json(j.at("input_normalizer")), normalizer_from_json(j.at("output_normalizer")),
                    std::move(nets), j.value("label", std::string("NN")));
  p.set_meta(j.value("meta", nlohmann::json::object()));
  return p;
}

NeuralFit fit_neural(const Dataset& train, const Dataset& val, const NeuralOptions& options) {
  const auto out_idx = train.indices(Role::output);
  if (out_idx.empty()) throw DataError("training data has no output columns");
  const auto in_names = train.names(Role::input), out_names = train.names(Role::output);
  const bool has_val = !val.empty();
  if (has_val && (val.names(Role::input) != in_names || val.names(Role::output) != out_names)) {
    throw DataError("validation data does not match the training schema");
  }

  const Normalizer in_norm = fit_normalizer(train, Role::input);
  const Normalizer out_norm = fit_normalizer(train, Role::output);
  const Eigen::MatrixXd x = in_norm.apply(train.matrix(Role::input));
  const Eigen::MatrixXd y = out_norm.apply(train.matrix(Role::output));
  const Eigen::MatrixXd xv = has_val ? in_norm.apply(val.matrix(Role::input)) : Eigen::MatrixXd(0, x.cols());
  const Eigen::MatrixXd yv = has_val ? out_norm.apply(val.matrix(Role::output)) : Eigen::MatrixXd(0, y.cols());

  std::vector<std::vector<std::size_t>> groups;
  if (options.joint) {
    groups.emplace_back();
    for (std::size_t k = 0; k < out_names.size(); ++k) groups[0].push_back(k);
  } else {
    for (std::size_t k = 0; k < out_names.size(); ++k) groups.push_back({k});
  }

  NeuralFit fit;
  std::vector<NeuralPredictor::Network> nets;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    MlpTopology topo{static_cast<std::size_t>(x.cols()), options.hidden, groups[g].size(),
                     options.activation};
    TrainConfig cfg = options.train;
    if (!options.joint) cfg.seed = derive_seed(options.train.seed, static_cast<std::uint64_t>(g));
    Eigen::MatrixXd yg(y.rows(), static_cast<Eigen::Index>(groups[g].size()));
    Eigen::MatrixXd yvg(yv.rows(), yg.cols());
    for (std::size_t k = 0; k < groups[g].size(); ++k) {
      yg.col(static_cast<Eigen::Index>(k)) = y.col(static_cast<Eigen::Index>(groups[g][k]));
      yvg.col(static_cast<Eigen::Index>(k)) = yv.col(static_cast<Eigen::Index>(groups[g][k]));
    }
    auto res = train_bayesian_regularization(topo, x, yg, xv, yvg, cfg);
    if (res.report.failed) throw NumericalError("network training failed: " + res.report.stop_reason);
    nets.push_back({topo, std::move(res.weights), groups[g]});
    fit.reports.push_back(std::move(res.report));
  }
  fit.predictor = std::make_unique<NeuralPredictor>(in_names, out_names, in_norm, out_norm, std::move(nets));
  return fit;
}

// ---------------------------------------------------------------------------

std::unique_ptr<Predictor> predictor_from_json(const nlohmann::json& j) {
  if (!j.contains("kind")) throw DataError("model document has no 'kind'");
  const auto kind = model_kind_from_string(j.at("kind").get<std::string>());
  if (kind == ModelKind::nn) return std::make_unique<NeuralPredictor>(NeuralPredictor::from_json(j));
  return std::make_unique<SurrogatePredictor>(SurrogatePredictor::from_json(j));
}

std::unique_ptr<Predictor> load_predictor(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("model file " + path.string() + " is not valid JSON: " + e.what());
  }
  try {
    return predictor_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("model file " + path.string() + " is malformed: " + e.what());
  }
}

void save_predictor(const Predictor& p, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file " + path.string());
  out << p.to_json().dump(2) << '\n';
}

}  // namespace pumpfit
