#include "pumpfit/neural_net.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "pumpfit/error.hpp"
#include "pumpfit/rng.hpp"

namespace pumpfit {
namespace {

double activate(Activation a, double v) {
  return a == Activation::tanh ? std::tanh(v) : 1.0 / (1.0 + std::exp(-v));
}

// Derivative expressed through the activation value z = f(v).
double activate_slope(Activation a, double z) { return a == Activation::tanh ? 1.0 - z * z : z * (1.0 - z); }

struct Layers {
  Eigen::MatrixXd hidden;  // N × h activations
  Eigen::MatrixXd output;  // N × o
};

Layers run(const MlpTopology& t, const MlpWeights& w, const Eigen::MatrixXd& x) {
  if (static_cast<std::size_t>(x.cols()) != t.n_inputs) throw DataError("mlp: input dimension mismatch");
  Layers l;
  l.hidden = (x * w.hidden_weights.transpose()).rowwise() + w.hidden_bias.transpose();
  l.hidden = l.hidden.unaryExpr([&](double v) { return activate(t.hidden_activation, v); });
  l.output = (l.hidden * w.output_weights.transpose()).rowwise() + w.output_bias.transpose();
  return l;
}

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd da = a.array() - a.mean();
  const Eigen::VectorXd db = b.array() - b.mean();
  const double denom = std::sqrt(da.squaredNorm() * db.squaredNorm());
  return denom > 0.0 ? da.dot(db) / denom : 0.0;
}

// γ = Σ βλ/(βλ + α) over the eigenvalues λ of JᵀJ (equivalently of JJᵀ).
double effective_parameters(const Eigen::MatrixXd& j, double alpha, double beta) {
  const Eigen::MatrixXd gram = j.rows() < j.cols() ? Eigen::MatrixXd(j * j.transpose())
                                                   : Eigen::MatrixXd(j.transpose() * j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  double gamma = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const double bl = beta * std::max(es.eigenvalues()(k), 0.0);
    if (bl > 0.0) gamma += bl / (bl + alpha);
  }
  return gamma;
}

}  // namespace

std::string_view to_string(Activation a) { return a == Activation::tanh ? "tanh" : "logistic"; }

Activation activation_from_string(std::string_view s) {
  if (s == "tanh") return Activation::tanh;
  if (s == "logistic") return Activation::logistic;
  throw ConfigError("unknown activation '" + std::string(s) + "'");
}

void MlpTopology::validate() const {
  if (n_inputs < 1 || n_hidden < 1 || n_outputs < 1) throw ConfigError("mlp layer sizes must be >= 1");
}

Eigen::VectorXd MlpWeights::flatten() const {
  const Eigen::Index h = hidden_weights.rows(), n = hidden_weights.cols(), o = output_weights.rows();
  Eigen::VectorXd flat(h * n + h + o * h + o);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < h; ++j)
    for (Eigen::Index i = 0; i < n; ++i) flat(k++) = hidden_weights(j, i);
  for (Eigen::Index j = 0; j < h; ++j) flat(k++) = hidden_bias(j);
  for (Eigen::Index q = 0; q < o; ++q)
    for (Eigen::Index j = 0; j < h; ++j) flat(k++) = output_weights(q, j);
  for (Eigen::Index q = 0; q < o; ++q) flat(k++) = output_bias(q);
  return flat;
}

MlpWeights MlpWeights::unflatten(const MlpTopology& t, const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != t.parameter_count()) {
    throw DataError("mlp: flat weight vector has the wrong length");
  }
  const auto h = static_cast<Eigen::Index>(t.n_hidden), n = static_cast<Eigen::Index>(t.n_inputs),
             o = static_cast<Eigen::Index>(t.n_outputs);
  MlpWeights w{Eigen::MatrixXd(h, n), Eigen::VectorXd(h), Eigen::MatrixXd(o, h), Eigen::VectorXd(o)};
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < h; ++j)
    for (Eigen::Index i = 0; i < n; ++i) w.hidden_weights(j, i) = flat(k++);
  for (Eigen::Index j = 0; j < h; ++j) w.hidden_bias(j) = flat(k++);
  for (Eigen::Index q = 0; q < o; ++q)
    for (Eigen::Index j = 0; j < h; ++j) w.output_weights(q, j) = flat(k++);
  for (Eigen::Index q = 0; q < o; ++q) w.output_bias(q) = flat(k++);
  return w;
}

bool MlpWeights::operator==(const MlpWeights& o) const {
  return hidden_weights.rows() == o.hidden_weights.rows() && hidden_weights.cols() == o.hidden_weights.cols() &&
         output_weights.rows() == o.output_weights.rows() && flatten() == o.flatten();
}

MlpWeights init_weights(const MlpTopology& t, std::uint64_t seed) {
  t.validate();
  Rng rng(derive_seed(seed, "mlp-init"));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd flat(static_cast<Eigen::Index>(t.parameter_count()));
  for (Eigen::Index k = 0; k < flat.size(); ++k) flat(k) = u(rng);
  return MlpWeights::unflatten(t, flat);
}

Eigen::VectorXd forward(const MlpTopology& t, const MlpWeights& w, std::span<const double> x) {
  if (x.size() != t.n_inputs) throw DataError("mlp: input dimension mismatch");
  Eigen::VectorXd hidden = w.hidden_bias;
  for (Eigen::Index j = 0; j < hidden.size(); ++j) {
    for (std::size_t i = 0; i < x.size(); ++i) hidden(j) += w.hidden_weights(j, static_cast<Eigen::Index>(i)) * x[i];
    hidden(j) = activate(t.hidden_activation, hidden(j));
  }
  Eigen::VectorXd out = w.output_bias;
  for (Eigen::Index q = 0; q < out.size(); ++q)
    for (Eigen::Index j = 0; j < hidden.size(); ++j) out(q) += w.output_weights(q, j) * hidden(j);
  return out;
}

Eigen::MatrixXd forward(const MlpTopology& t, const MlpWeights& w, const Eigen::MatrixXd& x) {
  return run(t, w, x).output;
}

ErrorTerms error_terms(const MlpTopology& t, const MlpWeights& w, const Eigen::MatrixXd& x,
                       const Eigen::MatrixXd& y) {
  return {(forward(t, w, x) - y).squaredNorm(), w.flatten().squaredNorm()};
}

Eigen::VectorXd gradient(const MlpTopology& t, const MlpWeights& w, const Eigen::MatrixXd& x,
                         const Eigen::MatrixXd& y, double alpha, double beta) {
  if (x.rows() == 0) throw DataError("mlp gradient needs a nonempty batch");
  if (y.rows() != x.rows() || static_cast<std::size_t>(y.cols()) != t.n_outputs) {
    throw DataError("mlp: target shape mismatch");
  }
  const Layers l = run(t, w, x);
  const Eigen::MatrixXd out_delta = 2.0 * (l.output - y);  // ∂E_D/∂(output)
  const Eigen::MatrixXd slope = l.hidden.unaryExpr([&](double z) { return activate_slope(t.hidden_activation, z); });
  const Eigen::MatrixXd hidden_delta = (out_delta * w.output_weights).cwiseProduct(slope);

  MlpWeights g{hidden_delta.transpose() * x, hidden_delta.colwise().sum().transpose(),
               out_delta.transpose() * l.hidden, out_delta.colwise().sum().transpose()};
  Eigen::VectorXd grad = beta * g.flatten();
  if (alpha != 0.0) grad += 2.0 * alpha * w.flatten();
  return grad;
}

Eigen::MatrixXd jacobian(const MlpTopology& t, const MlpWeights& w, const Eigen::MatrixXd& x) {
  const Layers l = run(t, w, x);
  const auto n = static_cast<Eigen::Index>(t.n_inputs), h = static_cast<Eigen::Index>(t.n_hidden),
             o = static_cast<Eigen::Index>(t.n_outputs);
  const Eigen::Index off_b1 = h * n, off_w2 = off_b1 + h, off_b2 = off_w2 + o * h;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(x.rows() * o, static_cast<Eigen::Index>(t.parameter_count()));
  for (Eigen::Index s = 0; s < x.rows(); ++s) {
    for (Eigen::Index q = 0; q < o; ++q) {
      const Eigen::Index r = s * o + q;
      for (Eigen::Index j = 0; j < h; ++j) {
        const double z = l.hidden(s, j);
        const double back = w.output_weights(q, j) * activate_slope(t.hidden_activation, z);
        for (Eigen::Index i = 0; i < n; ++i) jac(r, j * n + i) = back * x(s, i);
        jac(r, off_b1 + j) = back;
        jac(r, off_w2 + q * h + j) = z;
      }
      jac(r, off_b2 + q) = 1.0;
    }
  }
  return jac;
}

// ---------------------------------------------------------------------------

void TrainConfig::validate() const {
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (!(mu_init > 0.0) || !(mu_increase > 1.0) || !(mu_decrease > 0.0 && mu_decrease < 1.0) ||
      !(mu_max > mu_init)) {
    throw ConfigError("mu schedule needs mu_init > 0, increase > 1, 0 < decrease < 1, mu_max > mu_init");
  }
  if (!bayesian && (!(alpha >= 0.0) || !(beta > 0.0))) throw ConfigError("fixed alpha >= 0 and beta > 0 required");
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"max_epochs", c.max_epochs}, {"mu_init", c.mu_init},     {"mu_increase", c.mu_increase},
          {"mu_decrease", c.mu_decrease}, {"mu_max", c.mu_max},     {"min_gradient", c.min_gradient},
          {"performance_goal", c.performance_goal}, {"bayesian", c.bayesian}, {"alpha", c.alpha},
          {"beta", c.beta},             {"seed", c.seed}};
}

nlohmann::json to_json(const TrainReport& r) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : r.epochs) {
    epochs.push_back({{"epoch", e.epoch},       {"objective", e.objective},   {"performance", e.performance},
                      {"data_error", e.data_error}, {"weight_error", e.weight_error},
                      {"gradient", e.gradient_norm}, {"mu", e.mu},           {"gamma", e.gamma},
                      {"alpha", e.alpha},        {"beta", e.beta},             {"val_performance", e.val_performance},
                      {"objective_rose", e.objective_rose}});
  }
  return {{"epochs", epochs}, {"stop_reason", r.stop_reason}, {"failed", r.failed},
          {"regression_r", r.regression_r}};
}

TrainResult train_bayesian_regularization(const MlpTopology& t, const Eigen::MatrixXd& x,
                                          const Eigen::MatrixXd& y, const TrainConfig& cfg) {
  return train_bayesian_regularization(t, x, y, Eigen::MatrixXd(0, x.cols()), Eigen::MatrixXd(0, y.cols()), cfg);
}

TrainResult train_bayesian_regularization(const MlpTopology& t, const Eigen::MatrixXd& x,
                                          const Eigen::MatrixXd& y, const Eigen::MatrixXd& x_val,
                                          const Eigen::MatrixXd& y_val, const TrainConfig& cfg) {
  return train_bayesian_regularization(t, init_weights(t, cfg.seed), x, y, x_val, y_val, cfg);
}

TrainResult train_bayesian_regularization(const MlpTopology& t, MlpWeights start, const Eigen::MatrixXd& x,
                                          const Eigen::MatrixXd& y, const Eigen::MatrixXd& x_val,
                                          const Eigen::MatrixXd& y_val, const TrainConfig& cfg) {
  t.validate();
  cfg.validate();
  if (x.rows() == 0) throw DataError("training set is empty");
  if (y.rows() != x.rows() || static_cast<std::size_t>(y.cols()) != t.n_outputs ||
      static_cast<std::size_t>(x.cols()) != t.n_inputs) {
    throw DataError("training data does not match the network topology");
  }
  const bool has_val = x_val.rows() > 0;
  const double n_targets = static_cast<double>(y.size());
  const auto n_params = static_cast<double>(t.parameter_count());
  const Eigen::Index p = static_cast<Eigen::Index>(t.parameter_count());

  TrainResult res;
  Eigen::VectorXd w = start.flatten();
  auto terms_at = [&](const Eigen::VectorXd& flat) { return error_terms(t, MlpWeights::unflatten(t, flat), x, y); };
  auto val_perf = [&](const Eigen::VectorXd& flat) {
    if (!has_val) return -1.0;
    return (forward(t, MlpWeights::unflatten(t, flat), x_val) - y_val).squaredNorm() /
           static_cast<double>(y_val.size());
  };

  ErrorTerms terms = terms_at(w);
  double alpha = cfg.alpha, beta = cfg.beta, gamma = n_params;
  if (cfg.bayesian) {
    alpha = terms.weights == 0.0 ? 1.0 : gamma / (2.0 * terms.weights);
    beta = terms.data > 0.0 ? (n_targets - gamma) / (2.0 * terms.data) : 1.0;
    if (beta <= 0.0) beta = 1.0;
  }
  double mu = cfg.mu_init;
  double objective = beta * terms.data + alpha * terms.weights;

  auto record = [&](std::size_t epoch, double grad_norm, bool rose) {
    EpochRecord e;
    e.epoch = epoch;
    e.objective = objective;
    e.performance = terms.data / n_targets;
    e.data_error = terms.data;
    e.weight_error = terms.weights;
    e.gradient_norm = grad_norm;
    e.mu = mu;
    e.gamma = gamma;
    e.alpha = alpha;
    e.beta = beta;
    e.val_performance = val_perf(w);
    e.objective_rose = rose;
    res.report.epochs.push_back(e);
  };

  if (!std::isfinite(objective)) {
    record(0, std::numeric_limits<double>::quiet_NaN(), false);
    res.report.failed = true;
    res.report.stop_reason = "non-finite objective";
    res.weights = MlpWeights::unflatten(t, w);
    return res;
  }

  Eigen::MatrixXd jac = jacobian(t, MlpWeights::unflatten(t, w), x);
  auto residual = [&](const Eigen::VectorXd& flat) {
    const Eigen::MatrixXd r = forward(t, MlpWeights::unflatten(t, flat), x) - y;
    // Row-major flattening matches the sample-major Jacobian rows.
    Eigen::VectorXd v(r.size());
    for (Eigen::Index s = 0; s < r.rows(); ++s)
      for (Eigen::Index q = 0; q < r.cols(); ++q) v(s * r.cols() + q) = r(s, q);
    return v;
  };
  Eigen::VectorXd jr = jac.transpose() * residual(w);
  double grad_norm = (2.0 * (beta * jr + alpha * w)).norm();
  record(0, grad_norm, false);

  for (std::size_t epoch = 1;; ++epoch) {
    if (epoch > cfg.max_epochs) {
      res.report.stop_reason = "max_epochs";
      break;
    }
    if (terms.data / n_targets <= cfg.performance_goal) {
      res.report.stop_reason = "performance_goal";
      break;
    }
    if (grad_norm < cfg.min_gradient) {
      res.report.stop_reason = "min_gradient";
      break;
    }

    Eigen::MatrixXd jj = Eigen::MatrixXd::Zero(p, p);
    jj.selfadjointView<Eigen::Lower>().rankUpdate(jac.transpose());
    jj.triangularView<Eigen::StrictlyUpper>() = jj.transpose();
    const Eigen::VectorXd rhs = beta * jr + alpha * w;

    bool accepted = false;
    Eigen::VectorXd w_new;
    ErrorTerms terms_new;
    while (mu <= cfg.mu_max) {
      Eigen::MatrixXd a = beta * jj;
      a.diagonal().array() += alpha + mu;
      Eigen::LLT<Eigen::MatrixXd> llt(a);
      if (llt.info() == Eigen::Success) {
        w_new = w - llt.solve(rhs);
        terms_new = terms_at(w_new);
        const double f_new = beta * terms_new.data + alpha * terms_new.weights;
        if (std::isfinite(f_new) && f_new < objective) {
          accepted = true;
          mu *= cfg.mu_decrease;
          break;
        }
      }
      mu *= cfg.mu_increase;
    }
    if (!accepted) {
      res.report.stop_reason = "mu_max";
      break;
    }

    w = std::move(w_new);
    terms = terms_new;
    const double previous = objective;
    if (cfg.bayesian) {
      gamma = effective_parameters(jac, alpha, beta);
      if (terms.weights > 0.0) alpha = gamma / (2.0 * terms.weights);
      if (terms.data > 0.0) beta = (n_targets - gamma) / (2.0 * terms.data);
      if (beta <= 0.0) beta = 1.0;
    }
    objective = beta * terms.data + alpha * terms.weights;
    if (!std::isfinite(objective)) {
      record(epoch, grad_norm, false);
      res.report.failed = true;
      res.report.stop_reason = "non-finite objective";
      break;
    }

    jac = jacobian(t, MlpWeights::unflatten(t, w), x);
    jr = jac.transpose() * residual(w);
    grad_norm = (2.0 * (beta * jr + alpha * w)).norm();
    record(epoch, grad_norm, objective > previous);
  }

  res.weights = MlpWeights::unflatten(t, w);
  const Eigen::MatrixXd pred = forward(t, res.weights, x);
  for (Eigen::Index q = 0; q < y.cols(); ++q) res.report.regression_r.push_back(correlation(pred.col(q), y.col(q)));
  return res;
}

nlohmann::json to_json(const MlpTopology& t) {
  return {{"inputs", t.n_inputs},
          {"hidden", t.n_hidden},
          {"outputs", t.n_outputs},
          {"hidden_activation", std::string(to_string(t.hidden_activation))},
          {"output_activation", "linear"}};
}

MlpTopology topology_from_json(const nlohmann::json& j) {
  MlpTopology t;
  t.n_inputs = j.at("inputs").get<std::size_t>();
  t.n_hidden = j.at("hidden").get<std::size_t>();
  t.n_outputs = j.at("outputs").get<std::size_t>();
  t.hidden_activation = activation_from_string(j.value("hidden_activation", std::string("tanh")));
  t.validate();
  return t;
}

}  // namespace pumpfit
