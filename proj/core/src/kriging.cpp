#include "pumpfit/kriging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "detail/canonical.hpp"
#include "pumpfit/error.hpp"
#include "pumpfit/rng.hpp"

namespace pumpfit {
namespace {

struct GlsFit {
  double beta = 0.0;
  double sigma2 = 0.0;
  double log_likelihood = 0.0;
};

std::optional<GlsFit> gls(const Eigen::LLT<Eigen::MatrixXd>& chol, const Eigen::VectorXd& y) {
  if (chol.info() != Eigen::Success) return std::nullopt;
  const Eigen::Index n = y.size();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd r_ones = chol.solve(ones);
  const Eigen::VectorXd r_y = chol.solve(y);
  const double denom = ones.dot(r_ones);
  if (!(denom > 0.0) || !std::isfinite(denom)) return std::nullopt;

  GlsFit f;
  f.beta = ones.dot(r_y) / denom;
  const Eigen::VectorXd resid = y - f.beta * ones;
  f.sigma2 = std::max(resid.dot(chol.solve(resid)) / static_cast<double>(n),
                      std::numeric_limits<double>::min());
  const auto& l = chol.matrixLLT();
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) log_det += 2.0 * std::log(l(i, i));
  f.log_likelihood = -0.5 * static_cast<double>(n) * std::log(f.sigma2) - 0.5 * log_det;
  if (!std::isfinite(f.log_likelihood)) return std::nullopt;
  return f;
}

Eigen::LLT<Eigen::MatrixXd> factor(const Eigen::MatrixXd& x, std::span<const double> theta, double nugget) {
  Eigen::MatrixXd r = correlation_matrix(x, theta);
  r.diagonal().array() += nugget;
  return Eigen::LLT<Eigen::MatrixXd>(r);
}

struct SearchResult {
  std::vector<double> log_theta;
  double value = -std::numeric_limits<double>::infinity();
  bool found = false;
};

// Compass search in log10 θ, maximizing the concentrated likelihood.
SearchResult search_theta(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const KrigingOptions& o,
                          double nugget) {
  const std::size_t d = static_cast<std::size_t>(x.cols());
  const double lo = std::log10(o.theta_min), hi = std::log10(o.theta_max);
  const double range = hi - lo;

  auto objective = [&](const std::vector<double>& z) {
    std::vector<double> theta(d);
    for (std::size_t k = 0; k < d; ++k) theta[k] = std::pow(10.0, z[k]);
    auto v = KrigingModel::log_likelihood(x, y, theta, nugget);
    return v ? *v : -std::numeric_limits<double>::infinity();
  };

  // Start 0 is the box center; the rest form a seeded Latin hypercube.
  const std::size_t starts = std::max<std::size_t>(o.starts, 1);
  std::vector<std::vector<double>> z0(starts, std::vector<double>(d, 0.5 * (lo + hi)));
  Rng rng(derive_seed(o.seed, "kriging-starts"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (starts > 1) {
    const std::size_t m = starts - 1;
    for (std::size_t k = 0; k < d; ++k) {
      std::vector<std::size_t> perm(m);
      for (std::size_t i = 0; i < m; ++i) perm[i] = i;
      std::shuffle(perm.begin(), perm.end(), rng);
      for (std::size_t i = 0; i < m; ++i) {
        z0[i + 1][k] = lo + range * (static_cast<double>(perm[i]) + unit(rng)) / static_cast<double>(m);
      }
    }
  }

  SearchResult best;
  if (range == 0.0) {
    best.log_theta = z0[0];
    best.value = objective(z0[0]);
    best.found = std::isfinite(best.value);
    return best;
  }

  for (const auto& start : z0) {
    std::vector<double> z = start;
    double f = objective(z);
    double step = 0.25 * range;
    const double min_step = 1e-4 * range;
    for (int evals = 0; step > min_step && evals < 4000;) {
      std::vector<double> best_z;
      double best_f = f;
      for (std::size_t k = 0; k < d; ++k) {
        for (double dir : {+1.0, -1.0}) {
          std::vector<double> trial = z;
          trial[k] = std::clamp(z[k] + dir * step, lo, hi);
          if (trial[k] == z[k]) continue;
          const double ft = objective(trial);
          ++evals;
          if (ft > best_f) {
            best_f = ft;
            best_z = std::move(trial);
          }
        }
      }
      if (best_z.empty()) {
        step *= 0.5;
      } else {
        z = std::move(best_z);
        f = best_f;
      }
    }
    if (std::isfinite(f) && f > best.value) {
      best.value = f;
      best.log_theta = z;
      best.found = true;
    }
  }
  return best;
}

}  // namespace

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& x, std::span<const double> theta) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd r(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    r(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < x.cols(); ++k) {
        const double t = x(i, k) - x(j, k);
        s += theta[static_cast<std::size_t>(k)] * t * t;
      }
      r(i, j) = r(j, i) = std::exp(-s);
    }
  }
  return r;
}

std::optional<double> KrigingModel::log_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                                   std::span<const double> theta, double nugget) {
  auto f = gls(factor(x, theta, nugget), y);
  if (!f) return std::nullopt;
  return f->log_likelihood;
}

KrigingModel KrigingModel::with_theta(Eigen::MatrixXd x, Eigen::VectorXd y, std::vector<double> theta,
                                      double nugget) {
  if (x.rows() < 2) throw DataError("kriging needs at least 2 rows");
  if (x.rows() != y.size()) throw DataError("kriging: input and target row counts differ");
  if (theta.size() != static_cast<std::size_t>(x.cols())) throw DataError("kriging: theta dimension mismatch");
  for (double t : theta) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DataError("kriging: theta must be positive");
  }
  if (!(nugget >= 0.0)) throw DataError("kriging: nugget must be nonnegative");

  KrigingModel m;
  m.x_ = std::move(x);
  m.y_ = std::move(y);
  m.theta_ = std::move(theta);
  m.nugget_ = nugget;
  m.chol_ = factor(m.x_, m.theta_, nugget);
  auto f = gls(m.chol_, m.y_);
  if (!f) throw NumericalError("kriging: degenerate correlation (matrix not positive definite)");
  m.beta_ = f->beta;
  m.sigma2_ = f->sigma2;
  m.log_likelihood_ = f->log_likelihood;
  m.weights_ = m.chol_.solve(m.y_ - m.beta_ * Eigen::VectorXd::Ones(m.y_.size()));
  if (!m.weights_.allFinite()) throw NumericalError("kriging: non-finite weights");
  return m;
}

KrigingModel KrigingModel::fit(Eigen::MatrixXd x, Eigen::VectorXd y, const KrigingOptions& options) {
  if (x.rows() < 2) throw DataError("kriging needs at least 2 rows");
  if (x.rows() != y.size()) throw DataError("kriging: input and target row counts differ");
  if (!(options.theta_min > 0.0) || !(options.theta_max >= options.theta_min) ||
      !std::isfinite(options.theta_max)) {
    throw DataError("kriging: theta bounds must be positive with min <= max");
  }
  if (!(options.nugget >= 0.0)) throw DataError("kriging: nugget must be nonnegative");
  detail::canonical_order(x, y);
  for (Eigen::Index i = 1; i < x.rows(); ++i) {
    if (x.row(i) == x.row(i - 1)) throw DataError("kriging needs distinct input points");
  }

  std::vector<double> nuggets{options.nugget};
  for (double n = 1e-10; n <= 1e-6 * (1 + 1e-9); n *= 10.0) {
    if (n > options.nugget) nuggets.push_back(n);
  }
  for (double nugget : nuggets) {
    auto best = search_theta(x, y, options, nugget);
    if (!best.found) continue;
    std::vector<double> theta;
    for (double z : best.log_theta) theta.push_back(std::pow(10.0, z));
    return with_theta(std::move(x), std::move(y), std::move(theta), nugget);
  }
  throw NumericalError("kriging: degenerate correlation even at nugget 1e-6");
}

double KrigingModel::predict(std::span<const double> x) const {
  if (x.size() != dimension()) throw DataError("kriging: input dimension mismatch");
  double s = beta_;
  for (Eigen::Index i = 0; i < x_.rows(); ++i) {
    double q = 0.0;
    for (Eigen::Index k = 0; k < x_.cols(); ++k) {
      const double t = x[static_cast<std::size_t>(k)] - x_(i, k);
      q += theta_[static_cast<std::size_t>(k)] * t * t;
    }
    s += std::exp(-q) * weights_(i);
  }
  return s;
}

nlohmann::json KrigingModel::to_json() const {
  return {{"theta", theta_},
          {"nugget", nugget_},
          {"beta", beta_},
          {"process_variance", sigma2_},
          {"log_likelihood", log_likelihood_},
          {"rows", x_.rows()},
          {"dimension", x_.cols()},
          {"inputs", detail::to_vector(x_)},
          {"targets", std::vector<double>(y_.data(), y_.data() + y_.size())}};
}

KrigingModel KrigingModel::from_json(const nlohmann::json& j) {
  const auto n = j.at("rows").get<Eigen::Index>();
  const auto d = j.at("dimension").get<Eigen::Index>();
  const auto xs = j.at("inputs").get<std::vector<double>>();
  const auto ys = j.at("targets").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(xs.size()) != n * d || static_cast<Eigen::Index>(ys.size()) != n) {
    throw DataError("kriging json: array sizes do not match rows/dimension");
  }
  return with_theta(detail::from_vector(xs, n, d), Eigen::Map<const Eigen::VectorXd>(ys.data(), n),
                    j.at("theta").get<std::vector<double>>(), j.at("nugget").get<double>());
}

KrigingModel fit_krg(const Dataset& train, std::string_view objective, const KrigingOptions& options) {
  const auto k = train.index_of(objective);
  if (train.attributes()[k].role != Role::output) throw DataError("'" + std::string(objective) + "' is not an output");
  return KrigingModel::fit(train.matrix(Role::input), train.matrix(std::vector<std::size_t>{k}).col(0), options);
}

}  // namespace pumpfit
