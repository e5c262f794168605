#include "pumpfit/rbf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "detail/canonical.hpp"
#include "pumpfit/error.hpp"
#include "pumpfit/rng.hpp"

namespace pumpfit {

std::string_view to_string(WidthRule rule) {
  switch (rule) {
    case WidthRule::median_pairwise: return "median_pairwise";
    case WidthRule::mean_nearest_neighbor: return "mean_nearest_neighbor";
    case WidthRule::fixed: return "fixed";
  }
  return "?";
}

WidthRule width_rule_from_string(std::string_view s) {
  if (s == "median_pairwise" || s == "median") return WidthRule::median_pairwise;
  if (s == "mean_nearest_neighbor" || s == "nearest") return WidthRule::mean_nearest_neighbor;
  if (s == "fixed") return WidthRule::fixed;
  throw ConfigError("unknown rbf width rule '" + std::string(s) + "'");
}

RbfModel::RbfModel(Eigen::MatrixXd centers, Eigen::VectorXd weights, double sigma)
    : centers_(std::move(centers)), weights_(std::move(weights)), sigma_(sigma) {
  if (centers_.rows() < 1) throw DataError("rbf needs at least one center");
  if (weights_.size() != centers_.rows()) throw DataError("rbf weight count does not match centers");
  if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) throw DataError("rbf width must be positive");
}

double rbf_width(const Eigen::MatrixXd& c, WidthRule rule, double fixed_width) {
  if (rule == WidthRule::fixed) {
    if (!(fixed_width > 0.0)) throw ConfigError("fixed rbf width must be positive");
    return fixed_width;
  }
  const Eigen::Index n = c.rows();
  if (n < 2) return 1.0;
  if (rule == WidthRule::median_pairwise) {
    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) d.push_back((c.row(i) - c.row(j)).norm());
    std::sort(d.begin(), d.end());
    const std::size_t m = d.size();
    return m % 2 ? d[m / 2] : 0.5 * (d[m / 2 - 1] + d[m / 2]);
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) best = std::min(best, (c.row(i) - c.row(j)).norm());
    }
    sum += best;
  }
  return sum / static_cast<double>(n);
}

Eigen::MatrixXd kmeans_centers(const Eigen::MatrixXd& x, std::size_t k, std::uint64_t seed) {
  const Eigen::Index n = x.rows();
  const auto kk = static_cast<Eigen::Index>(k);
  if (k == 0 || kk > n) throw DataError("k-means needs 1 <= k <= rows");

  Rng rng(derive_seed(seed, "kmeans"));
  Eigen::MatrixXd c(kk, x.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  c.row(0) = x.row(first(rng));
  Eigen::VectorXd d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2(i) = (x.row(i) - c.row(0)).squaredNorm();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Eigen::Index m = 1; m < kk; ++m) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double target = unit(rng) * total, acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2(i);
        if (acc > target && d2(i) > 0.0) {
          pick = i;
          break;
        }
      }
    }
    c.row(m) = x.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) d2(i) = std::min(d2(i), (x.row(i) - c.row(m)).squaredNorm());
  }

  std::vector<Eigen::Index> assign(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < 300; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (Eigen::Index m = 0; m < kk; ++m) {
        const double d = (x.row(i) - c.row(m)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = m;
        }
      }
      if (assign[static_cast<std::size_t>(i)] != best) {
        assign[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }

    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(kk, x.cols());
    Eigen::VectorXi count = Eigen::VectorXi::Zero(kk);
    for (Eigen::Index i = 0; i < n; ++i) {
      sum.row(assign[static_cast<std::size_t>(i)]) += x.row(i);
      ++count(assign[static_cast<std::size_t>(i)]);
    }
    for (Eigen::Index m = 0; m < kk; ++m) {
      if (count(m) > 0) {
        c.row(m) = sum.row(m) / count(m);
        continue;
      }
      // Empty cluster: reseed at the sample farthest from its own center.
      Eigen::Index far = 0;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d = (x.row(i) - c.row(assign[static_cast<std::size_t>(i)])).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      c.row(m) = x.row(far);
      assign[static_cast<std::size_t>(far)] = m;
      changed = true;
    }
    if (!changed) break;
  }
  return c;
}

RbfModel RbfModel::fit(Eigen::MatrixXd x, Eigen::VectorXd y, const RbfOptions& options) {
  const auto n_rows = static_cast<std::size_t>(x.rows());
  if (x.rows() != y.size()) throw DataError("rbf: input and target row counts differ");
  if (options.n_centers < 1) throw DataError("rbf needs n_centers >= 1");
  if (options.n_centers > n_rows) {
    throw DataError("rbf n_centers (" + std::to_string(options.n_centers) + ") exceeds rows (" +
                    std::to_string(n_rows) + ")");
  }
  detail::canonical_order(x, y);

  Eigen::MatrixXd c = options.n_centers == n_rows ? x : kmeans_centers(x, options.n_centers, options.seed);
  for (Eigen::Index i = 0; i < c.rows(); ++i)
    for (Eigen::Index j = i + 1; j < c.rows(); ++j)
      if (c.row(i) == c.row(j)) throw DataError("rbf center selection produced duplicate centers");

  const double sigma = rbf_width(c, options.width_rule, options.fixed_width);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  Eigen::MatrixXd d(x.rows(), c.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index m = 0; m < c.rows(); ++m) d(i, m) = std::exp(-(x.row(i) - c.row(m)).squaredNorm() * inv);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d);
  RbfModel model;
  if (qr.rank() == c.rows()) {
    model = RbfModel(std::move(c), qr.solve(y), sigma);
  } else {
    constexpr double ridge = 1e-10;
    Eigen::MatrixXd aug(d.rows() + d.cols(), d.cols());
    aug << d, std::sqrt(ridge) * Eigen::MatrixXd::Identity(d.cols(), d.cols());
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(aug.rows());
    rhs.head(y.size()) = y;
    model = RbfModel(std::move(c), aug.colPivHouseholderQr().solve(rhs), sigma);
    model.ridged_ = true;
  }
  if (!model.weights_.allFinite()) throw NumericalError("rbf weights are not finite");
  return model;
}

double RbfModel::predict(std::span<const double> x) const {
  if (x.size() != dimension()) throw DataError("rbf: input dimension mismatch");
  const double inv = 1.0 / (2.0 * sigma_ * sigma_);
  double s = 0.0;
  for (Eigen::Index m = 0; m < centers_.rows(); ++m) {
    double r2 = 0.0;
    for (Eigen::Index j = 0; j < centers_.cols(); ++j) {
      const double t = x[static_cast<std::size_t>(j)] - centers_(m, j);
      r2 += t * t;
    }
    s += weights_(m) * std::exp(-r2 * inv);
  }
  return s;
}

nlohmann::json RbfModel::to_json() const {
  return {{"sigma", sigma_},
          {"ridged", ridged_},
          {"n_centers", centers_.rows()},
          {"dimension", centers_.cols()},
          {"centers", detail::to_vector(centers_)},
          {"weights", std::vector<double>(weights_.data(), weights_.data() + weights_.size())}};
}

RbfModel RbfModel::from_json(const nlohmann::json& j) {
  const auto n = j.at("n_centers").get<Eigen::Index>();
  const auto d = j.at("dimension").get<Eigen::Index>();
  const auto w = j.at("weights").get<std::vector<double>>();
  const auto c = j.at("centers").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(c.size()) != n * d) throw DataError("rbf json: center array has wrong size");
  RbfModel m(detail::from_vector(c, n, d),
             Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size())),
             j.at("sigma").get<double>());
  m.ridged_ = j.value("ridged", false);
  return m;
}

RbfModel fit_rbf(const Dataset& train, std::string_view objective, const RbfOptions& options) {
  const auto k = train.index_of(objective);
  if (train.attributes()[k].role != Role::output) throw DataError("'" + std::string(objective) + "' is not an output");
  return RbfModel::fit(train.matrix(Role::input), train.matrix(std::vector<std::size_t>{k}).col(0), options);
}

}  // namespace pumpfit
