#include "pumpfit/rsf.hpp"

#include <algorithm>
#include <cmath>

#include "pumpfit/error.hpp"

namespace pumpfit {

RsfModel::RsfModel(std::size_t dimension, Eigen::VectorXd coefficients)
    : dimension_(dimension), coefficients_(std::move(coefficients)) {
  if (dimension_ == 0) throw DataError("rsf dimension must be positive");
  if (static_cast<std::size_t>(coefficients_.size()) != basis_size(dimension_)) {
    throw DataError("rsf coefficient count does not match the quadratic basis");
  }
  if (!coefficients_.allFinite()) throw NumericalError("rsf coefficients are not finite");
}

Eigen::VectorXd RsfModel::basis(std::span<const double> x) {
  const std::size_t d = x.size();
  Eigen::VectorXd b(static_cast<Eigen::Index>(basis_size(d)));
  Eigen::Index k = 0;
  b(k++) = 1.0;
  for (std::size_t i = 0; i < d; ++i) b(k++) = x[i];
  for (std::size_t i = 0; i < d; ++i) b(k++) = x[i] * x[i];
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) b(k++) = x[i] * x[j];
  return b;
}

std::vector<std::string> RsfModel::basis_labels(std::span<const std::string> names) {
  std::vector<std::string> out{"1"};
  for (const auto& n : names) out.push_back(n);
  for (const auto& n : names) out.push_back(n + "^2");
  for (std::size_t i = 0; i < names.size(); ++i)
    for (std::size_t j = i + 1; j < names.size(); ++j) out.push_back(names[i] + "*" + names[j]);
  return out;
}

RsfModel RsfModel::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const auto d = static_cast<std::size_t>(x.cols());
  const auto p = basis_size(d);
  if (x.rows() != y.size()) throw DataError("rsf: input and target row counts differ");
  if (static_cast<std::size_t>(x.rows()) < p) {
    throw DataError("rsf needs at least " + std::to_string(p) + " rows for " + std::to_string(d) +
                    " inputs, got " + std::to_string(x.rows()));
  }

  Eigen::MatrixXd design(x.rows(), static_cast<Eigen::Index>(p));
  std::vector<double> row(d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < d; ++j) row[j] = x(i, static_cast<Eigen::Index>(j));
    design.row(i) = basis(row).transpose();
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (static_cast<std::size_t>(qr.rank()) < p) {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < d; ++j) names.push_back("x" + std::to_string(j + 1));
    const auto labels = basis_labels(names);
    std::string deficient;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < static_cast<Eigen::Index>(p); ++k) {
      if (!deficient.empty()) deficient += ", ";
      deficient += labels[static_cast<std::size_t>(perm(k))];
    }
    throw NumericalError("rsf design matrix is rank deficient (rank " + std::to_string(qr.rank()) +
                         " of " + std::to_string(p) + "); dependent basis columns: " + deficient);
  }
  return RsfModel(d, qr.solve(y));
}

double RsfModel::predict(std::span<const double> x) const {
  if (x.size() != dimension_) throw DataError("rsf: input dimension mismatch");
  return basis(x).dot(coefficients_);
}

nlohmann::json RsfModel::to_json() const {
  return {{"dimension", dimension_},
          {"coefficients", std::vector<double>(coefficients_.data(), coefficients_.data() + coefficients_.size())}};
}

RsfModel RsfModel::from_json(const nlohmann::json& j) {
  const auto c = j.at("coefficients").get<std::vector<double>>();
  return RsfModel(j.at("dimension").get<std::size_t>(),
                  Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size())));
}

RsfModel fit_rsf(const Dataset& train, std::string_view objective) {
  const auto k = train.index_of(objective);
  if (train.attributes()[k].role != Role::output) throw DataError("'" + std::string(objective) + "' is not an output");
  return RsfModel::fit(train.matrix(Role::input), train.matrix(std::vector<std::size_t>{k}).col(0));
}

}  // namespace pumpfit
