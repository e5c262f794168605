#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace pumpfit::detail {

/// Rows of (x, y) in lexicographic order of the inputs (targets break ties),
/// so fits do not depend on the order samples arrive in.
inline void canonical_order(Eigen::MatrixXd& x, Eigen::VectorXd& y) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (x(a, j) != x(b, j)) return x(a, j) < x(b, j);
    }
    return y(a) < y(b);
  });
  Eigen::MatrixXd xs(x.rows(), x.cols());
  Eigen::VectorXd ys(y.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    xs.row(static_cast<Eigen::Index>(i)) = x.row(order[i]);
    ys(static_cast<Eigen::Index>(i)) = y(order[i]);
  }
  x = std::move(xs);
  y = std::move(ys);
}

inline std::vector<double> to_vector(const Eigen::MatrixXd& m) {
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) v.push_back(m(i, j));
  return v;
}

inline Eigen::MatrixXd from_vector(const std::vector<double>& v, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = v[static_cast<std::size_t>(i * cols + j)];
  return m;
}

}  // namespace pumpfit::detail
