#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "pumpfit/design_space.hpp"
#include "pumpfit/error.hpp"
#include "pumpfit/kriging.hpp"
#include "pumpfit/predictor.hpp"
#include "pumpfit/rbf.hpp"
#include "pumpfit/rsf.hpp"
#include "reference.hpp"
#include "test_util.hpp"

using namespace pumpfit;
namespace ref = pumpfit::testing;

namespace {

Eigen::MatrixXd random_points(int n, int d, unsigned seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd x(n, d);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) x(i, k) = u(rng);
  return x;
}

std::vector<double> as_vec(const Eigen::MatrixXd& m, Eigen::Index i) {
  std::vector<double> v(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index k = 0; k < m.cols(); ++k) v[static_cast<std::size_t>(k)] = m(i, k);
  return v;
}

double target(const Eigen::MatrixXd& x, Eigen::Index i) {
  return 2.0 + std::sin(2.0 * x(i, 0)) + x(i, 1) * x(i, 2) + 0.3 * x(i, 0) * x(i, 0);
}

Eigen::VectorXd targets(const Eigen::MatrixXd& x) {
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) y(i) = target(x, i);
  return y;
}

Dataset lhs_dataset(std::size_t n, std::uint64_t seed, const std::function<double(double, double, double)>& f) {
  const DesignSpace box({{"x1", -2.0, 3.0, ""}, {"x2", 0.5, 4.0, ""}, {"x3", -1.0, 1.0, ""}});
  const std::vector<std::string> vars{"x1", "x2", "x3"};
  const auto in = lhs_sample(box, vars, n, seed);
  std::vector<AttributeSpec> attrs = in.attributes();
  attrs.push_back({"y", Role::output, ""});
  std::vector<double> v;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = in.row(i);
    v.insert(v.end(), r.begin(), r.end());
    v.push_back(f(r[0], r[1], r[2]));
  }
  return Dataset(attrs, v);
}

}  // namespace

// ---------------------------------------------------------------------------
// RSF

TEST(Rsf, BasisSizeAndOrder) {
  EXPECT_EQ(RsfModel::basis_size(3), 10u);
  EXPECT_EQ(RsfModel::basis_size(1), 3u);
  const std::vector<double> x{2, 3, 5};
  const auto b = RsfModel::basis(x);
  const Eigen::VectorXd expect = (Eigen::VectorXd(10) << 1, 2, 3, 5, 4, 9, 25, 6, 10, 15).finished();
  EXPECT_EQ(b, expect);
  const std::vector<std::string> names{"a", "b", "c"};
  EXPECT_EQ(RsfModel::basis_labels(names).back(), "b*c");
}

TEST(Rsf, RecoversGeneratingPolynomial) {
  const auto d = lhs_dataset(20, 4, [](double a, double b, double c) { return 2 + 3 * a - b * b + 0.5 * a * c; });
  const auto m = fit_rsf(d, "y");
  Eigen::VectorXd expect = Eigen::VectorXd::Zero(10);
  expect(0) = 2;
  expect(1) = 3;
  expect(5) = -1;
  expect(8) = 0.5;
  EXPECT_LT((m.coefficients() - expect).cwiseAbs().maxCoeff(), 1e-8);
  const std::vector<double> held{0.7, 2.2, -0.4};
  EXPECT_NEAR(m.predict(held), 2 + 3 * 0.7 - 2.2 * 2.2 + 0.5 * 0.7 * -0.4, 1e-8);
}

TEST(Rsf, ConstantTarget) {
  const auto d = lhs_dataset(15, 1, [](double, double, double) { return 7.0; });
  const auto c = fit_rsf(d, "y").coefficients();
  EXPECT_NEAR(c(0), 7.0, 1e-10);
  EXPECT_LT(c.tail(9).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Rsf, TooFewRows) {
  const auto d = lhs_dataset(9, 1, [](double a, double, double) { return a; });
  EXPECT_THROW(fit_rsf(d, "y"), DataError);
}

TEST(Rsf, RankDeficiencyNamesColumns) {
  // x3 constant: its linear and square columns duplicate the intercept.
  Eigen::MatrixXd x = random_points(20, 3, 3);
  x.col(2).setConstant(1.0);
  try {
    RsfModel::fit(x, targets(x));
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("rank deficient"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("x3"), std::string::npos);
  }
}

TEST(Rsf, PredictionIsLinearInCoefficients) {
  Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(10, -1.0, 2.0);
  const std::vector<double> x{0.3, -0.2, 0.9};
  const RsfModel a(3, c), b(3, 2.5 * c);
  EXPECT_NEAR(b.predict(x), 2.5 * a.predict(x), 1e-14);
  Eigen::VectorXd unit = Eigen::VectorXd::Zero(10);
  unit(0) = 1.0;
  EXPECT_EQ(RsfModel(3, unit).predict(x), 1.0);
  EXPECT_THROW(a.predict(std::vector<double>{1.0}), DataError);
}

TEST(Rsf, JsonRoundTrip) {
  const Eigen::MatrixXd x = random_points(30, 3, 8);
  const auto m = RsfModel::fit(x, targets(x));
  const auto back = RsfModel::from_json(m.to_json());
  EXPECT_EQ(back.coefficients(), m.coefficients());
}

// ---------------------------------------------------------------------------
// RBF

TEST(Rbf, SingleCenterWeightEqualsTarget) {
  Eigen::MatrixXd x(1, 2);
  x << 0.3, -0.1;
  const auto m = RbfModel::fit(x, Eigen::VectorXd::Constant(1, 4.5), {1, WidthRule::median_pairwise, 1.0, 0});
  EXPECT_DOUBLE_EQ(m.weights()(0), 4.5);
  EXPECT_EQ(m.sigma(), 1.0);
  EXPECT_DOUBLE_EQ(m.predict(std::vector<double>{0.3, -0.1}), 4.5);
}

TEST(Rbf, LoneCenterAndFarField) {
  Eigen::MatrixXd c(1, 2);
  c << 0.0, 0.0;
  const RbfModel m(c, Eigen::VectorXd::Constant(1, 3.0), 0.5);
  EXPECT_EQ(m.predict(std::vector<double>{0.0, 0.0}), 3.0);
  EXPECT_LT(std::abs(m.predict(std::vector<double>{40.0, 40.0})), 1e-300);
}

TEST(Rbf, MatchesDirectSummation) {
  for (unsigned seed = 0; seed < 5; ++seed) {
    const Eigen::MatrixXd x = random_points(40, 3, seed);
    const auto m = RbfModel::fit(x, targets(x), {15, WidthRule::median_pairwise, 1.0, seed});
    const Eigen::MatrixXd probe = random_points(20, 3, seed + 100, -1.5, 1.5);
    for (Eigen::Index i = 0; i < probe.rows(); ++i) {
      const auto p = as_vec(probe, i);
      EXPECT_NEAR(m.predict(p), ref::ref_rbf_sum(m.centers(), m.weights(), m.sigma(), p), 1e-12);
    }
  }
}

TEST(Rbf, AllCentersInterpolate) {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const Eigen::MatrixXd x = random_points(30, 3, seed);
    const Eigen::VectorXd y = targets(x);
    const auto m = RbfModel::fit(x, y, {30, WidthRule::median_pairwise, 1.0, 0});
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      EXPECT_NEAR(m.predict(as_vec(x, i)), y(i), 1e-6 * std::abs(y(i)));
    }
  }
}

TEST(Rbf, PaperCenterCountFinite) {
  const Eigen::MatrixXd x = random_points(60, 3, 2);
  const Eigen::VectorXd y = targets(x);
  const auto m = RbfModel::fit(x, y, {30, WidthRule::median_pairwise, 1.0, 5});
  EXPECT_EQ(m.n_centers(), 30u);
  double sse = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) sse += std::pow(m.predict(as_vec(x, i)) - y(i), 2);
  EXPECT_TRUE(std::isfinite(std::sqrt(sse / 60.0)));
}

TEST(Rbf, WidthRules) {
  Eigen::MatrixXd c(3, 1);
  c << 0.0, 1.0, 3.0;
  // Pairwise distances {1, 3, 2}; nearest-neighbour distances {1, 1, 2}.
  EXPECT_DOUBLE_EQ(rbf_width(c, WidthRule::median_pairwise), 2.0);
  EXPECT_DOUBLE_EQ(rbf_width(c, WidthRule::mean_nearest_neighbor), 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(rbf_width(c, WidthRule::fixed, 0.7), 0.7);
  EXPECT_EQ(rbf_width(c.topRows(1), WidthRule::median_pairwise), 1.0);
}

TEST(Rbf, Errors) {
  const Eigen::MatrixXd x = random_points(5, 2, 0);
  EXPECT_THROW(RbfModel::fit(x, Eigen::VectorXd::Zero(5), {6, WidthRule::median_pairwise, 1.0, 0}), DataError);
  EXPECT_THROW(RbfModel::fit(x, Eigen::VectorXd::Zero(5), {0, WidthRule::median_pairwise, 1.0, 0}), DataError);
  Eigen::MatrixXd dup(2, 1);
  dup << 1.0, 1.0;
  EXPECT_THROW(RbfModel::fit(dup, Eigen::VectorXd::Zero(2), {2, WidthRule::median_pairwise, 1.0, 0}), DataError);
}

TEST(KMeans, DeterministicAndSeparatesClusters) {
  Eigen::MatrixXd x(6, 1);
  x << 0.0, 0.1, 0.2, 10.0, 10.1, 10.2;
  const auto c = kmeans_centers(x, 2, 3);
  EXPECT_EQ(c, kmeans_centers(x, 2, 3));
  std::vector<double> v{c(0, 0), c(1, 0)};
  std::sort(v.begin(), v.end());
  EXPECT_NEAR(v[0], 0.1, 1e-12);
  EXPECT_NEAR(v[1], 10.1, 1e-12);
}

// ---------------------------------------------------------------------------
// Kriging

TEST(Kriging, HandTwoPointExample) {
  Eigen::MatrixXd x(2, 1);
  x << 0.0, 1.0;
  const Eigen::VectorXd y = (Eigen::VectorXd(2) << 0.0, 1.0).finished();
  const auto m = KrigingModel::with_theta(x, y, {1.0}, 0.0);
  // R = [[1, e⁻¹], [e⁻¹, 1]]; symmetry gives β̂ = 0.5 and
  // R⁻¹(y − β̂) = (−0.5, 0.5)/(1 − e⁻¹).
  const double e1 = std::exp(-1.0);
  EXPECT_NEAR(m.beta(), 0.5, 1e-12);
  EXPECT_NEAR(m.predict(std::vector<double>{0.5}), 0.5, 1e-10);
  const double at_quarter = 0.5 + 0.5 * (std::exp(-0.5625) - std::exp(-0.0625)) / (1.0 - e1);
  EXPECT_NEAR(m.predict(std::vector<double>{0.25}), at_quarter, 1e-10);
}

TEST(Kriging, FarFieldTendsToGlsMean) {
  Eigen::MatrixXd x(4, 1);
  x << 0.0, 0.3, 0.7, 1.0;
  const Eigen::VectorXd y = (Eigen::VectorXd(4) << 1.0, 3.0, 2.0, 5.0).finished();
  const auto m = KrigingModel::with_theta(x, y, {2.0}, 1e-10);
  const double beta = ref::ref_kriging_mean(x, y, {2.0}, 1e-10);
  EXPECT_NEAR(m.beta(), beta, 1e-9);
  EXPECT_NEAR(m.predict(std::vector<double>{50.0}), beta, 1e-9);
}

TEST(Kriging, SmallThetaFlattensTowardsMean) {
  // θ → 0⁺ makes every correlation → 1; away from the data the prediction
  // approaches β̂, which itself approaches the GLS mean for that θ.
  Eigen::MatrixXd x(3, 1);
  x << 0.0, 0.5, 1.0;
  const Eigen::VectorXd y = (Eigen::VectorXd(3) << 0.0, 2.0, 1.0).finished();
  for (double theta : {1e-1, 1e-2}) {
    const auto m = KrigingModel::with_theta(x, y, {theta}, 1e-8);
    const double b = ref::ref_kriging_mean(x, y, {theta}, 1e-8);
    EXPECT_NEAR(m.beta(), b, 1e-6);
    const double far = 4.0 / std::sqrt(theta);
    EXPECT_NEAR(m.predict(std::vector<double>{far}), b, 1e-3 * std::abs(b) + 1e-3);
  }
}

TEST(Kriging, MatchesBruteForce) {
  for (unsigned seed = 0; seed < 5; ++seed) {
    const Eigen::MatrixXd x = random_points(25, 3, seed);
    const Eigen::VectorXd y = targets(x);
    const std::vector<double> theta{0.8, 2.5, 1.3};
    const auto m = KrigingModel::with_theta(x, y, theta, 1e-8);
    const Eigen::MatrixXd probe = random_points(10, 3, seed + 50);
    for (Eigen::Index i = 0; i < probe.rows(); ++i) {
      const auto p = as_vec(probe, i);
      EXPECT_NEAR(m.predict(p), ref::ref_kriging_predict(x, y, theta, 1e-8, p), 1e-12);
    }
  }
}

TEST(Kriging, ZeroNuggetInterpolates) {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const Eigen::MatrixXd x = random_points(30, 3, seed);
    const Eigen::VectorXd y = targets(x);
    KrigingOptions opt;
    opt.nugget = 0.0;
    opt.seed = seed;
    const auto m = KrigingModel::fit(x, y, opt);
    for (Eigen::Index i = 0; i < x.rows(); ++i) EXPECT_NEAR(m.predict(as_vec(x, i)), y(i), 1e-6 * std::abs(y(i)));
  }
}

TEST(Kriging, ThetaWithinBoundsAndLikelihoodIsMaximal) {
  const Eigen::MatrixXd x = random_points(20, 2, 4);
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) y(i) = std::sin(3.0 * x(i, 0)) + x(i, 1) * x(i, 1);
  KrigingOptions opt;
  const auto m = KrigingModel::fit(x, y, opt);
  for (double t : m.theta()) {
    EXPECT_GE(t, opt.theta_min * (1 - 1e-12));
    EXPECT_LE(t, opt.theta_max * (1 + 1e-12));
  }
  // No point of a coarse grid beats the search result.
  for (double a = -2; a <= 2; a += 0.5)
    for (double b = -2; b <= 2; b += 0.5) {
      const std::vector<double> th{std::pow(10.0, a), std::pow(10.0, b)};
      const auto ll = KrigingModel::log_likelihood(x, y, th, m.nugget());
      if (ll) {
        EXPECT_LE(*ll, m.log_likelihood() + 1e-6);
      }
    }
}

TEST(Kriging, CorrelationMatrix) {
  Eigen::MatrixXd x(2, 2);
  x << 0, 0, 1, 2;
  const std::vector<double> theta{0.5, 0.25};
  const auto r = correlation_matrix(x, theta);
  EXPECT_EQ(r(0, 0), 1.0);
  EXPECT_NEAR(r(0, 1), std::exp(-(0.5 * 1 + 0.25 * 4)), 1e-15);
  EXPECT_EQ(r(0, 1), r(1, 0));
}

TEST(Kriging, Errors) {
  Eigen::MatrixXd dup(3, 1);
  dup << 0.0, 1.0, 1.0;
  EXPECT_THROW(KrigingModel::fit(dup, Eigen::VectorXd::Zero(3)), DataError);
  EXPECT_THROW(KrigingModel::fit(dup.topRows(1), Eigen::VectorXd::Zero(1)), DataError);
  KrigingOptions bad;
  bad.theta_min = 0.0;
  EXPECT_THROW(KrigingModel::fit(random_points(5, 1, 0), Eigen::VectorXd::Zero(5), bad), DataError);
  const auto m = KrigingModel::with_theta(random_points(5, 2, 0), Eigen::VectorXd::Ones(5), {1, 1}, 1e-8);
  EXPECT_THROW(m.predict(std::vector<double>{1.0}), DataError);
}

TEST(Kriging, JsonRoundTripPredictsIdentically) {
  const Eigen::MatrixXd x = random_points(15, 3, 6);
  const auto m = KrigingModel::fit(x, targets(x));
  const auto back = KrigingModel::from_json(m.to_json());
  const std::vector<double> p{0.1, 0.2, -0.3};
  EXPECT_EQ(back.predict(p), m.predict(p));
  EXPECT_EQ(back.theta(), m.theta());
}

// ---------------------------------------------------------------------------
// Shared predictor contract

class SurrogateKinds : public ::testing::TestWithParam<ModelKind> {};

TEST_P(SurrogateKinds, DeterministicAndSerializable) {
  const auto d = ref::random_dataset(40, 3, 2, 12, 0.0, 10.0);
  const auto a = fit_surrogate(GetParam(), d), b = fit_surrogate(GetParam(), d);
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
  const auto back = predictor_from_json(a.to_json());
  EXPECT_EQ(back->kind(), GetParam());
  EXPECT_EQ(back->to_json().dump(), a.to_json().dump());
  for (std::size_t i = 0; i < 5; ++i) {
    const auto r = d.row(i);
    const std::vector<double> x(r.begin(), r.begin() + 3);
    EXPECT_EQ(back->predict(x), a.predict(x));
  }
}

TEST_P(SurrogateKinds, RowPermutationInvariance) {
  const auto d = ref::random_dataset(40, 3, 1, 21, 0.0, 10.0);
  std::vector<std::size_t> perm(d.n_rows());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(3));
  const auto a = fit_surrogate(GetParam(), d);
  const auto b = fit_surrogate(GetParam(), d.select_rows(perm));
  const auto probe = ref::random_dataset(10, 3, 0, 99, 0.0, 10.0);
  for (std::size_t i = 0; i < probe.n_rows(); ++i) {
    const auto p = probe.row(i);
    const double ya = a.predict(p)[0], yb = b.predict(p)[0];
    EXPECT_NEAR(ya, yb, 1e-9 * std::max(1.0, std::abs(ya)));
  }
}

TEST_P(SurrogateKinds, BatchMatchesRows) {
  const auto d = ref::random_dataset(40, 3, 2, 5, 0.0, 10.0);
  const auto m = fit_surrogate(GetParam(), d);
  const Eigen::MatrixXd x = d.matrix(Role::input);
  const auto batch = m.predict(x);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto r = m.predict(as_vec(x, i));
    for (Eigen::Index o = 0; o < 2; ++o) EXPECT_EQ(batch(i, o), r[static_cast<std::size_t>(o)]);
  }
  const auto out = m.predict(d);
  EXPECT_EQ(out.names(Role::output), (std::vector<std::string>{"y0", "y1"}));
  EXPECT_EQ(out.at(3, 4), batch(3, 1));
}

INSTANTIATE_TEST_SUITE_P(All, SurrogateKinds, ::testing::Values(ModelKind::rsf, ModelKind::rbf, ModelKind::krg),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(SurrogatePredictor, NormalizesInputsOverTrainingRows) {
  const auto d = ref::random_dataset(40, 3, 1, 2, 100.0, 200.0);
  const auto m = fit_surrogate(ModelKind::rsf, d);
  const auto& n = m.input_normalizer();
  const auto x = d.matrix(Role::input);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(n.min()[k], x.col(k).minCoeff());
    EXPECT_EQ(n.max()[k], x.col(k).maxCoeff());
  }
  EXPECT_THROW(fit_surrogate(ModelKind::nn, d), Error);
}
