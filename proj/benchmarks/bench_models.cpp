// Fit and evaluation costs at the default study size (60 rows, 3 inputs).

#include <benchmark/benchmark.h>

#include "pumpfit/augmentation.hpp"
#include "pumpfit/kriging.hpp"
#include "pumpfit/neural_net.hpp"
#include "pumpfit/pipeline.hpp"
#include "pumpfit/rbf.hpp"
#include "pumpfit/rsf.hpp"

using namespace pumpfit;

namespace {

const Dataset& study_rows() {
  static const Dataset d = [] {
    RunConfig cfg;
    return evaluate_stage(cfg, sample_stage(cfg, "train"), "train");
  }();
  return d;
}

void BM_RsfFit(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(fit_rsf(study_rows(), "head"));
}
BENCHMARK(BM_RsfFit);

void BM_RbfFit(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(fit_rbf(study_rows(), "head"));
}
BENCHMARK(BM_RbfFit);

void BM_KrigingFit(benchmark::State& s) {
  KrigingOptions o;
  o.starts = static_cast<std::size_t>(s.range(0));
  for (auto _ : s) benchmark::DoNotOptimize(fit_krg(study_rows(), "head", o));
}
BENCHMARK(BM_KrigingFit)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_KrigingPredict(benchmark::State& s) {
  const auto m = fit_krg(study_rows(), "head");
  const Eigen::MatrixXd in = study_rows().matrix(Role::input);
  const std::vector<double> x{in(7, 0), in(7, 1), in(7, 2)};
  for (auto _ : s) benchmark::DoNotOptimize(m.predict(x));
}
BENCHMARK(BM_KrigingPredict);

void BM_NetworkEpochs(benchmark::State& s) {
  const MlpTopology t{3, static_cast<std::size_t>(s.range(0)), 2, Activation::tanh};
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(48, 3), y = Eigen::MatrixXd::Random(48, 2);
  TrainConfig c;
  c.max_epochs = 10;
  c.min_gradient = 0.0;
  for (auto _ : s) benchmark::DoNotOptimize(train_bayesian_regularization(t, x, y, c));
}
BENCHMARK(BM_NetworkEpochs)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_Augment(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(augment(study_rows()));
}
BENCHMARK(BM_Augment);

}  // namespace

BENCHMARK_MAIN();
