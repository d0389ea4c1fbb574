#include <benchmark/benchmark.h>

#include "feekit/estimators.hpp"
#include "feekit/ssm.hpp"
#include "feekit/synth.hpp"
#include "feekit/tsdiag.hpp"

namespace {

feekit::DailyPanel makePanel(Eigen::Index length, std::uint64_t seed) {
  feekit::DgpSpec spec;
  spec.length = length;
  spec.seed = seed;
  return feekit::generateDgp(spec);
}

void BM_OlsHac(benchmark::State& state) {
  auto panel = makePanel(state.range(0), 7);
  Eigen::VectorXd y = panel.col("log_basefee");
  Eigen::MatrixXd X(y.size(), 2);
  X.col(0) = panel.col("a_clean");
  X.col(1) = panel.col("d_star");
  for (auto _ : state) {
    auto fit = feekit::olsHac(y, X, {"a", "d_star"}, 7);
    benchmark::DoNotOptimize(fit.coef);
  }
}
BENCHMARK(BM_OlsHac)->Arg(500)->Arg(1200);

void BM_EcmFit(benchmark::State& state) {
  auto panel = makePanel(state.range(0), 11);
  Eigen::VectorXd y = panel.col("log_basefee");
  Eigen::VectorXd a = panel.col("a_clean");
  Eigen::MatrixXd controls(y.size(), 1);
  controls.col(0) = panel.col("d_star");
  feekit::EcmOptions opt;
  opt.gate_warn_only = true;
  for (auto _ : state) {
    auto fit = feekit::ecmFit(y, a, controls, {"d_star"}, opt);
    benchmark::DoNotOptimize(fit.psi);
  }
}
BENCHMARK(BM_EcmFit)->Arg(1200);

void BM_UnitRootSuite(benchmark::State& state) {
  auto panel = makePanel(state.range(0), 13);
  Eigen::VectorXd y = panel.col("log_basefee");
  for (auto _ : state) {
    auto suite = feekit::unitRootSuite(y, feekit::Deterministic::kTrend);
    benchmark::DoNotOptimize(suite.adf.statistic);
  }
}
BENCHMARK(BM_UnitRootSuite)->Arg(500)->Arg(1200);

void BM_KalmanFilterFixedParams(benchmark::State& state) {
  auto panel = makePanel(state.range(0), 17);
  Eigen::VectorXd y = panel.col("log_basefee");
  Eigen::MatrixXd X(y.size(), 2);
  X.col(0) = panel.col("a_clean");
  X.col(1) = panel.col("d_star");
  feekit::StateSpaceOptions opt;
  opt.fixed_logvar = Eigen::Vector3d(-3.0, -6.0, -10.0);
  for (auto _ : state) {
    auto fit = feekit::fitStateSpace(y, X, {"a_clean", "d_star"}, opt);
    benchmark::DoNotOptimize(fit.loglik);
  }
}
BENCHMARK(BM_KalmanFilterFixedParams)->Arg(300);

}  // namespace

BENCHMARK_MAIN();
