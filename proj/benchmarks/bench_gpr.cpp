#include <benchmark/benchmark.h>

#include <cmath>

#include "romuq/gpr.hpp"
#include "romuq/rng.hpp"

using namespace romuq;

namespace
{

TrainedGp make_gp(Index n, Index d)
{
  Rng rng(5);
  Matrix x(d, n);
  Vector y(n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < d; ++i) x(i, j) = rng.uniform(-1.0, 1.0);
    y[j] = std::sin(3.0 * x(0, j)) + 0.2 * x.col(j).sum();
  }
  GpConfig config;
  config.num_starts = 1;
  config.max_iterations = 30;
  return TrainedGp::train(x, y, config, 11);
}

void bm_lml_gradient(benchmark::State &state)
{
  const Index n = state.range(0);
  Rng rng(3);
  Matrix x(5, n);
  Vector y(n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < 5; ++i) x(i, j) = rng.uniform(-1.0, 1.0);
    y[j] = x.col(j).squaredNorm();
  }
  KernelSpec spec;
  spec.kind = KernelKind::ArdRbf;
  spec.signal_std = 1.0;
  spec.length_scales = Vector::Ones(5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_marginal_likelihood(spec, 1e-2, x, y, 0.0));
  }
}
BENCHMARK(bm_lml_gradient)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void bm_gp_predict_mean(benchmark::State &state)
{
  const TrainedGp gp = make_gp(state.range(0), 10);
  Rng rng(7);
  Matrix xs(10, 50);
  for (Index j = 0; j < 50; ++j)
    for (Index i = 0; i < 10; ++i) xs(i, j) = rng.uniform(-1.0, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gp.predict_mean(xs));
  }
  state.SetLabel("50 query points");
}
BENCHMARK(bm_gp_predict_mean)->Arg(400)->Arg(2000);

}  // namespace
