#include <benchmark/benchmark.h>

#include <cmath>

#include "romuq/rng.hpp"
#include "romuq/rom.hpp"

using namespace romuq;

namespace
{

struct Setup
{
  GlobalRom global;
  TdRom td;
  Vector times;
  Vector mu;
};

// Mimics the beam study shape: 5 coefficients on a 10-step x 40-sample grid.
Setup make_setup()
{
  Rng rng(1);
  const Index nh = 297, dim = 5, nt = 10, ns = 40, p = 9;
  Matrix raw(nh, dim);
  for (Index i = 0; i < nh; ++i)
    for (Index j = 0; j < dim; ++j) raw(i, j) = rng.normal();
  ReducedBasis basis;
  basis.modes = Matrix(Eigen::HouseholderQR<Matrix>(raw).householderQ()).leftCols(dim);
  basis.singular_values = Vector::Ones(dim);

  Setup s;
  s.times = Vector::LinSpaced(nt, 0.025, 0.25);
  Matrix params(ns, p);
  for (Index m = 0; m < ns; ++m)
    for (Index j = 0; j < p; ++j) params(m, j) = rng.uniform(0.0, 1.0);
  CoefficientTable table;
  table.num_steps = nt;
  table.num_samples = ns;
  table.coefficients.resize(dim, nt * ns);
  for (Index m = 0; m < ns; ++m)
    for (Index n = 0; n < nt; ++n)
      for (Index ell = 0; ell < dim; ++ell)
        table.coefficients(ell, table.column(m, n)) =
            std::sin((ell + 1.0) * s.times[n]) * (0.5 + params(m, ell % p));

  GpConfig config;
  config.num_starts = 1;
  config.max_iterations = 40;
  s.global = train_global_rom(basis, table, s.times, params, config, 3);
  s.td = train_td_rom(basis, table, s.times, params, 1e-4, config, 3);
  s.mu = params.row(7).transpose();
  return s;
}

void bm_global_online(benchmark::State &state)
{
  static const Setup setup = make_setup();
  Vector full_times = Vector::LinSpaced(50, 0.005, 0.25);
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict_global_trajectory(setup.global, full_times, setup.mu));
  }
  state.SetLabel("50-step trajectory");
}
BENCHMARK(bm_global_online)->Unit(benchmark::kMicrosecond);

void bm_td_online(benchmark::State &state)
{
  static const Setup setup = make_setup();
  Vector full_times = Vector::LinSpaced(50, 0.005, 0.25);
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict_td_trajectory(setup.td, full_times, setup.mu));
  }
  state.SetLabel("50-step trajectory");
}
BENCHMARK(bm_td_online)->Unit(benchmark::kMicrosecond);

}  // namespace
