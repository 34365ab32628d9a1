#include <benchmark/benchmark.h>

#include "romuq/fom.hpp"

using namespace romuq;

namespace
{

MaterialParams beam_material()
{
  Vector mu(9);
  mu << 8, 2, 2, 4, 4, 2, 50, 2, 0.004;
  return MaterialParams::from_vector(mu, 1000.0);
}

void bm_piola_stress(benchmark::State &state)
{
  const MaterialParams mat = beam_material();
  Matrix3 f = Matrix3::Identity();
  f(0, 2) = 0.03;
  f(2, 2) = 1.02;
  for (auto _ : state) {
    benchmark::DoNotOptimize(piola_stress(f, mat));
  }
}
BENCHMARK(bm_piola_stress);

void bm_assemble(benchmark::State &state)
{
  const int nx = static_cast<int>(state.range(0));
  const Mesh mesh = beam_mesh(Vector3(1e-2, 1e-3, 1e-3), nx, 2, 2);
  const FomOperator op(mesh, beam_material(), FomConfig{});
  const Vector u = Vector::Zero(mesh.num_dofs());
  for (auto _ : state) {
    benchmark::DoNotOptimize(op.assemble(u, u, u, 0.1));
  }
  state.SetLabel(std::to_string(mesh.num_dofs()) + " dofs");
}
BENCHMARK(bm_assemble)->Arg(4)->Arg(10);

void bm_solve_fom(benchmark::State &state)
{
  const Mesh mesh = beam_mesh(Vector3(1e-2, 1e-3, 1e-3), 10, 2, 2);
  FomConfig config;
  config.t_final = 0.05;  // 10 steps
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_fom(beam_material(), mesh, config));
  }
}
BENCHMARK(bm_solve_fom)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
