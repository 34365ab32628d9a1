#include <doctest.h>

#include <cmath>

#include "romuq/error.hpp"
#include "romuq/fom.hpp"
#include "romuq/rng.hpp"
#include "support/dense_fom_reference.hpp"

using namespace romuq;

namespace
{

MaterialParams beam_material()
{
  Vector mu(9);
  mu << 8, 2, 2, 4, 4, 2, 50, 2, 0.004;
  return MaterialParams::from_vector(mu, 1000.0);
}

Mesh small_mesh() { return beam_mesh(Vector3(1e-2, 1e-3, 1e-3), 4, 1, 1); }

Mesh one_element() { return beam_mesh(Vector3(1e-3, 1e-3, 1e-3), 1, 1, 1); }

FomConfig short_config(int steps)
{
  FomConfig config;
  config.dt = 0.005;
  config.t_final = 0.005 * steps;
  return config;
}

}  // namespace

TEST_CASE("undeformed equilibrium: zero state, zero load, zero residual")
{
  auto mat = beam_material();
  mat.pressure_slope = 0.0;
  const Mesh mesh = one_element();
  const FomConfig config = short_config(1);
  const Vector zero = Vector::Zero(mesh.num_dofs());
  const auto sys = assemble_system(zero, zero, zero, mat, mesh, config, config.dt);
  CHECK(sys.residual.norm() == 0.0);
}

TEST_CASE("load contribution is linear in the pressure slope at fixed u = 0")
{
  const Mesh mesh = one_element();
  const FomConfig config = short_config(1);
  auto mat1 = beam_material();
  auto mat2 = beam_material();
  mat2.pressure_slope = 2.0 * mat1.pressure_slope;

  const FomOperator op1(mesh, mat1, config);
  const FomOperator op2(mesh, mat2, config);
  const Vector zero = Vector::Zero(mesh.num_dofs());
  const Vector f1 = op1.external_load(zero, config.dt);
  const Vector f2 = op2.external_load(zero, config.dt);
  CHECK((f2 - 2.0 * f1).norm() <= 1e-14 * f1.norm());
  CHECK(f1.norm() > 0.0);
}

TEST_CASE("tangent matches finite differences of the residual on one element")
{
  const Mesh mesh = one_element();
  const FomConfig config = short_config(1);
  auto mat = beam_material();
  mat.pressure_slope = 0.4;  // exercise the follower-load tangent too
  const FomOperator op(mesh, mat, config);

  const Index n = mesh.num_dofs();
  Vector u = Vector::Zero(n);
  Rng rng(17);
  for (int d : mesh.dirichlet_dofs()) u[d] = 0.0;
  std::vector<char> fixed(static_cast<std::size_t>(n), 0);
  for (int d : mesh.dirichlet_dofs()) fixed[static_cast<std::size_t>(d)] = 1;
  for (Index i = 0; i < n; ++i)
    if (!fixed[static_cast<std::size_t>(i)]) u[i] = 2e-5 * rng.uniform(-1.0, 1.0);

  const Vector u_prev = Vector::Zero(n), u_prev2 = Vector::Zero(n);
  const auto sys = op.assemble(u, u_prev, u_prev2, config.dt);
  const Matrix tangent = Matrix(sys.tangent);

  const double h = 1e-9;
  double num = 0.0, den = 0.0;
  for (Index j = 0; j < n; ++j) {
    if (fixed[static_cast<std::size_t>(j)]) continue;
    Vector up = u, um = u;
    up[j] += h;
    um[j] -= h;
    const Vector rp = op.assemble(up, u_prev, u_prev2, config.dt).residual;
    const Vector rm = op.assemble(um, u_prev, u_prev2, config.dt).residual;
    const Vector fd = (rp - rm) / (2.0 * h);
    for (Index i = 0; i < n; ++i) {
      if (fixed[static_cast<std::size_t>(i)]) continue;
      const double diff = tangent(i, j) - fd[i];
      num += diff * diff;
      den += fd[i] * fd[i];
    }
  }
  CHECK(std::sqrt(num) <= 1e-5 * std::sqrt(den));
}

TEST_CASE("zero load gives the identically zero trajectory")
{
  auto mat = beam_material();
  mat.pressure_slope = 0.0;
  const Mesh mesh = small_mesh();
  const FomConfig config = short_config(5);
  const Trajectory traj = solve_fom(mat, mesh, config);
  CHECK(traj.dofs_per_step.norm() == 0.0);
  CHECK(traj.num_steps() == 5);
}

TEST_CASE("Dirichlet rows vanish in every column under load")
{
  const Mesh mesh = small_mesh();
  const FomConfig config = short_config(4);
  const Trajectory traj = solve_fom(beam_material(), mesh, config);
  CHECK(traj.dofs_per_step.norm() > 0.0);
  for (int d : mesh.dirichlet_dofs())
    CHECK(traj.dofs_per_step.row(d).norm() == 0.0);
}

TEST_CASE("trajectory is deterministic")
{
  const Mesh mesh = small_mesh();
  const FomConfig config = short_config(3);
  const Trajectory a = solve_fom(beam_material(), mesh, config);
  const Trajectory b = solve_fom(beam_material(), mesh, config);
  CHECK(a.dofs_per_step == b.dofs_per_step);
}

TEST_CASE("tiny load matches the independent dense reference solver")
{
  auto mat = beam_material();
  mat.pressure_slope = 0.002 * 1e-3;  // 1e-3 of the lower Table-2 bound
  const Mesh mesh = small_mesh();
  FomConfig config = short_config(4);
  config.newton_tol = 1e-15;
  config.newton_max_iter = 60;

  const Trajectory ours = solve_fom(mat, mesh, config);
  const Matrix reference = dense_ref::solve(mesh, mat, config);

  // Tip deflection: z-displacement of the far-end bottom corner, final step.
  Probe probe;
  probe.point = Vector3(1e-2, 0.0, 0.0);
  probe.component = 2;
  probe.step = config.num_steps();
  const QoiValue tip = extract_qoi(ours, mesh, probe);
  const double ref_tip = reference(3 * tip.vertex + 2, config.num_steps() - 1);
  REQUIRE(std::abs(ref_tip) > 0.0);
  CHECK(std::abs(tip.value - ref_tip) <= 1e-8 * std::abs(ref_tip));

  // And the whole history agrees.
  CHECK((ours.dofs_per_step - reference).norm() <= 1e-8 * reference.norm());
}

TEST_CASE("Newton converges quadratically on a one-element problem")
{
  auto mat = beam_material();
  mat.pressure_slope = 0.6;  // strong load so several iterations are needed
  const Mesh mesh = one_element();
  FomConfig config;
  config.dt = 0.25;
  config.t_final = 0.25;  // a single large step from the zero state
  config.newton_tol = 1e-12;
  config.newton_max_iter = 40;

  const Trajectory traj = solve_fom(mat, mesh, config);
  const auto &history = traj.newton_residuals.at(0);
  REQUIRE(history.size() >= 4);

  // e_{k+1} / e_k^2 bounded over the tail of the iteration.
  bool saw_quadratic_tail = false;
  for (std::size_t k = 0; k + 1 < history.size(); ++k) {
    if (history[k] <= 0.0 || history[k + 1] <= 0.0) break;
    const double ratio = history[k + 1] / (history[k] * history[k]);
    if (history[k] < 1e-2 * history[0]) {
      CHECK(ratio < 1e6);
      saw_quadratic_tail = true;
    }
  }
  CHECK(saw_quadratic_tail);
}

TEST_CASE("step failure carries the step index and residual norm")
{
  auto mat = beam_material();
  mat.pressure_slope = 0.6;
  const Mesh mesh = one_element();
  FomConfig config;
  config.dt = 0.25;
  config.t_final = 0.25;
  config.newton_max_iter = 1;
  try {
    solve_fom(mat, mesh, config);
    FAIL("expected StepFailureError");
  } catch (const StepFailureError &err) {
    CHECK(err.step() == 1);
    CHECK(err.residual_norm() > 0.0);
  }
}

TEST_CASE("qoi extraction: zero trajectory, clamped vertex, snapping")
{
  const Mesh mesh = small_mesh();
  const FomConfig config = short_config(3);
  auto mat = beam_material();

  SUBCASE("zero trajectory gives zero")
  {
    mat.pressure_slope = 0.0;
    const Trajectory traj = solve_fom(mat, mesh, config);
    Probe probe;
    probe.vertex = static_cast<int>(mesh.num_vertices()) - 1;
    probe.step = 2;
    CHECK(extract_qoi(traj, mesh, probe).value == 0.0);
  }

  SUBCASE("clamped vertex stays zero for all steps under load")
  {
    const Trajectory traj = solve_fom(mat, mesh, config);
    Probe probe;
    probe.vertex = mesh.dirichlet_vertices().front();
    for (int s = 1; s <= 3; ++s) {
      probe.step = s;
      CHECK(extract_qoi(traj, mesh, probe).value == 0.0);
    }
  }

  SUBCASE("probe between vertices snaps to the nearest one and echoes it")
  {
    const Trajectory traj = solve_fom(mat, mesh, config);
    Probe probe;
    probe.point = Vector3(1.01e-2, -1e-4, 2e-4);  // just outside the far corner
    probe.component = 2;
    probe.step = 3;
    const QoiValue qoi = extract_qoi(traj, mesh, probe);
    // Nearest-vertex oracle by brute force.
    int best = 0;
    double best_d = (mesh.vertices.row(0).transpose() - probe.point).squaredNorm();
    for (Index v = 1; v < mesh.num_vertices(); ++v) {
      const double d = (mesh.vertices.row(v).transpose() - probe.point).squaredNorm();
      if (d < best_d) {
        best = static_cast<int>(v);
        best_d = d;
      }
    }
    CHECK(qoi.vertex == best);
    CHECK((qoi.snapped_point - mesh.vertices.row(best).transpose()).norm() == 0.0);
    CHECK(qoi.value == traj.dofs_per_step(3 * best + 2, 2));
  }

  SUBCASE("step out of range is an error")
  {
    const Trajectory traj = solve_fom(mat, mesh, config);
    Probe probe;
    probe.vertex = 0;
    probe.step = 4;
    CHECK_THROWS_AS(extract_qoi(traj, mesh, probe), Error);
    probe.step = 0;
    CHECK_THROWS_AS(extract_qoi(traj, mesh, probe), Error);
  }
}

TEST_CASE("t_final must be an integer multiple of dt")
{
  FomConfig config;
  config.dt = 0.004;
  config.t_final = 0.25;
  CHECK_THROWS_AS(config.validate(), Error);
}
