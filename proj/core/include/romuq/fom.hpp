#ifndef ROMUQ_FOM_HPP
#define ROMUQ_FOM_HPP

#include <vector>

#include <Eigen/Sparse>

#include "romuq/material.hpp"
#include "romuq/mesh.hpp"
#include "romuq/types.hpp"

namespace romuq
{

struct FomConfig
{
  double dt = 0.005;          // s
  double t_final = 0.25;      // s
  double newton_tol = 1e-8;   // absolute residual 2-norm, N
  int newton_max_iter = 25;
  int quadrature_order = 2;
  double density = 1.0e3;     // kg/m^3, not in the sampled parameter vector

  int num_steps() const;      // N_t = t_final / dt
  void validate() const;
};

// Nodal displacement history u_h(t^n), n = 1..N_t, one column per step.
// Dirichlet DOFs are exactly zero in every column.
struct Trajectory
{
  Matrix dofs_per_step;  // N_h x N_t
  Vector times;          // t^1 .. t^{N_t}
  Vector mu;             // provenance; empty when not solved from a parameter vector
  std::vector<std::vector<double>> newton_residuals;  // per step, |R| per iteration

  Index num_dofs() const { return dofs_per_step.rows(); }
  Index num_steps() const { return dofs_per_step.cols(); }
};

struct AssembledSystem
{
  Vector residual;
  Eigen::SparseMatrix<double> tangent;
};

// Assembles residual and tangent of the fully discrete elastodynamics step
//   rho/dt^2 M (u - 2 u_prev + u_prev2) + N(u) - F_ext(t, u) = 0,
// where N is the internal force of the Guccione material and F_ext the
// follower pressure -p(t) J F^-T nu on the pressure boundary, p(t) = p~ t/T.
// Dirichlet rows are eliminated: residual entries zero, unit diagonal.
// Displacements are in meters, the residual in Newtons (kPa inputs are
// converted internally).
class FomOperator
{
public:
  FomOperator(const Mesh &mesh, const MaterialParams &mat, const FomConfig &config);

  AssembledSystem assemble(const Vector &u, const Vector &u_prev, const Vector &u_prev2,
                           double time) const;

  // Follower-load vector at (u, t); linear in p~ at fixed u.
  Vector external_load(const Vector &u, double time) const;

  // Internal force N(u) alone, for tests.
  Vector internal_force(const Vector &u) const;

  // Unit-density mass matrix (Dirichlet rows untouched).
  const Eigen::SparseMatrix<double> &mass() const { return mass_; }

  const std::vector<int> &dirichlet_dofs() const { return dirichlet_dofs_; }
  Index num_dofs() const { return mesh_->num_dofs(); }

  // Implicit time stepping with Newton's method from the previous step's
  // solution; homogeneous initial conditions u(t^-1) = u(t^0) = 0.
  // Throws StepFailureError on non-convergence.
  Trajectory solve() const;

private:
  struct QuadPoint
  {
    Eigen::Matrix<double, 8, 3> grad;  // shape gradients w.r.t. X
    double weight;                     // w * det(dX/dxi)
  };
  struct FaceQuadPoint
  {
    Eigen::Matrix<double, 4, 1> shape;
    Eigen::Matrix<double, 4, 2> dshape;  // d/dxi, d/deta
    double weight;
  };

  void add_internal(const Vector &u, Vector &residual, std::vector<Eigen::Triplet<double>> &triplets) const;
  void add_pressure(const Vector &u, double pressure_si, Vector &residual,
                    std::vector<Eigen::Triplet<double>> *triplets) const;

  const Mesh *mesh_;
  MaterialParams mat_;
  FomConfig config_;
  std::vector<std::vector<QuadPoint>> element_cache_;
  std::vector<FaceQuadPoint> face_rule_;
  std::vector<const BoundaryFace *> pressure_faces_;
  Eigen::SparseMatrix<double> mass_;
  std::vector<int> dirichlet_dofs_;
  std::vector<char> is_dirichlet_;
};

AssembledSystem assemble_system(const Vector &u, const Vector &u_prev, const Vector &u_prev2,
                                const MaterialParams &mat, const Mesh &mesh, const FomConfig &config,
                                double time);

Trajectory solve_fom(const MaterialParams &mat, const Mesh &mesh, const FomConfig &config);
// Convenience overload taking the Table-2 ordered parameter vector.
Trajectory solve_fom(const Vector &mu, const Mesh &mesh, const FomConfig &config);

// Probe for a scalar quantity of interest: one displacement component of one
// mesh vertex at one time step (1-based). When vertex < 0 the probe point is
// snapped to the nearest mesh vertex.
struct Probe
{
  int vertex = -1;
  Vector3 point = Vector3::Zero();
  int component = 2;  // 0 = x, 1 = y, 2 = z
  int step = 1;
};

struct QoiValue
{
  double value = 0.0;
  int vertex = -1;
  Vector3 snapped_point = Vector3::Zero();  // echoed mesh coordinates
};

QoiValue extract_qoi(const Trajectory &traj, const Mesh &mesh, const Probe &probe);

// Resolves the probe's vertex id (nearest vertex when given coordinates).
int resolve_probe_vertex(const Mesh &mesh, const Probe &probe);

}  // namespace romuq

#endif  // ROMUQ_FOM_HPP
