#include "romuq/fom.hpp"

#include <cmath>

#include <Eigen/SparseLU>

#include "romuq/error.hpp"

namespace romuq
{

namespace
{

constexpr double kKpaToPa = 1.0e3;

constexpr std::array<std::array<double, 3>, 8> kHexNodeXi = {{
    {-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1},
    {-1, -1, 1}, {1, -1, 1}, {1, 1, 1}, {-1, 1, 1},
}};

struct GaussRule
{
  std::vector<double> points;
  std::vector<double> weights;
};

GaussRule gauss_rule(int order)
{
  switch (order) {
    case 1: return {{0.0}, {2.0}};
    case 2: {
      const double a = 1.0 / std::sqrt(3.0);
      return {{-a, a}, {1.0, 1.0}};
    }
    case 3: {
      const double a = std::sqrt(3.0 / 5.0);
      return {{-a, 0.0, a}, {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0}};
    }
    default: throw Error("unsupported quadrature order " + std::to_string(order));
  }
}

void hex_shape(double xi, double eta, double zeta, Eigen::Matrix<double, 8, 1> &n,
               Eigen::Matrix<double, 8, 3> &dn)
{
  for (int a = 0; a < 8; ++a) {
    const auto &s = kHexNodeXi[a];
    n[a] = 0.125 * (1 + s[0] * xi) * (1 + s[1] * eta) * (1 + s[2] * zeta);
    dn(a, 0) = 0.125 * s[0] * (1 + s[1] * eta) * (1 + s[2] * zeta);
    dn(a, 1) = 0.125 * (1 + s[0] * xi) * s[1] * (1 + s[2] * zeta);
    dn(a, 2) = 0.125 * (1 + s[0] * xi) * (1 + s[1] * eta) * s[2];
  }
}

void quad_shape(double xi, double eta, Eigen::Matrix<double, 4, 1> &n, Eigen::Matrix<double, 4, 2> &dn)
{
  constexpr std::array<std::array<double, 2>, 4> corners = {{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}};
  for (int a = 0; a < 4; ++a) {
    const auto &s = corners[a];
    n[a] = 0.25 * (1 + s[0] * xi) * (1 + s[1] * eta);
    dn(a, 0) = 0.25 * s[0] * (1 + s[1] * eta);
    dn(a, 1) = 0.25 * (1 + s[0] * xi) * s[1];
  }
}

}  // namespace

int FomConfig::num_steps() const
{
  return static_cast<int>(std::llround(t_final / dt));
}

void FomConfig::validate() const
{
  if (!(dt > 0.0)) throw Error("FomConfig: dt must be positive");
  if (!(t_final > 0.0)) throw Error("FomConfig: t_final must be positive");
  const double steps = t_final / dt;
  if (std::abs(steps - std::llround(steps)) > 1e-9 * steps || std::llround(steps) < 1)
    throw Error("FomConfig: t_final must be a positive integer multiple of dt");
  if (newton_max_iter < 1) throw Error("FomConfig: newton_max_iter must be positive");
  if (!(newton_tol > 0.0)) throw Error("FomConfig: newton_tol must be positive");
  if (!(density > 0.0)) throw Error("FomConfig: density must be positive");
}

FomOperator::FomOperator(const Mesh &mesh, const MaterialParams &mat, const FomConfig &config)
  : mesh_(&mesh), mat_(mat), config_(config)
{
  config_.validate();
  const GaussRule rule = gauss_rule(config_.quadrature_order);
  const std::size_t npts = rule.points.size();

  // Reference-configuration quantities are fixed; cache shape gradients and
  // scaled weights per element quadrature point.
  element_cache_.resize(mesh.hexahedra.size());
  for (std::size_t e = 0; e < mesh.hexahedra.size(); ++e) {
    Eigen::Matrix<double, 8, 3> coords;
    for (int a = 0; a < 8; ++a) coords.row(a) = mesh.vertices.row(mesh.hexahedra[e][a]);
    for (std::size_t ix = 0; ix < npts; ++ix)
      for (std::size_t iy = 0; iy < npts; ++iy)
        for (std::size_t iz = 0; iz < npts; ++iz) {
          Eigen::Matrix<double, 8, 1> n;
          Eigen::Matrix<double, 8, 3> dn;
          hex_shape(rule.points[ix], rule.points[iy], rule.points[iz], n, dn);
          const Matrix3 jac = coords.transpose() * dn;  // dX/dxi
          const double detj = jac.determinant();
          if (detj <= 0.0)
            throw Error("element " + std::to_string(e) + " has non-positive reference Jacobian");
          QuadPoint qp;
          qp.grad = dn * jac.inverse();
          qp.weight = rule.weights[ix] * rule.weights[iy] * rule.weights[iz] * detj;
          element_cache_[e].push_back(qp);
        }
  }

  // 2x2 rule on pressure faces.
  {
    const GaussRule face_rule = gauss_rule(2);
    for (double xi : face_rule.points)
      for (double eta : face_rule.points) {
        FaceQuadPoint fq;
        quad_shape(xi, eta, fq.shape, fq.dshape);
        fq.weight = 1.0;
        face_rule_.push_back(fq);
      }
  }
  for (const auto &face : mesh.boundary_faces)
    if (face.tag == BoundaryTag::Pressure) pressure_faces_.push_back(&face);

  dirichlet_dofs_ = mesh.dirichlet_dofs();
  is_dirichlet_.assign(static_cast<std::size_t>(mesh.num_dofs()), 0);
  for (int d : dirichlet_dofs_) is_dirichlet_[static_cast<std::size_t>(d)] = 1;

  // Unit-density consistent mass.
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t e = 0; e < mesh.hexahedra.size(); ++e) {
    Eigen::Matrix<double, 8, 3> coords;
    for (int a = 0; a < 8; ++a) coords.row(a) = mesh.vertices.row(mesh.hexahedra[e][a]);
    Eigen::Matrix<double, 8, 8> me = Eigen::Matrix<double, 8, 8>::Zero();
    for (std::size_t ix = 0; ix < npts; ++ix)
      for (std::size_t iy = 0; iy < npts; ++iy)
        for (std::size_t iz = 0; iz < npts; ++iz) {
          Eigen::Matrix<double, 8, 1> n;
          Eigen::Matrix<double, 8, 3> dn;
          hex_shape(rule.points[ix], rule.points[iy], rule.points[iz], n, dn);
          const double detj = (coords.transpose() * dn).determinant();
          me += rule.weights[ix] * rule.weights[iy] * rule.weights[iz] * detj * (n * n.transpose());
        }
    for (int a = 0; a < 8; ++a)
      for (int b = 0; b < 8; ++b)
        for (int c = 0; c < 3; ++c)
          triplets.emplace_back(3 * mesh.hexahedra[e][a] + c, 3 * mesh.hexahedra[e][b] + c, me(a, b));
  }
  mass_.resize(mesh.num_dofs(), mesh.num_dofs());
  mass_.setFromTriplets(triplets.begin(), triplets.end());
}

void FomOperator::add_internal(const Vector &u, Vector &residual,
                               std::vector<Eigen::Triplet<double>> &triplets) const
{
  const auto &mesh = *mesh_;
  for (std::size_t e = 0; e < mesh.hexahedra.size(); ++e) {
    const auto &hex = mesh.hexahedra[e];
    Eigen::Matrix<double, 3, 8> ue;
    for (int a = 0; a < 8; ++a) ue.col(a) = u.segment<3>(3 * hex[a]);

    Eigen::Matrix<double, 24, 1> fe = Eigen::Matrix<double, 24, 1>::Zero();
    Eigen::Matrix<double, 24, 24> ke = Eigen::Matrix<double, 24, 24>::Zero();
    for (const auto &qp : element_cache_[e]) {
      const Matrix3 F = Matrix3::Identity() + ue * qp.grad;
      StressResult stress;
      try {
        stress = piola_stress(F, mat_);
      } catch (const SingularDeformationError &err) {
        throw SingularDeformationError(err.det_f(), static_cast<int>(e));
      }
      const double w = qp.weight * kKpaToPa;
      for (int a = 0; a < 8; ++a)
        fe.segment<3>(3 * a) += w * stress.piola * qp.grad.row(a).transpose();
      // k(ai, bj) = grad_a(m) A(im, jn) grad_b(n)
      for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b)
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
              double acc = 0.0;
              for (int m = 0; m < 3; ++m)
                for (int n = 0; n < 3; ++n)
                  acc += qp.grad(a, m) * stress.tangent(3 * i + m, 3 * j + n) * qp.grad(b, n);
              ke(3 * a + i, 3 * b + j) += w * acc;
            }
    }
    for (int a = 0; a < 8; ++a)
      for (int i = 0; i < 3; ++i) {
        residual[3 * hex[a] + i] += fe[3 * a + i];
        for (int b = 0; b < 8; ++b)
          for (int j = 0; j < 3; ++j)
            triplets.emplace_back(3 * hex[a] + i, 3 * hex[b] + j, ke(3 * a + i, 3 * b + j));
      }
  }
}

void FomOperator::add_pressure(const Vector &u, double pressure_si, Vector &residual,
                               std::vector<Eigen::Triplet<double>> *triplets) const
{
  // Follower load: with the deformed face x = X + u, the contribution of
  // -p J F^-T nu per reference area equals -p (x_,xi x x_,eta) through
  // Nanson's formula, which only needs the face displacements.
  const auto &mesh = *mesh_;
  for (const BoundaryFace *face : pressure_faces_) {
    Eigen::Matrix<double, 3, 4> xe;
    for (int a = 0; a < 4; ++a)
      xe.col(a) = mesh.vertices.row(face->nodes[a]).transpose() + u.segment<3>(3 * face->nodes[a]);
    for (const auto &fq : face_rule_) {
      const Vector3 t1 = xe * fq.dshape.col(0);
      const Vector3 t2 = xe * fq.dshape.col(1);
      const Vector3 area = t1.cross(t2);  // outward normal times area element
      for (int a = 0; a < 4; ++a)
        residual.segment<3>(3 * face->nodes[a]) += pressure_si * fq.weight * fq.shape[a] * area;
      if (triplets == nullptr) continue;
      for (int b = 0; b < 4; ++b)
        for (int j = 0; j < 3; ++j) {
          Vector3 dt1 = Vector3::Zero(), dt2 = Vector3::Zero();
          dt1[j] = fq.dshape(b, 0);
          dt2[j] = fq.dshape(b, 1);
          const Vector3 darea = dt1.cross(t2) + t1.cross(dt2);
          for (int a = 0; a < 4; ++a)
            for (int i = 0; i < 3; ++i)
              triplets->emplace_back(3 * face->nodes[a] + i, 3 * face->nodes[b] + j,
                                     pressure_si * fq.weight * fq.shape[a] * darea[i]);
        }
    }
  }
}

Vector FomOperator::external_load(const Vector &u, double time) const
{
  const double p = kKpaToPa * mat_.pressure_slope * time / config_.t_final;
  Vector load = Vector::Zero(mesh_->num_dofs());
  // add_pressure accumulates +p * area into a residual; the load itself is
  // the negative of that contribution.
  add_pressure(u, p, load, nullptr);
  return -load;
}

Vector FomOperator::internal_force(const Vector &u) const
{
  Vector residual = Vector::Zero(mesh_->num_dofs());
  std::vector<Eigen::Triplet<double>> triplets;
  add_internal(u, residual, triplets);
  return residual;
}

AssembledSystem FomOperator::assemble(const Vector &u, const Vector &u_prev, const Vector &u_prev2,
                                      double time) const
{
  const Index n = mesh_->num_dofs();
  if (u.size() != n || u_prev.size() != n || u_prev2.size() != n)
    throw DimensionError("FomOperator::assemble: DOF vector size mismatch");

  AssembledSystem sys;
  sys.residual = Vector::Zero(n);
  std::vector<Eigen::Triplet<double>> triplets;

  add_internal(u, sys.residual, triplets);

  const double p = kKpaToPa * mat_.pressure_slope * time / config_.t_final;
  add_pressure(u, p, sys.residual, &triplets);

  const double mass_coeff = mat_.density / (config_.dt * config_.dt);
  sys.residual += mass_coeff * (mass_ * (u - 2.0 * u_prev + u_prev2));
  for (int k = 0; k < mass_.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(mass_, k); it; ++it)
      triplets.emplace_back(it.row(), it.col(), mass_coeff * it.value());

  // Dirichlet elimination: zero rows/columns, unit diagonal, zero residual.
  std::vector<Eigen::Triplet<double>> reduced;
  reduced.reserve(triplets.size() + dirichlet_dofs_.size());
  for (const auto &t : triplets) {
    if (is_dirichlet_[static_cast<std::size_t>(t.row())] ||
        is_dirichlet_[static_cast<std::size_t>(t.col())])
      continue;
    reduced.push_back(t);
  }
  for (int d : dirichlet_dofs_) {
    reduced.emplace_back(d, d, 1.0);
    sys.residual[d] = 0.0;
  }
  sys.tangent.resize(n, n);
  sys.tangent.setFromTriplets(reduced.begin(), reduced.end());
  return sys;
}

Trajectory FomOperator::solve() const
{
  const Index n = mesh_->num_dofs();
  const int num_steps = config_.num_steps();

  Trajectory traj;
  traj.dofs_per_step.setZero(n, num_steps);
  traj.times.resize(num_steps);
  traj.mu = mat_.to_vector();
  traj.newton_residuals.resize(static_cast<std::size_t>(num_steps));

  Vector u_prev2 = Vector::Zero(n);  // u(t^-1)
  Vector u_prev = Vector::Zero(n);   // u(t^0)
  Vector u = Vector::Zero(n);

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> solver;
  bool analyzed = false;

  for (int step = 1; step <= num_steps; ++step) {
    const double time = step * config_.dt;
    u = u_prev;
    auto &history = traj.newton_residuals[static_cast<std::size_t>(step - 1)];

    bool converged = false;
    double norm = 0.0;
    for (int it = 0; it < config_.newton_max_iter; ++it) {
      AssembledSystem sys = assemble(u, u_prev, u_prev2, time);
      norm = sys.residual.norm();
      history.push_back(norm);
      if (norm < config_.newton_tol) {
        converged = true;
        break;
      }
      if (!analyzed) {
        solver.analyzePattern(sys.tangent);
        analyzed = true;
      }
      solver.factorize(sys.tangent);
      if (solver.info() != Eigen::Success)
        throw StepFailureError(step, norm, static_cast<int>(history.size()));
      u -= solver.solve(sys.residual);
    }
    if (!converged) {
      // One final residual check after the last correction.
      norm = assemble(u, u_prev, u_prev2, time).residual.norm();
      history.push_back(norm);
      if (norm >= config_.newton_tol)
        throw StepFailureError(step, norm, config_.newton_max_iter);
    }

    traj.dofs_per_step.col(step - 1) = u;
    traj.times[step - 1] = time;
    u_prev2 = u_prev;
    u_prev = u;
  }
  return traj;
}

AssembledSystem assemble_system(const Vector &u, const Vector &u_prev, const Vector &u_prev2,
                                const MaterialParams &mat, const Mesh &mesh, const FomConfig &config,
                                double time)
{
  FomOperator op(mesh, mat, config);
  return op.assemble(u, u_prev, u_prev2, time);
}

Trajectory solve_fom(const MaterialParams &mat, const Mesh &mesh, const FomConfig &config)
{
  mat.validate();
  FomOperator op(mesh, mat, config);
  return op.solve();
}

Trajectory solve_fom(const Vector &mu, const Mesh &mesh, const FomConfig &config)
{
  return solve_fom(MaterialParams::from_vector(mu, config.density), mesh, config);
}

int resolve_probe_vertex(const Mesh &mesh, const Probe &probe)
{
  if (probe.vertex >= 0) {
    if (probe.vertex >= mesh.num_vertices())
      throw Error("probe vertex " + std::to_string(probe.vertex) + " does not exist");
    return probe.vertex;
  }
  int best = 0;
  double best_dist = (mesh.vertices.row(0).transpose() - probe.point).squaredNorm();
  for (Index v = 1; v < mesh.num_vertices(); ++v) {
    const double d = (mesh.vertices.row(v).transpose() - probe.point).squaredNorm();
    if (d < best_dist) {
      best = static_cast<int>(v);
      best_dist = d;
    }
  }
  return best;
}

QoiValue extract_qoi(const Trajectory &traj, const Mesh &mesh, const Probe &probe)
{
  if (probe.component < 0 || probe.component > 2)
    throw Error("probe component must be 0, 1 or 2");
  if (probe.step < 1 || probe.step > traj.num_steps())
    throw Error("probe step " + std::to_string(probe.step) + " out of range [1, " +
                std::to_string(traj.num_steps()) + "]");
  if (traj.num_dofs() != mesh.num_dofs())
    throw DimensionError("extract_qoi: trajectory does not match mesh");

  QoiValue out;
  out.vertex = resolve_probe_vertex(mesh, probe);
  out.snapped_point = mesh.vertices.row(out.vertex).transpose();
  out.value = traj.dofs_per_step(3 * out.vertex + probe.component, probe.step - 1);
  return out;
}

}  // namespace romuq
