#include "romuq/pod.hpp"

#include <vector>

#include <Eigen/SVD>

#include "romuq/error.hpp"

namespace romuq
{

namespace
{

Index energy_dimension(const Vector &sigma, double eps)
{
  const double total = sigma.squaredNorm();
  const double budget = eps * eps * total;
  double tail = total;
  for (Index n = 1; n <= sigma.size(); ++n) {
    tail -= sigma[n - 1] * sigma[n - 1];
    if (tail <= budget) return n;
  }
  return sigma.size();
}

}  // namespace

Matrix CoefficientTable::coefficient_grid(Index ell) const
{
  if (ell < 0 || ell >= coefficients.rows()) throw DimensionError("coefficient_grid: mode out of range");
  Matrix grid(num_steps, num_samples);
  for (Index m = 0; m < num_samples; ++m)
    for (Index n = 0; n < num_steps; ++n) grid(n, m) = coefficients(ell, column(m, n));
  return grid;
}

ReducedBasis build_basis(const Matrix &snapshots, const PodCriterion &criterion)
{
  if (snapshots.size() == 0 || snapshots.norm() == 0.0)
    throw DegenerateDataError("build_basis: snapshot matrix is zero");

  Eigen::BDCSVD<Matrix> svd(snapshots, Eigen::ComputeThinU);
  const Vector &sigma = svd.singularValues();

  Index n = 0;
  double tol_used = 0.0;
  if (criterion.kind == PodCriterion::Kind::EnergyTolerance) {
    n = energy_dimension(sigma, criterion.tolerance);
    tol_used = criterion.tolerance;
  } else {
    if (criterion.dimension < 1) throw Error("build_basis: fixed dimension must be positive");
    n = std::min(criterion.dimension, sigma.size());
  }

  ReducedBasis basis;
  basis.singular_values = sigma;
  basis.tolerance_used = tol_used;
  basis.modes = svd.matrixU().leftCols(n);

  // SVD leaves each mode's sign arbitrary; pin it for reproducible training
  // targets downstream.
  for (Index j = 0; j < n; ++j) {
    Index imax = 0;
    basis.modes.col(j).cwiseAbs().maxCoeff(&imax);
    if (basis.modes(imax, j) < 0.0) basis.modes.col(j) = -basis.modes.col(j);
  }
  return basis;
}

Matrix project(const ReducedBasis &basis, const Matrix &data)
{
  if (data.rows() != basis.num_dofs())
    throw DimensionError("project: data rows do not match the basis");
  return basis.modes.transpose() * data;
}

CoefficientTable project_table(const ReducedBasis &basis, const Matrix &snapshots, Index num_steps,
                               Index num_samples)
{
  if (snapshots.cols() != num_steps * num_samples)
    throw DimensionError("project_table: column count is not N_t * N_s");
  CoefficientTable table;
  table.coefficients = project(basis, snapshots);
  table.num_steps = num_steps;
  table.num_samples = num_samples;
  return table;
}

Matrix reconstruct(const ReducedBasis &basis, const Matrix &coefficients)
{
  if (coefficients.rows() != basis.dimension())
    throw DimensionError("reconstruct: coefficient rows do not match the basis dimension");
  return basis.modes * coefficients;
}

std::vector<Index> basis_dimension_table(const Vector &singular_values,
                                         const std::vector<double> &tolerances)
{
  std::vector<Index> out;
  out.reserve(tolerances.size());
  for (double eps : tolerances) out.push_back(energy_dimension(singular_values, eps));
  return out;
}

}  // namespace romuq
