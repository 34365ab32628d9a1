#ifndef ROMUQ_POD_HPP
#define ROMUQ_POD_HPP

#include <vector>

#include "romuq/types.hpp"

namespace romuq
{

// Truncation rule for the POD basis: either keep the smallest N whose tail
// energy satisfies sum_{i>N} sigma_i^2 <= eps^2 * sum_i sigma_i^2, or a
// fixed dimension.
struct PodCriterion
{
  enum class Kind
  {
    EnergyTolerance,
    FixedDimension,
  };
  Kind kind = Kind::EnergyTolerance;
  double tolerance = 1e-4;
  Index dimension = 0;

  static PodCriterion energy(double eps) { return {Kind::EnergyTolerance, eps, 0}; }
  static PodCriterion fixed(Index n) { return {Kind::FixedDimension, 0.0, n}; }
};

struct ReducedBasis
{
  Matrix modes;            // V, N_h x N, orthonormal columns
  Vector singular_values;  // full spectrum, non-increasing
  double tolerance_used = 0.0;  // 0 when a fixed dimension was requested

  Index num_dofs() const { return modes.rows(); }
  Index dimension() const { return modes.cols(); }
};

// Reduced coefficients q = V^T u on the (time x sample) training grid,
// stored one column per (sample, step) pair: column = sample * N_t + step,
// all times of sample 0 first, then sample 1, and so on.
struct CoefficientTable
{
  Matrix coefficients;  // N x (N_t * N_s)
  Index num_steps = 0;
  Index num_samples = 0;

  Index column(Index sample, Index step) const { return sample * num_steps + step; }
  // N_t x N_s matrix of one coefficient, as consumed by the tensor-
  // decomposition regression.
  Matrix coefficient_grid(Index ell) const;
};

// Leading left singular vectors of the snapshot matrix (thin SVD, no mean
// subtraction, unweighted). Each mode's sign is fixed so its largest-
// magnitude entry is positive. Throws DegenerateDataError on zero snapshots.
ReducedBasis build_basis(const Matrix &snapshots, const PodCriterion &criterion);

// q = V^T data.
Matrix project(const ReducedBasis &basis, const Matrix &data);
CoefficientTable project_table(const ReducedBasis &basis, const Matrix &snapshots, Index num_steps,
                               Index num_samples);

// V q.
Matrix reconstruct(const ReducedBasis &basis, const Matrix &coefficients);

// Dimension the energy criterion would pick for each tolerance (the data
// behind the N-versus-epsilon table).
std::vector<Index> basis_dimension_table(const Vector &singular_values,
                                         const std::vector<double> &tolerances);

}  // namespace romuq

#endif  // ROMUQ_POD_HPP
