#ifndef ROMUQ_UQ_HPP
#define ROMUQ_UQ_HPP

#include <cstdint>
#include <vector>

#include "romuq/sampling.hpp"
#include "romuq/types.hpp"

namespace romuq
{

// One-at-a-time screening design: r trajectories of p+1 points on an
// iota-level grid of the unit hypercube, consecutive points differing in
// exactly one coordinate by +-delta.
struct MorrisDesign
{
  int levels = 6;
  double delta = 0.0;        // iota / (2 (iota - 1)), in unit-cube units
  Index num_inputs = 0;
  int num_trajectories = 0;
  Matrix unit_points;        // r (p+1) x p, trajectory-major
  Matrix physical_points;    // same rows mapped to the parameter bounds
  // For trajectory j, moved_input[j][s] is the coordinate changed between
  // points s and s+1, and move_sign[j][s] the sign of that move.
  std::vector<std::vector<Index>> moved_input;
  std::vector<std::vector<int>> move_sign;

  Index num_points() const { return unit_points.rows(); }
};

struct MorrisResult
{
  // One row per input, one column per quantity of interest.
  Matrix mean;           // m_i
  Matrix mean_abs;       // m*_i
  Matrix spread;         // sd_i = 1/(r-1) sum (EE - m)^2, as printed in the
                         // elementary-effects statistics
  bool spread_defined = true;  // false when r = 1
};

MorrisDesign morris_design(const ParameterSpace &space, int num_trajectories, int levels,
                           std::uint64_t seed);

// Outputs: one row per design point (trajectory-major, matching the design),
// one column per QoI. Elementary effects use the unit-hypercube difference
// quotient.
MorrisResult morris_indices(const MorrisDesign &design, const Matrix &outputs);

// Min-max rescaling of (m*, sd) columns for presentation tables.
Matrix min_max_scale_columns(const Matrix &values);

// Saltelli design: base matrices A and B plus the p column-swapped matrices
// A_B^(i); rows(i * N .. ) laid out A, B, A_B^(0), ..., A_B^(p-1).
struct SaltelliDesign
{
  Index num_samples = 0;  // N
  Index num_inputs = 0;   // p
  Matrix points;          // N (p+2) x p, physical units

  Index rows() const { return points.rows(); }
  // Row ranges of the blocks.
  Index a_offset() const { return 0; }
  Index b_offset() const { return num_samples; }
  Index ab_offset(Index input) const { return (2 + input) * num_samples; }
};

SaltelliDesign saltelli_design(const ParameterSpace &space, Index num_samples, std::uint64_t seed);

struct SobolResult
{
  // One row per input, one column per QoI. Estimates are reported raw and
  // may exceed [0,1] slightly by Monte Carlo noise.
  Matrix first_order;        // S_i, Jansen estimator
  Matrix total_effect;       // S_Ti, Jansen estimator
  Matrix first_order_se;     // estimator noise, one standard error
  Matrix total_effect_se;
  Vector variance;           // pooled A u B output variance per QoI
};

// Outputs aligned with design.points rows; one column per QoI.
// Throws DegenerateDataError when the pooled output variance is zero.
SobolResult sobol_indices(const SaltelliDesign &design, const Matrix &outputs);

// Variance-decomposition numerators needed by the time-integrated indices:
// closed_numerator = Var(E[y|mu_i]) estimate, total_numerator = E[Var(y|mu_~i)].
struct SobolNumerators
{
  Matrix closed;  // inputs x QoIs
  Matrix total;
  Vector variance;  // per QoI
};
SobolNumerators sobol_numerators(const SaltelliDesign &design, const Matrix &outputs);

// Generalized (cumulative-in-time) Sobol indices: ratios of trapezoidal
// integrals of the per-step numerators and variances over [t^1, t^n]. At the
// first grid point the plain pointwise index is reported. Entries are NaN
// until the cumulative variance becomes positive.
struct TimeIntegratedSobol
{
  Matrix first_order;   // inputs x steps
  Matrix total_effect;  // inputs x steps
};

TimeIntegratedSobol time_integrated_sobol(const Vector &times, const Matrix &closed_numerators,
                                          const Matrix &total_numerators,
                                          const Vector &variances);

}  // namespace romuq

#endif  // ROMUQ_UQ_HPP
