#ifndef ROMUQ_ROM_HPP
#define ROMUQ_ROM_HPP

#include <cstdint>
#include <vector>

#include "romuq/fom.hpp"
#include "romuq/gpr.hpp"
#include "romuq/pod.hpp"
#include "romuq/types.hpp"

namespace romuq
{

// One GP per reduced coefficient over the joint input x = (t, mu).
struct GlobalRom
{
  ReducedBasis basis;
  std::vector<TrainedGp> gps;  // basis.dimension() of them, identical input design
  Vector train_times;          // time grid used for training (possibly thinned)
  Matrix train_params;         // N_s x p

  Index dimension() const { return static_cast<Index>(gps.size()); }
};

// Per coefficient: truncated SVD of the N_t x N_s coefficient grid, with one
// GP per retained time-mode and one per parameter-mode.
struct TdRom
{
  struct CoefficientModel
  {
    Vector lambdas;                    // retained singular values
    Vector all_singular_values;        // full spectrum of the grid
    std::vector<TrainedGp> time_gps;   // psi_k(t)
    std::vector<TrainedGp> param_gps;  // phi_k(mu)
    Index rank() const { return lambdas.size(); }
  };

  ReducedBasis basis;
  std::vector<CoefficientModel> coefficients;
  double svd_tolerance = 0.0;
  Vector train_times;
  Matrix train_params;

  Index dimension() const { return static_cast<Index>(coefficients.size()); }
  Index gp_count() const;  // 2 * sum_ell rank_ell
};

struct RomPrediction
{
  Vector coefficients;      // q^, length N
  Vector variance;          // per-coefficient predictive variance (global) or
                            // first-order propagated variance (TD)
  bool extrapolated = false;  // (t*, mu*) fell outside the training box
};

// Keep every stride-th time step (1-based steps stride, 2*stride, ...).
CoefficientTable thin_time_steps(const CoefficientTable &table, Index stride);
Vector thin_time_grid(const Vector &times, Index stride);

// hyper_stride > 1 estimates each GP's hyperparameters on the table thinned
// to every hyper_stride-th time step, then fits the exact posterior on the
// full table (subset-of-data hyperparameter estimation). The training cost is
// dominated by the subset; the online cost by the full set.
GlobalRom train_global_rom(const ReducedBasis &basis, const CoefficientTable &table,
                           const Vector &times, const Matrix &params, const GpConfig &config,
                           std::uint64_t seed, unsigned workers = 1, Index hyper_stride = 1);

RomPrediction predict_global(const GlobalRom &rom, double time, const Vector &mu);
// All requested times at once; columns of the result follow `times`.
Matrix predict_global_trajectory(const GlobalRom &rom, const Vector &times, const Vector &mu,
                                 Matrix *variance = nullptr);

TdRom train_td_rom(const ReducedBasis &basis, const CoefficientTable &table, const Vector &times,
                   const Matrix &params, double svd_tolerance, const GpConfig &config,
                   std::uint64_t seed, unsigned workers = 1);

RomPrediction predict_td(const TdRom &rom, double time, const Vector &mu);
Matrix predict_td_trajectory(const TdRom &rom, const Vector &times, const Vector &mu,
                             Matrix *variance = nullptr);

// Accuracy of predicted reduced coefficients against projected truth (MSE,
// RSE per coefficient) and of reconstructed fields against the full-order
// trajectories (time-averaged absolute/relative errors per test parameter).
// Degenerate denominators are flagged and excluded from the reported means.
struct ErrorReport
{
  Vector mse;                        // per coefficient
  Vector rse;                        // per coefficient
  std::vector<char> rse_degenerate;  // zero-variance truth
  Vector tae;                        // per test sample
  Vector tre;                        // per test sample
  std::vector<char> tre_degenerate;  // zero-norm truth at some step
  double mean_tae = 0.0;
  double mean_tre = 0.0;
};

ErrorReport error_metrics(const std::vector<Trajectory> &truth,
                          const std::vector<Matrix> &predicted_coefficients,
                          const ReducedBasis &basis);

}  // namespace romuq

#endif  // ROMUQ_ROM_HPP
