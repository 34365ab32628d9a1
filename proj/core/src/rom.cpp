#include "romuq/rom.hpp"

#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "romuq/error.hpp"
#include "romuq/parallel.hpp"
#include "romuq/rng.hpp"

namespace romuq
{

namespace
{

// Joint input design of the global approach: one column (t^n, mu_m) per
// table column, all times of sample 0 first, then sample 1, and so on.
Matrix joint_design(const Vector &times, const Matrix &params)
{
  const Index nt = times.size();
  const Index ns = params.rows();
  const Index p = params.cols();
  Matrix x(p + 1, nt * ns);
  for (Index m = 0; m < ns; ++m)
    for (Index n = 0; n < nt; ++n) {
      x(0, m * nt + n) = times[n];
      x.col(m * nt + n).tail(p) = params.row(m).transpose();
    }
  return x;
}

bool outside_box(const GlobalRom &rom, double time, const Vector &mu)
{
  if (time < rom.train_times.minCoeff() || time > rom.train_times.maxCoeff()) return true;
  for (Index j = 0; j < mu.size(); ++j)
    if (mu[j] < rom.train_params.col(j).minCoeff() || mu[j] > rom.train_params.col(j).maxCoeff())
      return true;
  return false;
}

bool outside_box_td(const TdRom &rom, double time, const Vector &mu)
{
  if (time < rom.train_times.minCoeff() || time > rom.train_times.maxCoeff()) return true;
  for (Index j = 0; j < mu.size(); ++j)
    if (mu[j] < rom.train_params.col(j).minCoeff() || mu[j] > rom.train_params.col(j).maxCoeff())
      return true;
  return false;
}

Index energy_rank(const Vector &sigma, double eps)
{
  return basis_dimension_table(sigma, {eps})[0];
}

}  // namespace

Index TdRom::gp_count() const
{
  Index count = 0;
  for (const auto &c : coefficients) count += 2 * c.rank();
  return count;
}

CoefficientTable thin_time_steps(const CoefficientTable &table, Index stride)
{
  if (stride < 1) throw Error("thin_time_steps: stride must be >= 1");
  if (stride == 1) return table;
  const Index kept = table.num_steps / stride;
  if (kept < 1) throw Error("thin_time_steps: stride leaves no time steps");
  CoefficientTable out;
  out.num_steps = kept;
  out.num_samples = table.num_samples;
  out.coefficients.resize(table.coefficients.rows(), kept * table.num_samples);
  for (Index m = 0; m < table.num_samples; ++m)
    for (Index i = 0; i < kept; ++i)
      out.coefficients.col(out.column(m, i)) = table.coefficients.col(table.column(m, (i + 1) * stride - 1));
  return out;
}

Vector thin_time_grid(const Vector &times, Index stride)
{
  if (stride < 1) throw Error("thin_time_grid: stride must be >= 1");
  if (stride == 1) return times;
  const Index kept = times.size() / stride;
  Vector out(kept);
  for (Index i = 0; i < kept; ++i) out[i] = times[(i + 1) * stride - 1];
  return out;
}

GlobalRom train_global_rom(const ReducedBasis &basis, const CoefficientTable &table,
                           const Vector &times, const Matrix &params, const GpConfig &config,
                           std::uint64_t seed, unsigned workers, Index hyper_stride)
{
  if (table.num_steps != times.size())
    throw DimensionError("train_global_rom: table steps do not match the time grid");
  if (table.num_samples != params.rows())
    throw DimensionError("train_global_rom: table samples do not match the parameter design");
  if (table.coefficients.rows() != basis.dimension())
    throw DimensionError("train_global_rom: table rows do not match the basis dimension");

  GlobalRom rom;
  rom.basis = basis;
  rom.train_times = times;
  rom.train_params = params;
  const Matrix x = joint_design(times, params);
  const Index n_out = basis.dimension();
  rom.gps.resize(static_cast<std::size_t>(n_out));

  const bool subset_hyper = hyper_stride > 1 && table.num_steps / hyper_stride >= 2;
  CoefficientTable thin;
  Matrix x_thin;
  if (subset_hyper) {
    thin = thin_time_steps(table, hyper_stride);
    x_thin = joint_design(thin_time_grid(times, hyper_stride), params);
  }

  const Rng root = Rng(seed).substream("rom-global");
  parallel_for(static_cast<std::size_t>(n_out), workers, [&](std::size_t ell) {
    const Vector y = table.coefficients.row(static_cast<Index>(ell)).transpose();
    try {
      if (subset_hyper) {
        const Vector y_thin = thin.coefficients.row(static_cast<Index>(ell)).transpose();
        const TrainedGp hyper =
            TrainedGp::train(x_thin, y_thin, config, root.substream(ell).next_u64());
        rom.gps[ell] = TrainedGp::fit_physical(hyper.kernel(), hyper.noise_std(), x, y,
                                               config.input_scaling, config.output_scaling);
      } else {
        rom.gps[ell] = TrainedGp::train(x, y, config, root.substream(ell).next_u64());
      }
    } catch (const Error &err) {
      throw TrainingFailureError("global ROM coefficient " + std::to_string(ell) + ": " + err.what());
    }
  });
  return rom;
}

Matrix predict_global_trajectory(const GlobalRom &rom, const Vector &times, const Vector &mu,
                                 Matrix *variance)
{
  const Index nt = times.size();
  const Index p = rom.train_params.cols();
  if (mu.size() != p) throw DimensionError("predict_global: parameter dimension mismatch");
  Matrix xs(p + 1, nt);
  for (Index n = 0; n < nt; ++n) {
    xs(0, n) = times[n];
    xs.col(n).tail(p) = mu;
  }
  const Index dim = rom.dimension();
  Matrix q(dim, nt);
  if (variance) variance->resize(dim, nt);
  for (Index ell = 0; ell < dim; ++ell) {
    if (variance) {
      Vector mean, var;
      rom.gps[static_cast<std::size_t>(ell)].predict(xs, mean, var);
      q.row(ell) = mean.transpose();
      variance->row(ell) = var.transpose();
    } else {
      q.row(ell) = rom.gps[static_cast<std::size_t>(ell)].predict_mean(xs).transpose();
    }
  }
  return q;
}

RomPrediction predict_global(const GlobalRom &rom, double time, const Vector &mu)
{
  Matrix var;
  RomPrediction out;
  const Matrix q = predict_global_trajectory(rom, Vector::Constant(1, time), mu, &var);
  out.coefficients = q.col(0);
  out.variance = var.col(0);
  out.extrapolated = outside_box(rom, time, mu);
  return out;
}

TdRom train_td_rom(const ReducedBasis &basis, const CoefficientTable &table, const Vector &times,
                   const Matrix &params, double svd_tolerance, const GpConfig &config,
                   std::uint64_t seed, unsigned workers)
{
  if (table.num_steps != times.size())
    throw DimensionError("train_td_rom: table steps do not match the time grid");
  if (table.num_samples != params.rows())
    throw DimensionError("train_td_rom: table samples do not match the parameter design");
  if (!(svd_tolerance > 0.0)) throw Error("train_td_rom: SVD tolerance must be positive");

  TdRom rom;
  rom.basis = basis;
  rom.svd_tolerance = svd_tolerance;
  rom.train_times = times;
  rom.train_params = params;
  const Index n_out = basis.dimension();
  rom.coefficients.resize(static_cast<std::size_t>(n_out));

  const Matrix xt = times.transpose();           // 1 x N_t
  const Matrix xmu = params.transpose();         // p x N_s
  const Rng root = Rng(seed).substream("rom-td");

  parallel_for(static_cast<std::size_t>(n_out), workers, [&](std::size_t ell) {
    const Matrix grid = table.coefficient_grid(static_cast<Index>(ell));  // N_t x N_s
    Eigen::BDCSVD<Matrix> svd(grid, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector sigma = svd.singularValues();
    const Index rank = energy_rank(sigma, svd_tolerance);

    auto &model = rom.coefficients[ell];
    model.all_singular_values = sigma;
    model.lambdas = sigma.head(rank);
    Matrix psi = svd.matrixU().leftCols(rank);
    Matrix phi = svd.matrixV().leftCols(rank);
    // Pin the factor signs (largest-|psi| entry positive) so GP targets are
    // reproducible; the product psi * phi^T is unchanged.
    for (Index k = 0; k < rank; ++k) {
      Index imax = 0;
      psi.col(k).cwiseAbs().maxCoeff(&imax);
      if (psi(imax, k) < 0.0) {
        psi.col(k) = -psi.col(k);
        phi.col(k) = -phi.col(k);
      }
    }

    const Rng branch = root.substream(ell);
    model.time_gps.resize(static_cast<std::size_t>(rank));
    model.param_gps.resize(static_cast<std::size_t>(rank));
    for (Index k = 0; k < rank; ++k) {
      try {
        model.time_gps[static_cast<std::size_t>(k)] =
            TrainedGp::train(xt, psi.col(k), config, branch.substream(2 * k).next_u64());
      } catch (const Error &err) {
        throw TrainingFailureError("TD ROM coefficient " + std::to_string(ell) + ", time mode " +
                                   std::to_string(k) + ": " + err.what());
      }
      try {
        model.param_gps[static_cast<std::size_t>(k)] =
            TrainedGp::train(xmu, phi.col(k), config, branch.substream(2 * k + 1).next_u64());
      } catch (const Error &err) {
        throw TrainingFailureError("TD ROM coefficient " + std::to_string(ell) + ", parameter mode " +
                                   std::to_string(k) + ": " + err.what());
      }
    }
  });
  return rom;
}

Matrix predict_td_trajectory(const TdRom &rom, const Vector &times, const Vector &mu,
                             Matrix *variance)
{
  const Index nt = times.size();
  const Index dim = rom.dimension();
  if (mu.size() != rom.train_params.cols())
    throw DimensionError("predict_td: parameter dimension mismatch");
  const Matrix xt = times.transpose();
  const Matrix xmu = mu;

  Matrix q = Matrix::Zero(dim, nt);
  if (variance) variance->setZero(dim, nt);
  for (Index ell = 0; ell < dim; ++ell) {
    const auto &model = rom.coefficients[static_cast<std::size_t>(ell)];
    for (Index k = 0; k < model.rank(); ++k) {
      Vector psi_mean, psi_var, phi_mean, phi_var;
      if (variance) {
        model.time_gps[static_cast<std::size_t>(k)].predict(xt, psi_mean, psi_var);
        model.param_gps[static_cast<std::size_t>(k)].predict(xmu, phi_mean, phi_var);
      } else {
        psi_mean = model.time_gps[static_cast<std::size_t>(k)].predict_mean(xt);
        phi_mean = model.param_gps[static_cast<std::size_t>(k)].predict_mean(xmu);
      }
      const double lambda = model.lambdas[k];
      q.row(ell) += lambda * phi_mean[0] * psi_mean.transpose();
      if (variance) {
        // First-order propagation through the product psi * phi.
        const double l2 = lambda * lambda;
        variance->row(ell) += (l2 * (psi_mean.array().square() * phi_var[0] +
                                     phi_mean[0] * phi_mean[0] * psi_var.array()))
                                  .matrix()
                                  .transpose();
      }
    }
  }
  return q;
}

RomPrediction predict_td(const TdRom &rom, double time, const Vector &mu)
{
  Matrix var;
  RomPrediction out;
  const Matrix q = predict_td_trajectory(rom, Vector::Constant(1, time), mu, &var);
  out.coefficients = q.col(0);
  out.variance = var.col(0);
  out.extrapolated = outside_box_td(rom, time, mu);
  return out;
}

ErrorReport error_metrics(const std::vector<Trajectory> &truth,
                          const std::vector<Matrix> &predicted_coefficients,
                          const ReducedBasis &basis)
{
  const Index ns = static_cast<Index>(truth.size());
  if (predicted_coefficients.size() != truth.size())
    throw DimensionError("error_metrics: prediction count does not match the truth set");
  if (ns == 0) throw Error("error_metrics: empty test set");
  const Index dim = basis.dimension();
  const Index nt = truth.front().num_steps();

  ErrorReport report;
  report.mse.setZero(dim);
  report.rse.setZero(dim);
  report.rse_degenerate.assign(static_cast<std::size_t>(dim), 0);
  report.tae.setZero(ns);
  report.tre.setZero(ns);
  report.tre_degenerate.assign(static_cast<std::size_t>(ns), 0);

  // Projected truth per sample, reused by both metric families.
  std::vector<Matrix> q_truth(truth.size());
  for (Index m = 0; m < ns; ++m) {
    if (truth[static_cast<std::size_t>(m)].num_steps() != nt)
      throw DimensionError("error_metrics: trajectories have differing step counts");
    if (predicted_coefficients[static_cast<std::size_t>(m)].rows() != dim ||
        predicted_coefficients[static_cast<std::size_t>(m)].cols() != nt)
      throw DimensionError("error_metrics: prediction matrix has the wrong shape");
    q_truth[static_cast<std::size_t>(m)] =
        project(basis, truth[static_cast<std::size_t>(m)].dofs_per_step);
  }

  const double count = static_cast<double>(ns) * static_cast<double>(nt);
  for (Index ell = 0; ell < dim; ++ell) {
    double sq_err = 0.0, mean_q = 0.0;
    for (Index m = 0; m < ns; ++m) {
      const auto &qt = q_truth[static_cast<std::size_t>(m)];
      const auto &qp = predicted_coefficients[static_cast<std::size_t>(m)];
      sq_err += (qt.row(ell) - qp.row(ell)).squaredNorm();
      mean_q += qt.row(ell).sum();
    }
    mean_q /= count;
    double var_q = 0.0;
    for (Index m = 0; m < ns; ++m)
      var_q += (q_truth[static_cast<std::size_t>(m)].row(ell).array() - mean_q).square().sum();
    report.mse[ell] = sq_err / count;
    if (var_q > 0.0) {
      report.rse[ell] = sq_err / var_q;
    } else {
      report.rse[ell] = std::numeric_limits<double>::quiet_NaN();
      report.rse_degenerate[static_cast<std::size_t>(ell)] = 1;
    }
  }

  for (Index m = 0; m < ns; ++m) {
    const auto &traj = truth[static_cast<std::size_t>(m)];
    const Matrix recon = reconstruct(basis, predicted_coefficients[static_cast<std::size_t>(m)]);
    double abs_sum = 0.0, rel_sum = 0.0;
    bool degenerate = false;
    for (Index n = 0; n < nt; ++n) {
      const double err = (traj.dofs_per_step.col(n) - recon.col(n)).norm();
      const double mag = traj.dofs_per_step.col(n).norm();
      abs_sum += err;
      if (mag > 0.0) {
        rel_sum += err / mag;
      } else {
        degenerate = true;
      }
    }
    report.tae[m] = abs_sum / static_cast<double>(nt);
    if (degenerate) {
      report.tre[m] = std::numeric_limits<double>::quiet_NaN();
      report.tre_degenerate[static_cast<std::size_t>(m)] = 1;
    } else {
      report.tre[m] = rel_sum / static_cast<double>(nt);
    }
  }

  report.mean_tae = report.tae.mean();
  double tre_sum = 0.0;
  Index tre_count = 0;
  for (Index m = 0; m < ns; ++m)
    if (!report.tre_degenerate[static_cast<std::size_t>(m)]) {
      tre_sum += report.tre[m];
      ++tre_count;
    }
  report.mean_tre = tre_count > 0 ? tre_sum / static_cast<double>(tre_count)
                                  : std::numeric_limits<double>::quiet_NaN();
  return report;
}

}  // namespace romuq
