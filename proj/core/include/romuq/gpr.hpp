#ifndef ROMUQ_GPR_HPP
#define ROMUQ_GPR_HPP

#include <cstdint>
#include <string>

#include "romuq/sampling.hpp"
#include "romuq/types.hpp"

namespace romuq
{

enum class KernelKind
{
  Rbf,         // sigma_f^2 exp(-|x-x'|^2 / (2 l^2))
  ArdRbf,      // sigma_f^2 exp(-1/2 sum_j (x_j-x'_j)^2 / l_j^2)
  Polynomial,  // sigma_f^2 (x.x' + c)^degree
};

KernelKind kernel_kind_from_string(const std::string &name);
std::string to_string(KernelKind kind);

struct KernelSpec
{
  KernelKind kind = KernelKind::Rbf;
  double signal_std = 1.0;  // sigma_f
  Vector length_scales;     // one entry for Rbf, d entries for ArdRbf, unused otherwise
  int degree = 2;           // polynomial only, in {1,2,3}
  double offset = 1.0;      // polynomial c >= 0

  void validate(Index input_dim) const;
  // Number of tunable kernel parameters (signal + lengths or offset).
  Index num_params() const;
};

double kernel_eval(const KernelSpec &spec, const Vector &x, const Vector &y);
// Columns of X are points. Self-covariance matrix K(X, X).
Matrix kernel_matrix(const KernelSpec &spec, const Matrix &X);
// Cross covariance K(X, X*), size n x m.
Matrix kernel_cross(const KernelSpec &spec, const Matrix &X, const Matrix &Xs);

// Running count of scalar kernel evaluations (matrix builds count as n*m
// entries). Used to assert online-cost contracts.
std::uint64_t kernel_eval_count();
void reset_kernel_eval_count();

enum class NoiseMode
{
  Fixed,
  Learned,
};

struct GpConfig
{
  KernelKind kernel = KernelKind::ArdRbf;
  int polynomial_degree = 2;
  NoiseMode noise = NoiseMode::Learned;
  double fixed_noise_std = 0.0;
  int num_starts = 5;
  int max_iterations = 80;
  double gradient_tol = 1e-6;
  ScalerKind input_scaling = ScalerKind::Standardize;
  ScalerKind output_scaling = ScalerKind::Standardize;
};

struct LogMarginal
{
  double value = 0.0;
  Vector kernel_gradient;        // d/d log(kernel params), layout [log sf, log l_1.. | log c]
  double noise_gradient = 0.0;   // d/d log(sigma_y)
};

// Log marginal likelihood of the labels with constant prior mean, plus its
// analytic gradient in log-hyperparameter space. X and y are already scaled;
// jitter escalates from 1e-10 to 1e-6 times mean(diag K) before an
// IllConditionedKernelError is thrown.
LogMarginal log_marginal_likelihood(const KernelSpec &spec, double noise_std, const Matrix &X,
                                    const Vector &y, double prior_mean);

// Exact single-output GP with cached Cholesky factorization. Immutable after
// training; predictions are pure and safe to run concurrently.
class TrainedGp
{
public:
  TrainedGp() = default;

  // Multi-start maximum-likelihood training. X is d x n (columns are
  // observations) in physical units; scalers are fitted from X and y here.
  static TrainedGp train(const Matrix &X, const Vector &y, const GpConfig &config, std::uint64_t seed);

  // Assembles the posterior for fixed hyperparameters on pre-scaled data.
  static TrainedGp fit(KernelSpec spec, double noise_std, Matrix X_scaled, Vector y_scaled,
                       double prior_mean, Scaler input_scaler, Scaler output_scaler);

  // Fits scalers on the given physical-unit data and assembles the posterior
  // with hyperparameters already expressed in scaled units (e.g. estimated on
  // a subset of the same data).
  static TrainedGp fit_physical(const KernelSpec &spec, double noise_std, const Matrix &X,
                                const Vector &y, ScalerKind input_scaling,
                                ScalerKind output_scaling);

  // Rebuilds a trained model from persisted state (alpha instead of labels).
  static TrainedGp restore(KernelSpec spec, double noise_std, Matrix X_scaled, Vector alpha,
                           double prior_mean, double log_marginal, Scaler input_scaler,
                           Scaler output_scaler);

  // Posterior mean and pointwise variance at the columns of Xs (physical
  // units in, physical units out).
  void predict(const Matrix &Xs, Vector &mean, Vector &variance) const;
  // Same in scaled units.
  void predict_scaled(const Matrix &Xs_scaled, Vector &mean, Vector &variance) const;
  // Mean only; skips the triangular solve behind the variance.
  Vector predict_mean(const Matrix &Xs) const;

  const KernelSpec &kernel() const { return kernel_; }
  double noise_std() const { return noise_std_; }
  double prior_mean() const { return prior_mean_; }
  const Scaler &input_scaler() const { return input_scaler_; }
  const Scaler &output_scaler() const { return output_scaler_; }
  const Matrix &training_inputs() const { return X_; }
  const Vector &alpha() const { return alpha_; }
  double jitter() const { return jitter_; }
  double log_marginal() const { return log_marginal_; }
  Index num_points() const { return X_.cols(); }
  Index input_dim() const { return X_.rows(); }

private:
  KernelSpec kernel_;
  double noise_std_ = 0.0;
  double prior_mean_ = 0.0;
  Scaler input_scaler_;
  Scaler output_scaler_;
  Matrix X_;       // scaled training inputs
  Vector alpha_;   // (K + sy^2 I)^-1 (y - m)
  Matrix chol_;    // lower Cholesky factor of K + sy^2 I (+ jitter)
  double jitter_ = 0.0;
  double log_marginal_ = 0.0;
};

TrainedGp train_gp(const Matrix &X, const Vector &y, const GpConfig &config, std::uint64_t seed);

}  // namespace romuq

#endif  // ROMUQ_GPR_HPP
