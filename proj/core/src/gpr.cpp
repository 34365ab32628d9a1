#include "romuq/gpr.hpp"

#include <atomic>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Cholesky>

#include "romuq/error.hpp"
#include "romuq/rng.hpp"

namespace romuq
{

namespace
{

std::atomic<std::uint64_t> g_kernel_evals{0};

constexpr double kLogBoxLo = -8.0;
constexpr double kLogBoxHi = 8.0;
constexpr double kNoiseFloor = 1e-10;  // sigma_y lower bound when learned
constexpr double kJitterStart = 1e-10;
constexpr double kJitterMax = 1e-6;

// Squared distances with per-dimension scaling 1/l_j (or a common 1/l).
Matrix scaled_sq_dist(const Matrix &A, const Matrix &B, const Vector &inv_lengths)
{
  const Matrix As = A.array().colwise() * inv_lengths.array();
  const Matrix Bs = B.array().colwise() * inv_lengths.array();
  const Vector na = As.colwise().squaredNorm();
  const Vector nb = Bs.colwise().squaredNorm();
  Matrix d2 = -2.0 * As.transpose() * Bs;
  d2.colwise() += na;
  d2.rowwise() += nb.transpose();
  return d2.cwiseMax(0.0);
}

Vector inverse_lengths(const KernelSpec &spec, Index dim)
{
  Vector inv(dim);
  if (spec.kind == KernelKind::Rbf) {
    inv.setConstant(1.0 / spec.length_scales[0]);
  } else {
    inv = spec.length_scales.cwiseInverse();
  }
  return inv;
}

struct FactorizedKernel
{
  Matrix chol;        // lower factor of K + sy^2 I + jitter I
  double jitter = 0.0;
};

// LLT with escalating relative jitter per the training policy.
FactorizedKernel factorize(const Matrix &kernel, double noise_std)
{
  const Index n = kernel.rows();
  Matrix ky = kernel;
  ky.diagonal().array() += noise_std * noise_std;
  const double diag_scale = ky.diagonal().mean();

  Eigen::LLT<Matrix> llt(ky);
  if (llt.info() == Eigen::Success) return {Matrix(llt.matrixL()), 0.0};

  for (double rel = kJitterStart; rel <= kJitterMax * 1.0000001; rel *= 10.0) {
    Matrix attempt = ky;
    attempt.diagonal().array() += rel * diag_scale;
    llt.compute(attempt);
    if (llt.info() == Eigen::Success) return {Matrix(llt.matrixL()), rel * diag_scale};
  }
  throw IllConditionedKernelError("kernel matrix of size " + std::to_string(n) +
                                  " is not positive definite after maximum jitter");
}

// ---------------------------------------------------------------------------
// Hyperparameter packing: theta = [kernel log-params..., log sigma_y?].

struct HyperLayout
{
  KernelKind kind;
  Index dim = 0;
  int degree = 2;
  bool learn_noise = false;

  Index size() const
  {
    Index k = (kind == KernelKind::ArdRbf) ? 1 + dim : 2;
    return k + (learn_noise ? 1 : 0);
  }
  Index kernel_size() const { return size() - (learn_noise ? 1 : 0); }
};

KernelSpec unpack_kernel(const HyperLayout &layout, const Vector &theta)
{
  KernelSpec spec;
  spec.kind = layout.kind;
  spec.degree = layout.degree;
  spec.signal_std = std::exp(theta[0]);
  if (layout.kind == KernelKind::Polynomial) {
    spec.offset = std::exp(theta[1]);
  } else if (layout.kind == KernelKind::Rbf) {
    spec.length_scales = Vector::Constant(1, std::exp(theta[1]));
  } else {
    spec.length_scales = theta.segment(1, layout.dim).array().exp();
  }
  return spec;
}

double unpack_noise(const HyperLayout &layout, const Vector &theta, double fixed_noise)
{
  return layout.learn_noise ? std::exp(theta[theta.size() - 1]) : fixed_noise;
}

// ---------------------------------------------------------------------------
// Compact L-BFGS with projection onto a box and Armijo backtracking.

struct BoxedProblem
{
  Vector lo, hi;
  // Returns f; fills grad.
  std::function<double(const Vector &, Vector &)> eval;
};

Vector clamp_to(const Vector &x, const Vector &lo, const Vector &hi)
{
  return x.cwiseMax(lo).cwiseMin(hi);
}

struct MinimizeResult
{
  Vector x;
  double f = std::numeric_limits<double>::infinity();
  bool ok = false;
};

MinimizeResult lbfgs_minimize(const BoxedProblem &problem, Vector x0, int max_iterations,
                              double gradient_tol)
{
  constexpr int kMemory = 8;
  std::deque<Vector> s_hist, y_hist;
  std::deque<double> rho_hist;

  Vector x = clamp_to(x0, problem.lo, problem.hi);
  Vector grad(x.size());
  double f = problem.eval(x, grad);
  if (!std::isfinite(f)) return {};

  MinimizeResult best{x, f, true};
  for (int iter = 0; iter < max_iterations; ++iter) {
    // Projected gradient for the stopping test.
    Vector pg = clamp_to(x - grad, problem.lo, problem.hi) - x;
    if (pg.lpNorm<Eigen::Infinity>() < gradient_tol) break;

    // Two-loop recursion.
    Vector q = grad;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (!s_hist.empty()) {
      const double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      q *= gamma;
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    Vector direction = -q;
    if (direction.dot(grad) >= 0.0) direction = -grad;  // fall back to steepest descent

    // Backtracking line search on the projected path.
    double step = 1.0;
    const double slope = direction.dot(grad);
    Vector x_new;
    double f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      x_new = clamp_to(x + step * direction, problem.lo, problem.hi);
      Vector dummy;
      f_new = problem.eval(x_new, dummy);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || (x_new - x).norm() == 0.0) break;

    Vector grad_new(x.size());
    f_new = problem.eval(x_new, grad_new);
    const Vector s = x_new - x;
    const Vector yv = grad_new - grad;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(yv);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > kMemory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    x = x_new;
    grad = grad_new;
    f = f_new;
    if (f < best.f) {
      best.x = x;
      best.f = f;
    }
  }
  if (f < best.f) {
    best.x = x;
    best.f = f;
  }
  best.ok = true;
  return best;
}

}  // namespace

KernelKind kernel_kind_from_string(const std::string &name)
{
  if (name == "rbf") return KernelKind::Rbf;
  if (name == "ard-rbf") return KernelKind::ArdRbf;
  if (name == "polynomial") return KernelKind::Polynomial;
  throw Error("unknown kernel kind: " + name);
}

std::string to_string(KernelKind kind)
{
  switch (kind) {
    case KernelKind::Rbf: return "rbf";
    case KernelKind::ArdRbf: return "ard-rbf";
    default: return "polynomial";
  }
}

void KernelSpec::validate(Index input_dim) const
{
  if (!(signal_std > 0.0)) throw Error("KernelSpec: signal std must be positive");
  if (kind == KernelKind::Rbf) {
    if (length_scales.size() != 1 || !(length_scales[0] > 0.0))
      throw Error("KernelSpec: RBF needs one positive length scale");
  } else if (kind == KernelKind::ArdRbf) {
    if (length_scales.size() != input_dim)
      throw DimensionError("KernelSpec: ARD needs one length scale per input dimension");
    if (!(length_scales.array() > 0.0).all())
      throw Error("KernelSpec: length scales must be positive");
  } else {
    if (degree < 1 || degree > 3) throw Error("KernelSpec: polynomial degree must be 1, 2 or 3");
    if (offset < 0.0) throw Error("KernelSpec: polynomial offset must be non-negative");
  }
}

Index KernelSpec::num_params() const
{
  return kind == KernelKind::ArdRbf ? 1 + length_scales.size() : 2;
}

double kernel_eval(const KernelSpec &spec, const Vector &x, const Vector &y)
{
  if (x.size() != y.size()) throw DimensionError("kernel_eval: size mismatch");
  spec.validate(x.size());
  g_kernel_evals.fetch_add(1, std::memory_order_relaxed);
  const double sf2 = spec.signal_std * spec.signal_std;
  switch (spec.kind) {
    case KernelKind::Rbf: {
      const double d2 = (x - y).squaredNorm() / (spec.length_scales[0] * spec.length_scales[0]);
      return sf2 * std::exp(-0.5 * d2);
    }
    case KernelKind::ArdRbf: {
      const double d2 = ((x - y).cwiseQuotient(spec.length_scales)).squaredNorm();
      return sf2 * std::exp(-0.5 * d2);
    }
    default:
      return sf2 * std::pow(x.dot(y) + spec.offset, spec.degree);
  }
}

Matrix kernel_cross(const KernelSpec &spec, const Matrix &X, const Matrix &Xs)
{
  if (X.rows() != Xs.rows()) throw DimensionError("kernel_cross: dimension mismatch");
  spec.validate(X.rows());
  g_kernel_evals.fetch_add(static_cast<std::uint64_t>(X.cols()) * Xs.cols(),
                           std::memory_order_relaxed);
  const double sf2 = spec.signal_std * spec.signal_std;
  if (spec.kind == KernelKind::Polynomial) {
    Matrix g = X.transpose() * Xs;
    return (sf2 * (g.array() + spec.offset).pow(spec.degree)).matrix();
  }
  const Vector inv = inverse_lengths(spec, X.rows());
  return (sf2 * (-0.5 * scaled_sq_dist(X, Xs, inv).array()).exp()).matrix();
}

Matrix kernel_matrix(const KernelSpec &spec, const Matrix &X)
{
  Matrix k = kernel_cross(spec, X, X);
  // Symmetrize to guard against round-off drift in the BLAS path.
  return 0.5 * (k + k.transpose());
}

std::uint64_t kernel_eval_count() { return g_kernel_evals.load(std::memory_order_relaxed); }
void reset_kernel_eval_count() { g_kernel_evals.store(0, std::memory_order_relaxed); }

namespace
{

// Likelihood value without the gradient machinery, for line searches.
double lml_value(const KernelSpec &spec, double noise_std, const Matrix &X, const Vector &y,
                 double prior_mean)
{
  const Index n = X.cols();
  const Matrix kernel = kernel_matrix(spec, X);
  const FactorizedKernel fk = factorize(kernel, noise_std);
  const Vector r = y.array() - prior_mean;
  const double quad = fk.chol.triangularView<Eigen::Lower>().solve(r).squaredNorm();
  const double logdet = 2.0 * fk.chol.diagonal().array().log().sum();
  return -0.5 * (quad + logdet + n * std::log(2.0 * std::numbers::pi));
}

}  // namespace

LogMarginal log_marginal_likelihood(const KernelSpec &spec, double noise_std, const Matrix &X,
                                    const Vector &y, double prior_mean)
{
  const Index n = X.cols();
  if (y.size() != n) throw DimensionError("log_marginal_likelihood: label count mismatch");
  if (n < 1) throw Error("log_marginal_likelihood: need at least one observation");

  const Matrix kernel = kernel_matrix(spec, X);
  const FactorizedKernel fk = factorize(kernel, noise_std);

  const Vector r = y.array() - prior_mean;
  const auto lower = fk.chol.triangularView<Eigen::Lower>();
  const double quad = lower.solve(r).squaredNorm();  // r^T Ky^-1 r
  const double logdet = 2.0 * fk.chol.diagonal().array().log().sum();

  LogMarginal out;
  out.value = -0.5 * (quad + logdet + n * std::log(2.0 * std::numbers::pi));

  // Gradient: 1/2 tr((aa^T - Ky^-1) dK/dtheta), a = Ky^-1 r.
  Vector a = lower.solve(r);
  a = lower.transpose().solve(a);
  Matrix kinv = Matrix::Identity(n, n);
  lower.solveInPlace(kinv);
  lower.transpose().solveInPlace(kinv);
  const Matrix w = a * a.transpose() - kinv;

  out.kernel_gradient.resize(spec.num_params());
  if (spec.kind == KernelKind::Polynomial) {
    const Matrix g = X.transpose() * X;
    const double sf2 = spec.signal_std * spec.signal_std;
    const Matrix base = (g.array() + spec.offset).matrix();
    const Matrix kcore = sf2 * base.array().pow(spec.degree).matrix();
    out.kernel_gradient[0] = (w.array() * kcore.array()).sum();  // d/dlog sf: 2K/2 summed
    const Matrix dc =
        sf2 * spec.degree * spec.offset * base.array().pow(spec.degree - 1).matrix();
    out.kernel_gradient[1] = 0.5 * (w.array() * dc.array()).sum();
  } else {
    const Matrix m = (w.array() * kernel.array()).matrix();
    out.kernel_gradient[0] = m.sum();  // d/dlog sf = 1/2 tr(W 2K)
    if (spec.kind == KernelKind::Rbf) {
      const Vector inv = inverse_lengths(spec, X.rows());
      const Matrix d2 = scaled_sq_dist(X, X, inv);
      out.kernel_gradient[1] = 0.5 * (m.array() * d2.array()).sum();
    } else {
      // Per-dimension: sum_ik M_ik (x_ji - x_jk)^2 / l_j^2, expanded so no
      // n x n temporary per dimension is needed.
      const Vector row_sums = m.rowwise().sum();
      for (Index j = 0; j < X.rows(); ++j) {
        const Vector xj = X.row(j).transpose();
        const Vector xj2 = xj.array().square();
        const double quad_term = xj.dot(m * xj);
        const double diag_term = xj2.dot(row_sums);
        const double lj2 = spec.length_scales[j] * spec.length_scales[j];
        out.kernel_gradient[1 + j] = 0.5 * (2.0 * diag_term - 2.0 * quad_term) / lj2;
      }
    }
  }
  out.noise_gradient = noise_std * noise_std * w.trace();
  return out;
}

TrainedGp TrainedGp::fit(KernelSpec spec, double noise_std, Matrix X_scaled, Vector y_scaled,
                         double prior_mean, Scaler input_scaler, Scaler output_scaler)
{
  spec.validate(X_scaled.rows());
  TrainedGp gp;
  gp.kernel_ = std::move(spec);
  gp.noise_std_ = noise_std;
  gp.prior_mean_ = prior_mean;
  gp.input_scaler_ = std::move(input_scaler);
  gp.output_scaler_ = std::move(output_scaler);
  gp.X_ = std::move(X_scaled);
  const Matrix kernel = kernel_matrix(gp.kernel_, gp.X_);
  const FactorizedKernel fk = factorize(kernel, noise_std);
  gp.chol_ = fk.chol;
  gp.jitter_ = fk.jitter;
  const Vector r = y_scaled.array() - prior_mean;
  gp.alpha_ = gp.chol_.triangularView<Eigen::Lower>().solve(r);
  gp.chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(gp.alpha_);
  const Index n = gp.X_.cols();
  const double logdet = 2.0 * gp.chol_.diagonal().array().log().sum();
  gp.log_marginal_ =
      -0.5 * (r.dot(gp.alpha_) + logdet + n * std::log(2.0 * std::numbers::pi));
  return gp;
}

TrainedGp TrainedGp::fit_physical(const KernelSpec &spec, double noise_std, const Matrix &X,
                                  const Vector &y, ScalerKind input_scaling,
                                  ScalerKind output_scaling)
{
  const Scaler input_scaler = Scaler::fit(input_scaling, X, true);
  const Scaler output_scaler = Scaler::fit(output_scaling, y, true);
  const Vector ys = output_scaler.apply(y);
  return fit(spec, noise_std, input_scaler.apply(X), ys, ys.mean(), input_scaler, output_scaler);
}

TrainedGp TrainedGp::restore(KernelSpec spec, double noise_std, Matrix X_scaled, Vector alpha,
                             double prior_mean, double log_marginal, Scaler input_scaler,
                             Scaler output_scaler)
{
  spec.validate(X_scaled.rows());
  if (alpha.size() != X_scaled.cols()) throw DimensionError("TrainedGp::restore: alpha size mismatch");
  TrainedGp gp;
  gp.kernel_ = std::move(spec);
  gp.noise_std_ = noise_std;
  gp.prior_mean_ = prior_mean;
  gp.input_scaler_ = std::move(input_scaler);
  gp.output_scaler_ = std::move(output_scaler);
  gp.X_ = std::move(X_scaled);
  gp.alpha_ = std::move(alpha);
  gp.log_marginal_ = log_marginal;
  const FactorizedKernel fk = factorize(kernel_matrix(gp.kernel_, gp.X_), noise_std);
  gp.chol_ = fk.chol;
  gp.jitter_ = fk.jitter;
  return gp;
}

void TrainedGp::predict_scaled(const Matrix &Xs_scaled, Vector &mean, Vector &variance) const
{
  if (Xs_scaled.rows() != X_.rows()) throw DimensionError("predict: input dimension mismatch");
  const Matrix ks = kernel_cross(kernel_, X_, Xs_scaled);
  mean = (ks.transpose() * alpha_).array() + prior_mean_;

  Matrix v = ks;
  chol_.triangularView<Eigen::Lower>().solveInPlace(v);
  const Index m = Xs_scaled.cols();
  variance.resize(m);
  for (Index i = 0; i < m; ++i) {
    const double self = kernel_eval(kernel_, Xs_scaled.col(i), Xs_scaled.col(i));
    variance[i] = std::max(0.0, self - v.col(i).squaredNorm());
  }
}

Vector TrainedGp::predict_mean(const Matrix &Xs) const
{
  const Matrix scaled = input_scaler_.apply(Xs);
  if (scaled.rows() != X_.rows()) throw DimensionError("predict: input dimension mismatch");
  const Matrix ks = kernel_cross(kernel_, X_, scaled);
  Vector mean = (ks.transpose() * alpha_).array() + prior_mean_;
  return output_scaler_.invert(mean);
}

void TrainedGp::predict(const Matrix &Xs, Vector &mean, Vector &variance) const
{
  const Matrix scaled = input_scaler_.apply(Xs);
  predict_scaled(scaled, mean, variance);
  mean = output_scaler_.invert(mean);
  const double scale = output_scaler_.scale()[0];
  variance *= scale * scale;
}

TrainedGp TrainedGp::train(const Matrix &X, const Vector &y, const GpConfig &config,
                           std::uint64_t seed)
{
  const Index n = X.cols();
  const Index d = X.rows();
  if (y.size() != n) throw DimensionError("train_gp: label count mismatch");
  if (n < 1) throw Error("train_gp: need at least one observation");
  if (config.noise == NoiseMode::Learned && n < 2)
    throw Error("train_gp: learned noise requires at least two observations");

  // Constant rows get unit scale here: a constant input dimension is simply
  // irrelevant, and a constant label vector must still train (the GP then
  // reproduces the constant through the prior mean).
  const Scaler input_scaler = Scaler::fit(config.input_scaling, X, true);
  const Scaler output_scaler = Scaler::fit(config.output_scaling, y, true);
  const Matrix xs = input_scaler.apply(X);
  const Vector ys = output_scaler.apply(y);
  const double prior_mean = ys.mean();

  HyperLayout layout{config.kernel, d, config.polynomial_degree, config.noise == NoiseMode::Learned};
  const Index k = layout.size();

  Vector lo = Vector::Constant(k, kLogBoxLo);
  Vector hi = Vector::Constant(k, kLogBoxHi);
  if (layout.learn_noise) lo[k - 1] = std::log(kNoiseFloor);

  const double resid_std = std::max(1e-3, std::sqrt((ys.array() - prior_mean).square().mean()));
  Vector theta0(k);
  theta0[0] = std::log(resid_std);
  if (config.kernel == KernelKind::ArdRbf) {
    for (Index j = 0; j < d; ++j) {
      const double spread = std::sqrt((xs.row(j).array() - xs.row(j).mean()).square().mean());
      theta0[1 + j] = std::log(std::max(spread, 0.05));
    }
  } else if (config.kernel == KernelKind::Rbf) {
    theta0[1] = 0.0;
  } else {
    theta0[1] = 0.0;  // log offset
  }
  if (layout.learn_noise) theta0[k - 1] = std::log(std::max(1e-2 * resid_std, kNoiseFloor));

  BoxedProblem problem;
  problem.lo = lo;
  problem.hi = hi;
  problem.eval = [&](const Vector &theta, Vector &grad) -> double {
    const KernelSpec spec = unpack_kernel(layout, theta);
    const double sy = unpack_noise(layout, theta, config.fixed_noise_std);
    try {
      if (grad.size() != theta.size()) return -lml_value(spec, sy, xs, ys, prior_mean);
      const LogMarginal lml = log_marginal_likelihood(spec, sy, xs, ys, prior_mean);
      grad.head(layout.kernel_size()) = -lml.kernel_gradient;
      if (layout.learn_noise) grad[k - 1] = -lml.noise_gradient;
      return -lml.value;
    } catch (const IllConditionedKernelError &) {
      return std::numeric_limits<double>::infinity();
    }
  };

  Rng rng = Rng(seed).substream("gp-starts");
  Vector best_theta;
  double best_f = std::numeric_limits<double>::infinity();
  std::string diagnostics;
  for (int s = 0; s < std::max(1, config.num_starts); ++s) {
    Vector theta = theta0;
    if (s > 0) {
      for (Index i = 0; i < k; ++i) theta[i] += rng.uniform(-2.0, 2.0);
      theta = clamp_to(theta, lo, hi);
    }
    const MinimizeResult res = lbfgs_minimize(problem, theta, config.max_iterations, config.gradient_tol);
    if (!res.ok || !std::isfinite(res.f)) {
      diagnostics += "start " + std::to_string(s) + ": no finite optimum; ";
      continue;
    }
    if (res.f < best_f) {
      best_f = res.f;
      best_theta = res.x;
    }
  }
  if (!best_theta.size())
    throw TrainingFailureError("train_gp: every restart failed (" + diagnostics + ")");

  const KernelSpec spec = unpack_kernel(layout, best_theta);
  const double sy = unpack_noise(layout, best_theta, config.fixed_noise_std);
  return fit(spec, sy, xs, ys, prior_mean, input_scaler, output_scaler);
}

TrainedGp train_gp(const Matrix &X, const Vector &y, const GpConfig &config, std::uint64_t seed)
{
  return TrainedGp::train(X, y, config, seed);
}

}  // namespace romuq
