#include "romuq/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>

#include "romuq/error.hpp"
#include "romuq/rng.hpp"

namespace romuq
{

void InverseProblem::validate() const
{
  prior.validate();
  if (!forward) throw Error("InverseProblem: forward model is not set");
  if (y_obs.size() == 0) throw Error("InverseProblem: no observations");
  if (!(noise_variance > 0.0)) throw Error("InverseProblem: noise variance must be positive");
}

double log_posterior(const Vector &mu, const InverseProblem &problem)
{
  if (!problem.prior.contains(mu)) return -std::numeric_limits<double>::infinity();
  Vector y;
  try {
    y = problem.forward(mu);
  } catch (const std::exception &err) {
    std::ostringstream msg;
    msg << "forward model failed at mu = [" << mu.transpose() << "]: " << err.what();
    throw Error(msg.str());
  }
  if (y.size() != problem.y_obs.size())
    throw DimensionError("log_posterior: forward model returned the wrong number of QoIs");
  return -0.5 * (problem.y_obs - y).squaredNorm() / problem.noise_variance;
}

void McmcConfig::validate(const ParameterSpace &prior) const
{
  if (num_iterations < 1) throw Error("McmcConfig: need at least one iteration");
  if (burn_in < 0 || burn_in >= num_iterations)
    throw Error("McmcConfig: burn-in must be smaller than the iteration count");
  if (thinning < 1) throw Error("McmcConfig: thinning must be >= 1");
  if (initial.size() != prior.dim())
    throw DimensionError("McmcConfig: initial point dimension mismatch");
  if (!prior.contains(initial)) throw Error("McmcConfig: initial point lies outside the prior box");
  if (walk_step.size() != 0 && walk_step.size() != prior.dim())
    throw DimensionError("McmcConfig: walk step dimension mismatch");
}

Chain metropolis_hastings(const InverseProblem &problem, const McmcConfig &config)
{
  problem.validate();
  config.validate(problem.prior);
  const Index p = problem.prior.dim();
  const Index n = config.num_iterations;

  Vector step = config.walk_step;
  if (config.proposal == ProposalKind::GaussianRandomWalk && step.size() == 0)
    step = 0.1 * problem.prior.range();

  Chain chain;
  chain.samples.resize(n, p);
  chain.log_posterior.resize(n);
  chain.accepted_flags.assign(static_cast<std::size_t>(n), 0);

  Rng rng = Rng(config.seed).substream("mcmc");
  Vector current = config.initial;
  double current_lp = log_posterior(current, problem);

  for (Index it = 0; it < n; ++it) {
    Vector candidate(p);
    if (config.proposal == ProposalKind::IndependenceUniform) {
      for (Index j = 0; j < p; ++j)
        candidate[j] = rng.uniform(problem.prior.lower[j], problem.prior.upper[j]);
    } else {
      for (Index j = 0; j < p; ++j) candidate[j] = current[j] + step[j] * rng.normal();
    }

    // Zero-prior candidates are rejected without touching the forward model.
    double candidate_lp = -std::numeric_limits<double>::infinity();
    if (problem.prior.contains(candidate)) candidate_lp = log_posterior(candidate, problem);

    // Both proposals are correction-free; log alpha = min(0, delta).
    const double log_alpha = std::min(0.0, candidate_lp - current_lp);
    const double u = rng.uniform();
    if (std::log(u > 0.0 ? u : std::numeric_limits<double>::min()) < log_alpha) {
      current = candidate;
      current_lp = candidate_lp;
      chain.accepted_flags[static_cast<std::size_t>(it)] = 1;
      ++chain.accepted;
    }
    chain.samples.row(it) = current.transpose();
    chain.log_posterior[it] = current_lp;
  }

  if (chain.accepted == 0)
    std::cerr << "metropolis_hastings: warning: no accepted moves in " << n << " iterations\n";

  const Index kept = config.kept_count();
  chain.kept.resize(kept, p);
  for (Index k = 1; k <= kept; ++k)
    chain.kept.row(k - 1) = chain.samples.row(config.burn_in + k * config.thinning - 1);
  return chain;
}

double quantile(const Vector &samples, double prob)
{
  if (samples.size() == 0) throw Error("quantile: empty sample");
  std::vector<double> sorted(samples.data(), samples.data() + samples.size());
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Kde gaussian_kde(const Vector &samples, Index grid_size)
{
  const Index n = samples.size();
  if (n == 0) throw Error("gaussian_kde: empty sample");
  if (grid_size < 2) throw Error("gaussian_kde: grid too small");

  const double mean = samples.mean();
  const double sd = std::sqrt((samples.array() - mean).square().sum() / std::max<Index>(n - 1, 1));
  const double iqr = quantile(samples, 0.75) - quantile(samples, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (spread <= 0.0) spread = std::max(sd, iqr / 1.34);

  Kde kde;
  if (spread <= 0.0) {
    // Every sample identical: represent the spike with a tiny bandwidth.
    kde.bandwidth = 1e-9 * std::max(1.0, std::abs(samples[0]));
  } else {
    kde.bandwidth = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
  }

  const double lo = samples.minCoeff() - 3.0 * kde.bandwidth;
  const double hi = samples.maxCoeff() + 3.0 * kde.bandwidth;
  kde.grid.resize(grid_size);
  kde.density.setZero(grid_size);
  const double norm = 1.0 / (static_cast<double>(n) * kde.bandwidth * std::sqrt(2.0 * std::numbers::pi));
  for (Index g = 0; g < grid_size; ++g) {
    const double x = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(grid_size - 1);
    kde.grid[g] = x;
    double acc = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double z = (x - samples[i]) / kde.bandwidth;
      acc += std::exp(-0.5 * z * z);
    }
    kde.density[g] = norm * acc;
  }
  return kde;
}

ChainSummary chain_summary(const Chain &chain)
{
  const Index n = chain.kept.rows();
  const Index p = chain.kept.cols();
  if (n == 0) throw Error("chain_summary: no kept samples");

  ChainSummary summary;
  summary.mean = chain.kept.colwise().mean();
  summary.std.resize(p);
  summary.covariance.setZero(p, p);
  const Matrix centered = chain.kept.rowwise() - summary.mean.transpose();
  if (n > 1) summary.covariance = centered.transpose() * centered / static_cast<double>(n - 1);
  for (Index j = 0; j < p; ++j) summary.std[j] = std::sqrt(summary.covariance(j, j));

  summary.quantiles.resize(p, 3);
  summary.densities.reserve(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) {
    const Vector col = chain.kept.col(j);
    summary.quantiles(j, 0) = quantile(col, 0.05);
    summary.quantiles(j, 1) = quantile(col, 0.50);
    summary.quantiles(j, 2) = quantile(col, 0.95);
    summary.densities.push_back(gaussian_kde(col));
  }
  return summary;
}

}  // namespace romuq
