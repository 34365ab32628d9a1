#ifndef ROMUQ_BAYES_HPP
#define ROMUQ_BAYES_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "romuq/sampling.hpp"
#include "romuq/types.hpp"

namespace romuq
{

// Bayesian inverse problem with i.i.d. Gaussian observation noise
// y_obs = y(mu*) + eps, eps ~ N(0, sigma_eps^2 I), and a uniform prior over
// a box. The forward model is opaque: any callable mu -> QoI vector works.
struct InverseProblem
{
  std::function<Vector(const Vector &)> forward;
  Vector y_obs;
  double noise_variance = 1e-6;  // sigma_eps^2
  ParameterSpace prior;

  void validate() const;
};

// Unnormalized log posterior: -|y_obs - y(mu)|^2 / (2 sigma_eps^2) inside the
// prior box, -infinity outside (the forward model is not called there).
// Forward-model failures are rethrown with mu attached.
double log_posterior(const Vector &mu, const InverseProblem &problem);

enum class ProposalKind
{
  IndependenceUniform,  // fresh draw from the prior box
  GaussianRandomWalk,
};

struct McmcConfig
{
  Index num_iterations = 10000;  // N_MC
  Index burn_in = 500;
  Index thinning = 4;
  ProposalKind proposal = ProposalKind::IndependenceUniform;
  Vector walk_step;  // RW std per input; empty means 10% of the box width
  Vector initial;    // mu^0, must lie inside the prior box
  std::uint64_t seed = 0;

  Index kept_count() const { return (num_iterations - burn_in) / thinning; }
  void validate(const ParameterSpace &prior) const;
};

struct Chain
{
  Matrix samples;        // num_iterations x p, the state after each iteration
  Vector log_posterior;  // trace
  std::vector<char> accepted_flags;
  Index accepted = 0;
  Matrix kept;           // after burn-in and thinning

  double acceptance_rate() const
  {
    return samples.rows() > 0 ? static_cast<double>(accepted) / samples.rows() : 0.0;
  }
};

// Standard Metropolis-Hastings. Both provided proposals need no correction
// factor (symmetric walk, constant independence density on the box). Emits a
// stuck-chain warning on stderr when nothing was accepted.
Chain metropolis_hastings(const InverseProblem &problem, const McmcConfig &config);

struct Kde
{
  Vector grid;
  Vector density;
  double bandwidth = 0.0;
};

// Gaussian kernel density estimate with Silverman's bandwidth.
Kde gaussian_kde(const Vector &samples, Index grid_size = 256);

// Type-7 (linear interpolation) quantile of unsorted data.
double quantile(const Vector &samples, double prob);

struct ChainSummary
{
  Vector mean;
  Vector std;
  Matrix covariance;
  Matrix quantiles;  // p x 3: 5%, 50%, 95%
  std::vector<Kde> densities;
};

ChainSummary chain_summary(const Chain &chain);

}  // namespace romuq

#endif  // ROMUQ_BAYES_HPP
