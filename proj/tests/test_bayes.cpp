#include <doctest.h>

#include <cmath>

#include "romuq/bayes.hpp"
#include "romuq/error.hpp"
#include "romuq/rng.hpp"

using namespace romuq;

namespace
{

ParameterSpace box1d(double lo, double hi)
{
  ParameterSpace space;
  space.names = {"mu"};
  space.lower = Vector::Constant(1, lo);
  space.upper = Vector::Constant(1, hi);
  return space;
}

// Monte Carlo standard error of the mean by batch means.
double batch_se(const Vector &samples, Index batches = 50)
{
  const Index n = samples.size();
  const Index len = n / batches;
  Vector means(batches);
  for (Index b = 0; b < batches; ++b) means[b] = samples.segment(b * len, len).mean();
  const double grand = means.mean();
  const double var = (means.array() - grand).square().sum() / (batches - 1.0);
  return std::sqrt(var / batches);
}

}  // namespace

TEST_CASE("log posterior")
{
  InverseProblem problem;
  problem.prior = box1d(0.0, 1.0);
  problem.noise_variance = 0.01;  // sigma = 0.1
  problem.y_obs = Vector::Constant(1, 0.5);
  problem.forward = [](const Vector &mu) { return mu; };

  SUBCASE("outside the box the posterior vanishes")
  {
    CHECK(std::isinf(log_posterior(Vector::Constant(1, 1.5), problem)));
    CHECK(log_posterior(Vector::Constant(1, 1.5), problem) < 0.0);
  }

  SUBCASE("a perfect fit has zero log likelihood")
  {
    CHECK(log_posterior(Vector::Constant(1, 0.5), problem) == doctest::Approx(0.0));
  }

  SUBCASE("the quadratic decays as expected")
  {
    const double at_half = log_posterior(Vector::Constant(1, 0.5), problem);
    const double at_06 = log_posterior(Vector::Constant(1, 0.6), problem);
    CHECK(at_half - at_06 == doctest::Approx(0.5));  // 0.5 (0.1/0.1)^2
  }

  SUBCASE("forward failures carry the parameter value")
  {
    InverseProblem bad = problem;
    bad.forward = [](const Vector &) -> Vector { throw Error("solver exploded"); };
    try {
      log_posterior(Vector::Constant(1, 0.25), bad);
      FAIL("expected error");
    } catch (const Error &err) {
      const std::string what = err.what();
      CHECK(what.find("0.25") != std::string::npos);
      CHECK(what.find("solver exploded") != std::string::npos);
    }
  }
}

TEST_CASE("flat likelihood with the uniform proposal reduces to iid sampling")
{
  InverseProblem problem;
  problem.prior = box1d(2.0, 6.0);
  problem.noise_variance = 1.0;
  problem.y_obs = Vector::Constant(1, 0.0);
  problem.forward = [](const Vector &) { return Vector::Constant(1, 0.0); };

  McmcConfig config;
  config.num_iterations = 20000;
  config.burn_in = 100;
  config.thinning = 1;
  config.initial = Vector::Constant(1, 3.0);
  config.seed = 5;

  const Chain chain = metropolis_hastings(problem, config);
  CHECK(chain.acceptance_rate() == doctest::Approx(1.0));

  const Vector kept = chain.kept.col(0);
  const double se = batch_se(kept);
  CHECK(std::abs(kept.mean() - 4.0) <= 3.0 * se);
}

TEST_CASE("1D conjugate-Gaussian posterior is recovered within 3 MC standard errors")
{
  InverseProblem problem;
  problem.prior = box1d(0.0, 1.0);
  problem.noise_variance = 0.01;
  problem.y_obs = Vector::Constant(1, 0.5);
  problem.forward = [](const Vector &mu) { return mu; };

  McmcConfig config;
  config.num_iterations = 100000;
  config.burn_in = 500;
  config.thinning = 4;
  config.initial = Vector::Constant(1, 0.9);
  config.seed = 12;

  const Chain chain = metropolis_hastings(problem, config);
  CHECK(chain.kept.rows() == (100000 - 500) / 4);

  // Posterior is N(0.5, 0.1^2) truncated to [0,1]; the box is 5 sigma wide,
  // truncation shifts nothing measurable.
  const Vector kept = chain.kept.col(0);
  const double se = batch_se(kept);
  CHECK(std::abs(kept.mean() - 0.5) <= 3.0 * se);
  const double sd = std::sqrt((kept.array() - kept.mean()).square().sum() / (kept.size() - 1.0));
  CHECK(std::abs(sd - 0.1) <= 0.003);
}

TEST_CASE("gaussian random walk targets the same posterior")
{
  InverseProblem problem;
  problem.prior = box1d(0.0, 1.0);
  problem.noise_variance = 0.01;
  problem.y_obs = Vector::Constant(1, 0.4);
  problem.forward = [](const Vector &mu) { return mu; };

  McmcConfig config;
  config.num_iterations = 60000;
  config.burn_in = 1000;
  config.thinning = 4;
  config.proposal = ProposalKind::GaussianRandomWalk;
  config.walk_step = Vector::Constant(1, 0.15);
  config.initial = Vector::Constant(1, 0.9);
  config.seed = 3;

  const Chain chain = metropolis_hastings(problem, config);
  CHECK(chain.acceptance_rate() > 0.1);
  CHECK(chain.acceptance_rate() < 1.0);
  const Vector kept = chain.kept.col(0);
  CHECK(std::abs(kept.mean() - 0.4) <= 3.0 * batch_se(kept) + 1e-3);
}

TEST_CASE("kept-sample bookkeeping is exact")
{
  InverseProblem problem;
  problem.prior = box1d(0.0, 1.0);
  problem.noise_variance = 1.0;
  problem.y_obs = Vector::Constant(1, 0.0);
  problem.forward = [](const Vector &) { return Vector::Constant(1, 0.0); };

  for (Index n : {11, 100, 357}) {
    for (Index burn : {0, 10}) {
      for (Index thin : {1, 3, 7}) {
        if (burn >= n) continue;
        McmcConfig config;
        config.num_iterations = n;
        config.burn_in = burn;
        config.thinning = thin;
        config.initial = Vector::Constant(1, 0.5);
        config.seed = 1;
        const Chain chain = metropolis_hastings(problem, config);
        CHECK(chain.kept.rows() == (n - burn) / thin);
        CHECK(chain.samples.rows() == n);
      }
    }
  }

  // N_MC = burn-in + 1 with no thinning keeps exactly one sample.
  McmcConfig config;
  config.num_iterations = 501;
  config.burn_in = 500;
  config.thinning = 1;
  config.initial = Vector::Constant(1, 0.5);
  const Chain chain = metropolis_hastings(problem, config);
  CHECK(chain.kept.rows() == 1);
  CHECK(chain.kept(0, 0) == chain.samples(500, 0));
}

TEST_CASE("every raw sample stays inside the prior box")
{
  InverseProblem problem;
  problem.prior = box1d(-2.0, 3.0);
  problem.noise_variance = 0.04;
  problem.y_obs = Vector::Constant(1, 2.9);
  problem.forward = [](const Vector &mu) { return mu; };

  McmcConfig config;
  config.num_iterations = 5000;
  config.burn_in = 100;
  config.thinning = 2;
  config.proposal = ProposalKind::GaussianRandomWalk;
  config.walk_step = Vector::Constant(1, 1.5);  // frequently proposes outside
  config.initial = Vector::Constant(1, 2.5);
  config.seed = 7;
  const Chain chain = metropolis_hastings(problem, config);
  for (Index it = 0; it < chain.samples.rows(); ++it) {
    CHECK(chain.samples(it, 0) >= -2.0);
    CHECK(chain.samples(it, 0) <= 3.0);
  }
}

TEST_CASE("chain replays bit-for-bit against a hand-rolled oracle")
{
  InverseProblem problem;
  problem.prior = box1d(0.0, 2.0);
  problem.noise_variance = 0.25;
  problem.y_obs = Vector::Constant(1, 1.2);
  problem.forward = [](const Vector &mu) { return Vector::Constant(1, mu[0] * mu[0]); };

  McmcConfig config;
  config.num_iterations = 400;
  config.burn_in = 50;
  config.thinning = 3;
  config.initial = Vector::Constant(1, 1.0);
  config.seed = 99;

  const Chain chain = metropolis_hastings(problem, config);
  const Chain again = metropolis_hastings(problem, config);
  CHECK(chain.samples == again.samples);  // fixed seed, identical chain

  // Oracle: replicate the sampler loop with the same substream.
  Rng rng = Rng(99).substream("mcmc");
  Vector current = config.initial;
  auto lp = [&](const Vector &mu) {
    if (mu[0] < 0.0 || mu[0] > 2.0) return -std::numeric_limits<double>::infinity();
    const double r = 1.2 - mu[0] * mu[0];
    return -0.5 * r * r / 0.25;
  };
  double current_lp = lp(current);
  int accepted = 0;
  for (Index it = 0; it < 400; ++it) {
    Vector cand(1);
    cand[0] = rng.uniform(0.0, 2.0);
    const double cand_lp = lp(cand);
    const double log_alpha = std::min(0.0, cand_lp - current_lp);
    const double u = rng.uniform();
    const bool improving = cand_lp >= current_lp;
    const bool accept =
        std::log(u > 0.0 ? u : std::numeric_limits<double>::min()) < log_alpha;
    if (improving) CHECK(accept);  // strictly improving moves always pass
    if (accept) {
      current = cand;
      current_lp = cand_lp;
      ++accepted;
    }
    CHECK(chain.samples(it, 0) == current[0]);
  }
  CHECK(chain.accepted == accepted);
}

TEST_CASE("detailed-balance smoke test between half boxes")
{
  InverseProblem problem;
  problem.prior = box1d(0.0, 1.0);
  problem.noise_variance = 1.0;
  problem.y_obs = Vector::Constant(1, 0.0);
  problem.forward = [](const Vector &) { return Vector::Constant(1, 0.0); };

  McmcConfig config;
  config.num_iterations = 40000;
  config.burn_in = 0;
  config.thinning = 1;
  config.initial = Vector::Constant(1, 0.2);
  config.seed = 31;
  const Chain chain = metropolis_hastings(problem, config);

  int lo_to_hi = 0, hi_to_lo = 0;
  for (Index it = 1; it < chain.samples.rows(); ++it) {
    const bool was_lo = chain.samples(it - 1, 0) < 0.5;
    const bool is_lo = chain.samples(it, 0) < 0.5;
    if (was_lo && !is_lo) ++lo_to_hi;
    if (!was_lo && is_lo) ++hi_to_lo;
  }
  const double total = lo_to_hi + hi_to_lo;
  CHECK(std::abs(lo_to_hi - hi_to_lo) <= 3.0 * std::sqrt(total));
}

TEST_CASE("chain summary statistics")
{
  SUBCASE("identical samples: zero std, spike density")
  {
    Chain chain;
    chain.kept = Matrix::Constant(40, 1, 2.5);
    chain.samples = chain.kept;
    const ChainSummary summary = chain_summary(chain);
    CHECK(summary.std[0] == 0.0);
    CHECK(summary.mean[0] == doctest::Approx(2.5));
    CHECK(summary.densities[0].density.maxCoeff() > 1e6);
  }

  SUBCASE("uniform samples match the sort oracle quantiles")
  {
    Rng rng(8);
    const Index n = 2001;
    Chain chain;
    chain.kept.resize(n, 1);
    for (Index i = 0; i < n; ++i) chain.kept(i, 0) = rng.uniform();
    const ChainSummary summary = chain_summary(chain);

    std::vector<double> sorted(chain.kept.col(0).data(), chain.kept.col(0).data() + n);
    std::sort(sorted.begin(), sorted.end());
    auto type7 = [&](double p) {
      const double h = (n - 1) * p;
      const auto lo = static_cast<std::size_t>(h);
      return sorted[lo] + (h - lo) * (sorted[lo + 1] - sorted[lo]);
    };
    CHECK(summary.quantiles(0, 0) == doctest::Approx(type7(0.05)).epsilon(1e-12));
    CHECK(summary.quantiles(0, 1) == doctest::Approx(type7(0.50)).epsilon(1e-12));
    CHECK(summary.quantiles(0, 2) == doctest::Approx(type7(0.95)).epsilon(1e-12));
  }

  SUBCASE("the KDE integrates to one")
  {
    Rng rng(9);
    Vector samples(500);
    for (Index i = 0; i < 500; ++i) samples[i] = rng.normal() * 2.0 + 1.0;
    const Kde kde = gaussian_kde(samples);
    double integral = 0.0;
    for (Index g = 1; g < kde.grid.size(); ++g)
      integral += 0.5 * (kde.density[g] + kde.density[g - 1]) * (kde.grid[g] - kde.grid[g - 1]);
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-2));
  }

  SUBCASE("empty kept set is an error")
  {
    Chain chain;
    chain.kept.resize(0, 1);
    CHECK_THROWS_AS(chain_summary(chain), Error);
  }
}

TEST_CASE("config validation")
{
  const ParameterSpace prior = box1d(0.0, 1.0);
  McmcConfig config;
  config.initial = Vector::Constant(1, 0.5);
  config.num_iterations = 100;
  config.burn_in = 100;
  CHECK_THROWS_AS(config.validate(prior), Error);
  config.burn_in = 10;
  config.initial = Vector::Constant(1, 2.0);
  CHECK_THROWS_AS(config.validate(prior), Error);
}

TEST_CASE("a chain that accepts nothing finishes with a warning, not an error")
{
  InverseProblem problem;
  problem.prior = box1d(0.0, 1.0);
  problem.noise_variance = 1e-24;  // any candidate off the target is hopeless
  problem.y_obs = Vector::Constant(1, 0.5);
  problem.forward = [](const Vector &mu) { return mu; };
  McmcConfig config;
  config.num_iterations = 200;
  config.burn_in = 10;
  config.thinning = 1;
  config.initial = Vector::Constant(1, 0.5);
  config.seed = 4;
  const Chain chain = metropolis_hastings(problem, config);
  CHECK(chain.accepted == 0);
  CHECK(chain.kept.rows() == 190);
  CHECK((chain.kept.col(0).array() == 0.5).all());
}
