#ifndef ROMUQ_RNG_HPP
#define ROMUQ_RNG_HPP

#include <cstdint>
#include <string_view>
#include <vector>

namespace romuq
{

// Counter-free seedable random stream. All randomness in the library flows
// through this class so that results are reproducible bit-for-bit: the
// standard-library distributions are implementation-defined and are not used.
// Named substreams let independent pipeline stages draw from one study seed
// without consuming each other's state.
class Rng
{
public:
  explicit Rng(std::uint64_t seed);

  // Derive an independent stream from a stage name ("morris", "mcmc", ...)
  // or an index (sample id, GP restart id). Derivation is pure.
  Rng substream(std::string_view name) const;
  Rng substream(std::uint64_t index) const;

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller (second variate cached).
  double normal();

  // Uniform integer in {0, ..., n-1} by rejection sampling.
  std::size_t uniform_index(std::size_t n);

  // Fisher-Yates permutation of {0, ..., n-1}.
  std::vector<std::size_t> permutation(std::size_t n);

private:
  std::uint64_t state_[4];
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace romuq

#endif  // ROMUQ_RNG_HPP
