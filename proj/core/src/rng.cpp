#include "romuq/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace romuq
{

namespace
{

// splitmix64, used for seeding and stream derivation.
std::uint64_t splitmix64(std::uint64_t &x)
{
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view s)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed)
{
  // xoshiro256** state filled from splitmix64 per its authors' recommendation.
  std::uint64_t s = seed;
  for (auto &word : state_) word = splitmix64(s);
}

Rng Rng::substream(std::string_view name) const
{
  std::uint64_t mix = state_[0] ^ rotl(state_[2], 17);
  return Rng(mix ^ fnv1a64(name));
}

Rng Rng::substream(std::uint64_t index) const
{
  std::uint64_t mix = state_[0] ^ rotl(state_[2], 17);
  std::uint64_t x = mix + 0x9e3779b97f4a7c15ULL * (index + 1);
  return Rng(splitmix64(x));
}

std::uint64_t Rng::next_u64()
{
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::uniform()
{
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi)
{
  return lo + (hi - lo) * uniform();
}

double Rng::normal()
{
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(theta);
  has_cached_normal_ = true;
  return r * std::cos(theta);
}

std::size_t Rng::uniform_index(std::size_t n)
{
  if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return static_cast<std::size_t>(x % n);
}

std::vector<std::size_t> Rng::permutation(std::size_t n)
{
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = uniform_index(i);
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

}  // namespace romuq
