#include <doctest.h>

#include <set>

#include "romuq/rng.hpp"

using romuq::Rng;

TEST_CASE("identical seeds give identical streams")
{
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("substreams are independent of parent draws")
{
  Rng parent(7);
  Rng sub1 = parent.substream("morris");
  parent.next_u64();
  Rng sub2 = Rng(7).substream("morris");
  for (int i = 0; i < 10; ++i) CHECK(sub1.next_u64() == sub2.next_u64());
}

TEST_CASE("named substreams differ")
{
  Rng parent(7);
  CHECK(parent.substream("morris").next_u64() != parent.substream("sobol").next_u64());
  CHECK(parent.substream(0).next_u64() != parent.substream(1).next_u64());
}

TEST_CASE("uniform stays in [0,1) and is not constant")
{
  Rng rng(3);
  std::set<double> seen;
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    seen.insert(u);
  }
  CHECK(seen.size() > 990);
}

TEST_CASE("normal has roughly unit variance")
{
  Rng rng(11);
  double sum = 0.0, sumsq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.03);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("permutation is a permutation")
{
  Rng rng(5);
  const auto p = rng.permutation(50);
  std::set<std::size_t> unique(p.begin(), p.end());
  CHECK(unique.size() == 50);
  CHECK(*unique.rbegin() == 49);
}
