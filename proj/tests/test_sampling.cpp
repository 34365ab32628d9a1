#include <doctest.h>

#include <vector>

#include "romuq/error.hpp"
#include "romuq/sampling.hpp"

using namespace romuq;

namespace
{

ParameterSpace unit_square()
{
  ParameterSpace space;
  space.names = {"a", "b"};
  space.lower = Vector::Zero(2);
  space.upper = Vector::Ones(2);
  return space;
}

}  // namespace

TEST_CASE("lhs: single sample lies inside the bounds")
{
  ParameterSpace space;
  space.names = {"x"};
  space.lower = Vector::Constant(1, 2.0);
  space.upper = Vector::Constant(1, 5.0);
  const Matrix design = lhs_sample(space, 1, 99);
  CHECK(design.rows() == 1);
  CHECK(design(0, 0) >= 2.0);
  CHECK(design(0, 0) <= 5.0);
}

TEST_CASE("lhs: one point per stratum in every dimension")
{
  const auto space = unit_square();
  const Index n = 10;
  const Matrix design = lhs_sample(space, n, 123);
  for (Index j = 0; j < 2; ++j) {
    std::vector<int> counts(static_cast<std::size_t>(n), 0);
    for (Index i = 0; i < n; ++i) {
      const int stratum = static_cast<int>(design(i, j) * static_cast<double>(n));
      REQUIRE(stratum >= 0);
      REQUIRE(stratum < n);
      ++counts[static_cast<std::size_t>(stratum)];
    }
    for (int c : counts) CHECK(c == 1);
  }
}

TEST_CASE("lhs: stratification holds for several seeds and dimensions")
{
  ParameterSpace space;
  space.names = {"a", "b", "c"};
  space.lower = Vector::Constant(3, -1.0);
  space.upper = Vector::Constant(3, 3.0);
  for (std::uint64_t seed : {1ULL, 77ULL, 31415ULL}) {
    const Index n = 17;
    const Matrix design = lhs_sample(space, n, seed);
    for (Index j = 0; j < 3; ++j) {
      std::vector<int> counts(static_cast<std::size_t>(n), 0);
      for (Index i = 0; i < n; ++i) {
        const double unit = (design(i, j) - space.lower[j]) / (space.upper[j] - space.lower[j]);
        ++counts[static_cast<std::size_t>(unit * static_cast<double>(n))];
      }
      for (int c : counts) CHECK(c == 1);
    }
  }
}

TEST_CASE("lhs: same seed reproduces the design")
{
  const auto space = unit_square();
  CHECK(lhs_sample(space, 8, 5) == lhs_sample(space, 8, 5));
}

TEST_CASE("min-max scaler maps a row to [0,1]")
{
  Matrix row(1, 3);
  row << 0.0, 5.0, 10.0;
  const Scaler s = Scaler::fit(ScalerKind::MinMax, row);
  const Matrix scaled = s.apply(row);
  CHECK(scaled(0, 0) == doctest::Approx(0.0));
  CHECK(scaled(0, 1) == doctest::Approx(0.5));
  CHECK(scaled(0, 2) == doctest::Approx(1.0));
}

TEST_CASE("standardize uses the population std")
{
  Matrix row(1, 2);
  row << 1.0, 3.0;
  const Scaler s = Scaler::fit(ScalerKind::Standardize, row);
  const Matrix scaled = s.apply(row);
  CHECK(scaled(0, 0) == doctest::Approx(-1.0));
  CHECK(scaled(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("constant row raises a degenerate-feature error naming the row")
{
  Matrix rows(2, 3);
  rows << 1.0, 2.0, 3.0,
          2.0, 2.0, 2.0;
  for (auto kind : {ScalerKind::MinMax, ScalerKind::Standardize}) {
    try {
      Scaler::fit(kind, rows);
      FAIL("expected DegenerateFeatureError");
    } catch (const DegenerateFeatureError &err) {
      CHECK(err.row() == 1);
    }
  }
}

TEST_CASE("round trip is the identity to 1e-12 relative")
{
  Matrix data(3, 7);
  data.setRandom();
  data.row(1) *= 1e6;
  data.row(2) *= 1e-4;
  for (auto kind : {ScalerKind::MinMax, ScalerKind::Standardize}) {
    const Scaler s = Scaler::fit(kind, data);
    const Matrix round = s.invert(s.apply(data));
    CHECK((round - data).norm() <= 1e-12 * data.norm());
  }
}

TEST_CASE("scaled test data may leave [0,1]; no clipping happens")
{
  Matrix train(1, 2);
  train << 0.0, 1.0;
  const Scaler s = Scaler::fit(ScalerKind::MinMax, train);
  Matrix test(1, 1);
  test << 2.5;
  CHECK(s.apply(test)(0, 0) == doctest::Approx(2.5));
  Vector q(1);
  q << -3.0;
  CHECK(s.apply(q)[0] == doctest::Approx(-3.0));
}
