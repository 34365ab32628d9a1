#include "romuq/sampling.hpp"

#include <cmath>

#include "romuq/error.hpp"

namespace romuq
{

bool ParameterSpace::contains(const Vector &mu) const
{
  if (mu.size() != dim()) return false;
  return (mu.array() >= lower.array()).all() && (mu.array() <= upper.array()).all();
}

void ParameterSpace::validate() const
{
  if (lower.size() != upper.size() || static_cast<Index>(names.size()) != lower.size())
    throw DimensionError("ParameterSpace: names/lower/upper sizes disagree");
  for (Index i = 0; i < dim(); ++i) {
    if (!(lower[i] < upper[i]))
      throw Error("ParameterSpace: lower >= upper for input '" + names[i] + "'");
  }
}

Matrix lhs_sample(const ParameterSpace &space, Index num_samples, Rng &rng)
{
  space.validate();
  if (num_samples < 1) throw Error("lhs_sample: need at least one sample");
  const Index p = space.dim();
  const auto n = static_cast<std::size_t>(num_samples);
  Matrix design(num_samples, p);
  for (Index j = 0; j < p; ++j) {
    const auto strata = rng.permutation(n);
    for (Index i = 0; i < num_samples; ++i) {
      const double unit = (static_cast<double>(strata[static_cast<std::size_t>(i)]) + rng.uniform()) /
                          static_cast<double>(num_samples);
      design(i, j) = space.lower[j] + unit * (space.upper[j] - space.lower[j]);
    }
  }
  return design;
}

Matrix lhs_sample(const ParameterSpace &space, Index num_samples, std::uint64_t seed)
{
  Rng rng(seed);
  return lhs_sample(space, num_samples, rng);
}

ScalerKind scaler_kind_from_string(const std::string &name)
{
  if (name == "min-max") return ScalerKind::MinMax;
  if (name == "standardize") return ScalerKind::Standardize;
  throw Error("unknown scaler kind: " + name);
}

std::string to_string(ScalerKind kind)
{
  return kind == ScalerKind::MinMax ? "min-max" : "standardize";
}

Scaler Scaler::fit(ScalerKind kind, const Matrix &training, bool allow_constant_rows)
{
  Scaler s;
  s.kind_ = kind;
  const Index m = training.rows();
  s.shift_.resize(m);
  s.scale_.resize(m);
  for (Index i = 0; i < m; ++i) {
    const auto row = training.row(i);
    double shift = 0.0, scale = 0.0;
    if (kind == ScalerKind::MinMax) {
      shift = row.minCoeff();
      scale = row.maxCoeff() - shift;
    } else {
      shift = row.mean();
      scale = std::sqrt((row.array() - shift).square().mean());
    }
    if (scale <= 0.0) {
      if (!allow_constant_rows) throw DegenerateFeatureError(i);
      scale = 1.0;
    }
    s.shift_[i] = shift;
    s.scale_[i] = scale;
  }
  return s;
}

Scaler Scaler::fit(ScalerKind kind, const Vector &training, bool allow_constant_rows)
{
  return fit(kind, Matrix(training.transpose()), allow_constant_rows);
}

Scaler Scaler::from_stats(ScalerKind kind, Vector shift, Vector scale)
{
  if (shift.size() != scale.size()) throw DimensionError("Scaler::from_stats: size mismatch");
  Scaler s;
  s.kind_ = kind;
  s.shift_ = std::move(shift);
  s.scale_ = std::move(scale);
  return s;
}

Matrix Scaler::apply(const Matrix &data) const
{
  if (data.rows() != rows()) throw DimensionError("Scaler::apply: row count mismatch");
  return (data.colwise() - shift_).array().colwise() / scale_.array();
}

Vector Scaler::apply(const Vector &data) const
{
  if (rows() == 1) {
    return (data.array() - shift_[0]) / scale_[0];
  }
  if (data.size() != rows()) throw DimensionError("Scaler::apply: vector size mismatch");
  return (data - shift_).cwiseQuotient(scale_);
}

Matrix Scaler::invert(const Matrix &scaled) const
{
  if (scaled.rows() != rows()) throw DimensionError("Scaler::invert: row count mismatch");
  return (scaled.array().colwise() * scale_.array()).colwise() + shift_.array();
}

Vector Scaler::invert(const Vector &scaled) const
{
  if (rows() == 1) {
    return scaled.array() * scale_[0] + shift_[0];
  }
  if (scaled.size() != rows()) throw DimensionError("Scaler::invert: vector size mismatch");
  return scaled.cwiseProduct(scale_) + shift_;
}

}  // namespace romuq
