#ifndef ROMUQ_SAMPLING_HPP
#define ROMUQ_SAMPLING_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "romuq/rng.hpp"
#include "romuq/types.hpp"

namespace romuq
{

// Hyper-rectangle of physical inputs.
struct ParameterSpace
{
  std::vector<std::string> names;
  Vector lower;
  Vector upper;

  Index dim() const { return lower.size(); }
  Vector range() const { return upper - lower; }
  bool contains(const Vector &mu) const;
  // Throws DimensionError / Error unless lower_i < upper_i for all i.
  void validate() const;

  Vector from_unit(const Vector &unit) const { return lower + unit.cwiseProduct(range()); }
  Vector to_unit(const Vector &mu) const { return (mu - lower).cwiseQuotient(range()); }
};

// Stratified design: one point per stratum per dimension, uniform jitter
// within each stratum. Rows are samples, columns follow space.names order.
Matrix lhs_sample(const ParameterSpace &space, Index num_samples, std::uint64_t seed);
Matrix lhs_sample(const ParameterSpace &space, Index num_samples, Rng &rng);

enum class ScalerKind
{
  MinMax,       // row -> (row - min) / (max - min)
  Standardize,  // row -> (row - mean) / std, population std
};

ScalerKind scaler_kind_from_string(const std::string &name);
std::string to_string(ScalerKind kind);

// Per-row affine transform with statistics learned from training data only.
// Stored as scaled = (x - shift) / scale so min-max and standardization share
// one inverse. Test data may land outside [0,1] or beyond +-3; no clipping.
class Scaler
{
public:
  Scaler() = default;

  // Rows of `training` are features, columns are observations. A constant row
  // throws DegenerateFeatureError unless allow_constant_rows is set, in which
  // case the row's scale is fixed at 1 (shift still applies).
  static Scaler fit(ScalerKind kind, const Matrix &training, bool allow_constant_rows = false);
  static Scaler fit(ScalerKind kind, const Vector &training, bool allow_constant_rows = false);

  Matrix apply(const Matrix &data) const;
  Vector apply(const Vector &data) const;
  Matrix invert(const Matrix &scaled) const;
  Vector invert(const Vector &scaled) const;

  ScalerKind kind() const { return kind_; }
  Index rows() const { return shift_.size(); }
  const Vector &shift() const { return shift_; }
  const Vector &scale() const { return scale_; }

  static Scaler from_stats(ScalerKind kind, Vector shift, Vector scale);

private:
  ScalerKind kind_ = ScalerKind::Standardize;
  Vector shift_;
  Vector scale_;
};

}  // namespace romuq

#endif  // ROMUQ_SAMPLING_HPP
