#include "romuq/uq.hpp"

#include <cmath>
#include <limits>

#include "romuq/error.hpp"
#include "romuq/rng.hpp"

namespace romuq
{

MorrisDesign morris_design(const ParameterSpace &space, int num_trajectories, int levels,
                           std::uint64_t seed)
{
  space.validate();
  if (num_trajectories < 1) throw Error("morris_design: need at least one trajectory");
  if (levels < 2 || levels % 2 != 0)
    throw Error("morris_design: levels must be even and >= 2 for equal-probability sampling");

  const Index p = space.dim();
  const int iota = levels;
  const double delta = static_cast<double>(iota) / (2.0 * (iota - 1));
  // delta spans iota/2 grid cells of width 1/(iota-1); a move must stay on
  // the grid, which constrains the admissible start levels per direction.
  const int steps = iota / 2;

  MorrisDesign design;
  design.levels = levels;
  design.delta = delta;
  design.num_inputs = p;
  design.num_trajectories = num_trajectories;
  design.unit_points.resize(static_cast<Index>(num_trajectories) * (p + 1), p);
  design.moved_input.resize(static_cast<std::size_t>(num_trajectories));
  design.move_sign.resize(static_cast<std::size_t>(num_trajectories));

  Rng rng = Rng(seed).substream("morris");
  for (int j = 0; j < num_trajectories; ++j) {
    std::vector<int> sign(static_cast<std::size_t>(p));
    Vector point(p);
    for (Index i = 0; i < p; ++i) {
      const bool up = rng.uniform() < 0.5;
      sign[static_cast<std::size_t>(i)] = up ? 1 : -1;
      const int base = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(steps)));
      const int level = up ? base : base + steps;
      point[i] = static_cast<double>(level) / (iota - 1);
    }
    const auto order = rng.permutation(static_cast<std::size_t>(p));

    const Index row0 = static_cast<Index>(j) * (p + 1);
    design.unit_points.row(row0) = point.transpose();
    for (Index s = 0; s < p; ++s) {
      const Index input = static_cast<Index>(order[static_cast<std::size_t>(s)]);
      point[input] += sign[static_cast<std::size_t>(input)] * delta;
      design.unit_points.row(row0 + s + 1) = point.transpose();
      design.moved_input[static_cast<std::size_t>(j)].push_back(input);
      design.move_sign[static_cast<std::size_t>(j)].push_back(sign[static_cast<std::size_t>(input)]);
    }
  }

  design.physical_points.resize(design.unit_points.rows(), p);
  for (Index r = 0; r < design.unit_points.rows(); ++r)
    design.physical_points.row(r) = space.from_unit(design.unit_points.row(r).transpose()).transpose();
  return design;
}

MorrisResult morris_indices(const MorrisDesign &design, const Matrix &outputs)
{
  if (outputs.rows() != design.num_points())
    throw DimensionError("morris_indices: outputs do not match the design points");
  const Index p = design.num_inputs;
  const Index q = outputs.cols();
  const int r = design.num_trajectories;

  MorrisResult res;
  res.mean.setZero(p, q);
  res.mean_abs.setZero(p, q);
  res.spread.setZero(p, q);
  res.spread_defined = r > 1;

  // EE per (trajectory, input, qoi).
  std::vector<Matrix> effects(static_cast<std::size_t>(r), Matrix::Zero(p, q));
  for (int j = 0; j < r; ++j) {
    const Index row0 = static_cast<Index>(j) * (p + 1);
    for (Index s = 0; s < p; ++s) {
      const Index input = design.moved_input[static_cast<std::size_t>(j)][static_cast<std::size_t>(s)];
      const int sign = design.move_sign[static_cast<std::size_t>(j)][static_cast<std::size_t>(s)];
      const auto before = outputs.row(row0 + s);
      const auto after = outputs.row(row0 + s + 1);
      effects[static_cast<std::size_t>(j)].row(input) = (after - before) / (sign * design.delta);
    }
  }

  for (const auto &ee : effects) {
    res.mean += ee;
    res.mean_abs += ee.cwiseAbs();
  }
  res.mean /= r;
  res.mean_abs /= r;

  if (res.spread_defined) {
    for (const auto &ee : effects) res.spread += (ee - res.mean).array().square().matrix();
    res.spread /= (r - 1);
  } else {
    res.spread.setConstant(std::numeric_limits<double>::quiet_NaN());
  }
  return res;
}

Matrix min_max_scale_columns(const Matrix &values)
{
  Matrix out = values;
  for (Index c = 0; c < out.cols(); ++c) {
    const double lo = out.col(c).minCoeff();
    const double hi = out.col(c).maxCoeff();
    if (hi > lo)
      out.col(c) = (out.col(c).array() - lo) / (hi - lo);
    else
      out.col(c).setZero();
  }
  return out;
}

SaltelliDesign saltelli_design(const ParameterSpace &space, Index num_samples, std::uint64_t seed)
{
  space.validate();
  if (num_samples < 2) throw Error("saltelli_design: need at least two base samples");
  const Index p = space.dim();

  SaltelliDesign design;
  design.num_samples = num_samples;
  design.num_inputs = p;
  design.points.resize(num_samples * (p + 2), p);

  Rng rng = Rng(seed).substream("sobol");
  Matrix a(num_samples, p), b(num_samples, p);
  for (Index i = 0; i < num_samples; ++i)
    for (Index j = 0; j < p; ++j) a(i, j) = rng.uniform(space.lower[j], space.upper[j]);
  for (Index i = 0; i < num_samples; ++i)
    for (Index j = 0; j < p; ++j) b(i, j) = rng.uniform(space.lower[j], space.upper[j]);

  design.points.topRows(num_samples) = a;
  design.points.middleRows(design.b_offset(), num_samples) = b;
  for (Index input = 0; input < p; ++input) {
    Matrix ab = a;
    ab.col(input) = b.col(input);
    design.points.middleRows(design.ab_offset(input), num_samples) = ab;
  }
  return design;
}

SobolNumerators sobol_numerators(const SaltelliDesign &design, const Matrix &outputs)
{
  if (outputs.rows() != design.rows())
    throw DimensionError("sobol_indices: outputs do not match the design rows");
  const Index n = design.num_samples;
  const Index p = design.num_inputs;
  const Index q = outputs.cols();

  SobolNumerators num;
  num.closed.setZero(p, q);
  num.total.setZero(p, q);
  num.variance.setZero(q);

  for (Index c = 0; c < q; ++c) {
    const Vector ya = outputs.col(c).segment(design.a_offset(), n);
    const Vector yb = outputs.col(c).segment(design.b_offset(), n);
    Vector pooled(2 * n);
    pooled << ya, yb;
    const double mean = pooled.mean();
    num.variance[c] = (pooled.array() - mean).square().sum() / (2.0 * n - 1.0);
    for (Index i = 0; i < p; ++i) {
      const Vector yab = outputs.col(c).segment(design.ab_offset(i), n);
      // Jansen estimators.
      num.closed(i, c) = num.variance[c] - (yb - yab).squaredNorm() / (2.0 * n);
      num.total(i, c) = (ya - yab).squaredNorm() / (2.0 * n);
    }
  }
  return num;
}

SobolResult sobol_indices(const SaltelliDesign &design, const Matrix &outputs)
{
  const SobolNumerators num = sobol_numerators(design, outputs);
  const Index n = design.num_samples;
  const Index p = design.num_inputs;
  const Index q = outputs.cols();

  for (Index c = 0; c < q; ++c)
    if (!(num.variance[c] > 0.0))
      throw DegenerateDataError("sobol_indices: output " + std::to_string(c) +
                                " has zero variance, indices are undefined");

  SobolResult res;
  res.variance = num.variance;
  res.first_order.resize(p, q);
  res.total_effect.resize(p, q);
  res.first_order_se.resize(p, q);
  res.total_effect_se.resize(p, q);

  for (Index c = 0; c < q; ++c) {
    const double v = num.variance[c];
    const Vector ya = outputs.col(c).segment(design.a_offset(), n);
    const Vector yb = outputs.col(c).segment(design.b_offset(), n);
    for (Index i = 0; i < p; ++i) {
      const Vector yab = outputs.col(c).segment(design.ab_offset(i), n);
      res.first_order(i, c) = num.closed(i, c) / v;
      res.total_effect(i, c) = num.total(i, c) / v;

      // Delta-method standard errors of the Jansen sums.
      const Vector db = 0.5 * (yb - yab).array().square();
      const Vector da = 0.5 * (ya - yab).array().square();
      const double sd_b = std::sqrt((db.array() - db.mean()).square().sum() / (n - 1.0));
      const double sd_a = std::sqrt((da.array() - da.mean()).square().sum() / (n - 1.0));
      res.first_order_se(i, c) = sd_b / (v * std::sqrt(static_cast<double>(n)));
      res.total_effect_se(i, c) = sd_a / (v * std::sqrt(static_cast<double>(n)));
    }
  }
  return res;
}

TimeIntegratedSobol time_integrated_sobol(const Vector &times, const Matrix &closed_numerators,
                                          const Matrix &total_numerators, const Vector &variances)
{
  const Index nt = times.size();
  const Index p = closed_numerators.rows();
  if (closed_numerators.cols() != nt || total_numerators.cols() != nt || variances.size() != nt)
    throw DimensionError("time_integrated_sobol: per-step data do not match the time grid");

  TimeIntegratedSobol out;
  out.first_order.setConstant(p, nt, std::numeric_limits<double>::quiet_NaN());
  out.total_effect.setConstant(p, nt, std::numeric_limits<double>::quiet_NaN());

  // Cumulative trapezoid over [t^1, t^n]; the first grid point has an empty
  // integration range, where the plain pointwise index is the natural limit.
  Vector cum_var = Vector::Zero(nt);
  Matrix cum_closed = Matrix::Zero(p, nt);
  Matrix cum_total = Matrix::Zero(p, nt);
  for (Index k = 1; k < nt; ++k) {
    const double h = 0.5 * (times[k] - times[k - 1]);
    cum_var[k] = cum_var[k - 1] + h * (variances[k] + variances[k - 1]);
    cum_closed.col(k) = cum_closed.col(k - 1) + h * (closed_numerators.col(k) + closed_numerators.col(k - 1));
    cum_total.col(k) = cum_total.col(k - 1) + h * (total_numerators.col(k) + total_numerators.col(k - 1));
  }

  if (variances[0] > 0.0) {
    out.first_order.col(0) = closed_numerators.col(0) / variances[0];
    out.total_effect.col(0) = total_numerators.col(0) / variances[0];
  }
  for (Index k = 1; k < nt; ++k) {
    if (!(cum_var[k] > 0.0)) continue;
    out.first_order.col(k) = cum_closed.col(k) / cum_var[k];
    out.total_effect.col(k) = cum_total.col(k) / cum_var[k];
  }
  return out;
}

}  // namespace romuq
