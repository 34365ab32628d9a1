#include "romuq/material.hpp"

#include <cmath>

#include "romuq/error.hpp"

namespace romuq
{

Matrix3 MaterialParams::exponent_matrix() const
{
  Matrix3 b;
  b << b_f, b_fs, b_fn,
       b_fs, b_s, b_sn,
       b_fn, b_sn, b_n;
  return b;
}

void MaterialParams::validate() const
{
  auto positive = [](double v, const char *name) {
    if (!(v > 0.0)) throw Error(std::string("MaterialParams: ") + name + " must be positive");
  };
  positive(b_f, "b_f");
  positive(b_s, "b_s");
  positive(b_n, "b_n");
  positive(b_fs, "b_fs");
  positive(b_fn, "b_fn");
  positive(b_sn, "b_sn");
  positive(bulk_modulus, "K");
  positive(scaling, "C");
  positive(density, "rho");
}

MaterialParams MaterialParams::from_vector(const Vector &mu, double density)
{
  if (mu.size() != 9) throw DimensionError("MaterialParams::from_vector: expected 9 entries");
  MaterialParams m;
  m.b_f = mu[0];
  m.b_s = mu[1];
  m.b_n = mu[2];
  m.b_fs = mu[3];
  m.b_fn = mu[4];
  m.b_sn = mu[5];
  m.bulk_modulus = mu[6];
  m.scaling = mu[7];
  m.pressure_slope = mu[8];
  m.density = density;
  return m;
}

Vector MaterialParams::to_vector() const
{
  Vector mu(9);
  mu << b_f, b_s, b_n, b_fs, b_fn, b_sn, bulk_modulus, scaling, pressure_slope;
  return mu;
}

double strain_energy(const Matrix3 &F, const MaterialParams &mat)
{
  const double J = F.determinant();
  if (J <= 0.0) throw SingularDeformationError(J);
  const Matrix3 E = 0.5 * (F.transpose() * F - Matrix3::Identity());
  const Matrix3 B = mat.exponent_matrix();
  const double Q = (B.array() * E.array().square()).sum();
  return 0.5 * mat.scaling * (std::exp(Q) - 1.0) + 0.5 * mat.bulk_modulus * (J - 1.0) * std::log(J);
}

double volumetric_energy(const Matrix3 &F, const MaterialParams &mat)
{
  const double J = F.determinant();
  if (J <= 0.0) throw SingularDeformationError(J);
  return 0.5 * mat.bulk_modulus * (J - 1.0) * std::log(J);
}

StressResult piola_stress(const Matrix3 &F, const MaterialParams &mat)
{
  const double J = F.determinant();
  if (J <= 0.0) throw SingularDeformationError(J);

  const Matrix3 B = mat.exponent_matrix();
  const Matrix3 E = 0.5 * (F.transpose() * F - Matrix3::Identity());
  const double Q = (B.array() * E.array().square()).sum();
  const double expq = std::exp(Q);
  const Matrix3 G = 2.0 * B.cwiseProduct(E);  // dQ/dE
  const Matrix3 FG = F * G;                   // dQ/dF
  const Matrix3 Finv = F.inverse();
  const Matrix3 FinvT = Finv.transpose();
  const double logj = std::log(J);
  const double h = J * logj + J - 1.0;   // 2/K * dW_vol/dF coefficient of F^-T
  const double dh = logj + 2.0;          // dh/dJ

  StressResult out;
  out.piola = 0.5 * mat.scaling * expq * FG + 0.5 * mat.bulk_modulus * h * FinvT;

  // dP_ij/dF_mn assembled term by term; verified against finite differences.
  auto &A = out.tangent;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const int row = 3 * i + j;
      for (int m = 0; m < 3; ++m)
        for (int n = 0; n < 3; ++n) {
          double iso = FG(i, j) * FG(m, n);
          if (i == m) iso += G(n, j);
          iso += F(i, n) * B(n, j) * F(m, j);
          if (j == n) {
            double acc = 0.0;
            for (int l = 0; l < 3; ++l) acc += F(i, l) * B(l, j) * F(m, l);
            iso += acc;
          }
          const double vol = dh * J * FinvT(m, n) * FinvT(i, j) - h * Finv(j, m) * Finv(n, i);
          A(row, 3 * m + n) = 0.5 * mat.scaling * expq * iso + 0.5 * mat.bulk_modulus * vol;
        }
    }
  return out;
}

}  // namespace romuq
