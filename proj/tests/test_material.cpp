#include <doctest.h>

#include <cmath>

#include "romuq/error.hpp"
#include "romuq/material.hpp"
#include "romuq/rng.hpp"

using namespace romuq;

namespace
{

MaterialParams beam_material()
{
  MaterialParams mat;
  mat.b_f = 8.0;
  mat.b_s = 2.0;
  mat.b_n = 2.0;
  mat.b_fs = 4.0;
  mat.b_fn = 4.0;
  mat.b_sn = 2.0;
  mat.bulk_modulus = 50.0;
  mat.scaling = 2.0;
  mat.pressure_slope = 0.004;
  return mat;
}

Matrix3 random_near_identity(Rng &rng, double spread)
{
  Matrix3 f;
  do {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) f(i, j) = (i == j ? 1.0 : 0.0) + rng.uniform(-spread, spread);
  } while (f.determinant() <= 0.0);
  return f;
}

// Central finite differences of the energy.
Matrix3 fd_piola(const Matrix3 &f, const MaterialParams &mat, double h)
{
  Matrix3 p;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Matrix3 fp = f, fm = f;
      fp(i, j) += h;
      fm(i, j) -= h;
      p(i, j) = (strain_energy(fp, mat) - strain_energy(fm, mat)) / (2.0 * h);
    }
  return p;
}

}  // namespace

TEST_CASE("undeformed state has zero energy and zero stress")
{
  const auto mat = beam_material();
  CHECK(strain_energy(Matrix3::Identity(), mat) == doctest::Approx(0.0).epsilon(1e-14));
  const auto stress = piola_stress(Matrix3::Identity(), mat);
  CHECK(stress.piola.norm() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("uniaxial stretch matches the scalar formula")
{
  // b_f alone, C = 2, K = 0: W = exp(Q) - 1 with Q = b_f Exx^2.
  MaterialParams mat;
  mat.b_f = 4.0;
  mat.b_s = mat.b_n = mat.b_fs = mat.b_fn = mat.b_sn = 1e-30;
  mat.scaling = 2.0;
  mat.bulk_modulus = 1e-30;
  const double eps = 1e-3;
  Matrix3 f = Matrix3::Identity();
  f(0, 0) = 1.0 + eps;
  const double exx = eps + 0.5 * eps * eps;
  const double expected = std::exp(4.0 * exx * exx) - 1.0;
  CHECK(strain_energy(f, mat) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("non-positive det(F) is rejected")
{
  const auto mat = beam_material();
  Matrix3 f = Matrix3::Identity();
  f(0, 0) = -1.0;
  CHECK_THROWS_AS(strain_energy(f, mat), SingularDeformationError);
  CHECK_THROWS_AS(piola_stress(f, mat), SingularDeformationError);
}

TEST_CASE("analytic stress matches finite differences on 100 random states")
{
  const auto mat = beam_material();
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix3 f = random_near_identity(rng, 0.05);
    const auto stress = piola_stress(f, mat);
    const Matrix3 fd = fd_piola(f, mat, 1e-6);
    CHECK((stress.piola - fd).norm() <= 1e-6 * fd.norm());
  }
}

TEST_CASE("analytic tangent matches finite differences of the stress")
{
  const auto mat = beam_material();
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix3 f = random_near_identity(rng, 0.05);
    const auto stress = piola_stress(f, mat);
    const double h = 1e-6;
    double num = 0.0, den = 0.0;
    for (int m = 0; m < 3; ++m)
      for (int n = 0; n < 3; ++n) {
        Matrix3 fp = f, fm = f;
        fp(m, n) += h;
        fm(m, n) -= h;
        const Matrix3 dp = (piola_stress(fp, mat).piola - piola_stress(fm, mat).piola) / (2.0 * h);
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            const double diff = stress.tangent(3 * i + j, 3 * m + n) - dp(i, j);
            num += diff * diff;
            den += dp(i, j) * dp(i, j);
          }
      }
    CHECK(std::sqrt(num) <= 1e-5 * std::sqrt(den));
  }
}

TEST_CASE("volumetric energy is frame indifferent")
{
  const auto mat = beam_material();
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix3 f = random_near_identity(rng, 0.05);
    // Random rotation via QR of a random matrix.
    Matrix3 g;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Matrix3> qr(g);
    Matrix3 rot = qr.householderQ();
    if (rot.determinant() < 0) rot.col(0) = -rot.col(0);

    const double w1 = volumetric_energy(f, mat);
    const double w2 = volumetric_energy(rot * f, mat);
    CHECK(w1 == doctest::Approx(w2).epsilon(1e-12));
  }
}

TEST_CASE("parameter vector round trip preserves Table-2 ordering")
{
  Vector mu(9);
  mu << 4, 1, 1, 2, 2, 1, 25, 1, 0.002;
  const MaterialParams mat = MaterialParams::from_vector(mu, 1000.0);
  CHECK(mat.b_f == 4.0);
  CHECK(mat.bulk_modulus == 25.0);
  CHECK(mat.scaling == 1.0);
  CHECK(mat.pressure_slope == 0.002);
  CHECK((mat.to_vector() - mu).norm() == 0.0);
}

TEST_CASE("validate rejects non-positive constants")
{
  auto mat = beam_material();
  mat.scaling = 0.0;
  CHECK_THROWS_AS(mat.validate(), Error);
  mat = beam_material();
  mat.bulk_modulus = -1.0;
  CHECK_THROWS_AS(mat.validate(), Error);
}
