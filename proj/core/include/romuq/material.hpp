#ifndef ROMUQ_MATERIAL_HPP
#define ROMUQ_MATERIAL_HPP

#include "romuq/types.hpp"

namespace romuq
{

// Guccione-type transversely anisotropic material with a volumetric penalty,
//   W(F) = C/2 (exp(Q(E)) - 1) + K/2 (J - 1) ln J,
//   Q(E) = b_f E_xx^2 + b_s E_yy^2 + b_n E_zz^2
//        + 2 b_fs E_xy^2 + 2 b_fn E_xz^2 + 2 b_sn E_yz^2,
// with E = (F^T F - I)/2 in the fixed material frame (fiber = x, sheet = y,
// normal = z) and J = det F. Stresses are in kPa, as are C, K and the
// pressure-load slope.
struct MaterialParams
{
  double b_f = 0.0;
  double b_s = 0.0;
  double b_n = 0.0;
  double b_fs = 0.0;
  double b_fn = 0.0;
  double b_sn = 0.0;
  double bulk_modulus = 0.0;    // K, kPa
  double scaling = 0.0;         // C, kPa
  double pressure_slope = 0.0;  // p_tilde, kPa
  double density = 1.0e3;       // rho, kg/m^3

  // Symmetric matrix of the stiffness exponents entering Q.
  Matrix3 exponent_matrix() const;

  void validate() const;

  // Table-2 ordering [b_f, b_s, b_n, b_fs, b_fn, b_sn, K, C, p_tilde];
  // the density is not part of the sampled parameter vector.
  static MaterialParams from_vector(const Vector &mu, double density);
  Vector to_vector() const;
};

struct StressResult
{
  Matrix3 piola;                        // P = dW/dF, kPa
  Eigen::Matrix<double, 9, 9> tangent;  // tangent(3i+j, 3m+n) = dP_ij / dF_mn
};

// Strain energy density (kPa). Throws SingularDeformationError if det F <= 0.
double strain_energy(const Matrix3 &deformation_gradient, const MaterialParams &mat);

// First Piola-Kirchhoff stress together with its consistent tangent.
StressResult piola_stress(const Matrix3 &deformation_gradient, const MaterialParams &mat);

// Volumetric part K/2 (J-1) ln J on its own; isotropic, hence frame
// indifferent, unlike the full W whose Q lives in the material frame.
double volumetric_energy(const Matrix3 &deformation_gradient, const MaterialParams &mat);

}  // namespace romuq

#endif  // ROMUQ_MATERIAL_HPP
