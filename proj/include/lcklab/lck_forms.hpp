#pragma once

#include "lcklab/potential.hpp"

namespace lcklab {

/// Forms at one point of the cover.
///
/// Dictionary between the Hermitian matrix H (mixed Wirtinger Hessian) and
/// real-coordinate components, with real basis e_{2j} = e_j, e_{2j+1} = i e_j:
///   2-form   Omega(u, v) = 2 Im(u^* H v)
///   metric   g(u, v)     = Omega(u, i v) = 2 Re(u^* H v)
/// omega_tilde = H(phi), omega = omega_tilde / phi, theta = -d log phi.
struct FormSample {
  VecC z;
  double phi = 0.0;
  HermitianForm omega_tilde;
  HermitianForm omega;
  VecR theta;                    // real 2n-covector
  double automorphy_factor = 0;  // e^{-lambda}
};

struct ExteriorResidual {
  VecC z;
  double residual_norm = 0.0;
  double tolerance = 0.0;
  int form_degree = 0;

  bool passed() const { return residual_norm <= tolerance; }
};

/// 2n x 2n antisymmetric components of the real 2-form of H.
MatR real_two_form(const MatC& H);
/// 2n x 2n symmetric components of the Riemannian metric of H.
MatR real_metric(const MatC& H);

/// theta = lambda * grad t in real coordinates.
VecR lee_form(const PotentialField& P, const VecC& z);

FormSample form_sample(const PotentialField& P, const VecC& z);

ExteriorResidual check_dtheta_zero(const PotentialField& P, const VecC& z);

/// d omega - theta ^ omega by finite differences; n <= 3.
ExteriorResidual check_lck_identity(const PotentialField& P, const VecC& z);

/// omega_tilde_{Az}(Au, Av) = e^{-lambda} omega_tilde_z(u, v) and
/// omega_{Az}(Au, Av) = omega_z(u, v). Reports the measured homothety ratio
/// in metrics["factor"].
CheckReport check_gamma_pullback(const PotentialField& P, const VecC& z, int iterations = 1);

/// theta_{Az} o A = theta_z.
CheckReport check_theta_invariance(const PotentialField& P, const VecC& z);

}  // namespace lcklab
