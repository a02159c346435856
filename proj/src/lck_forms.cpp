#include "lcklab/lck_forms.hpp"

#include <cmath>
#include <limits>

namespace lcklab {

namespace {

// columns are the real basis vectors e_j, i e_j of C^n
MatC real_basis(Eigen::Index n) {
  MatC B = MatC::Zero(n, 2 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    B(j, 2 * j) = 1.0;
    B(j, 2 * j + 1) = cxd(0.0, 1.0);
  }
  return B;
}

double outer_step(const VecC& z) {
  static const double fifth_root_eps = std::pow(std::numeric_limits<double>::epsilon(), 0.2);
  return fifth_root_eps * std::max(z.norm(), 1.0);
}

// d/dx_a of a matrix-valued function, fourth-order central differences
template <class Fn>
MatR partial4(Fn&& f, const VecR& x, Eigen::Index a, double h) {
  auto at = [&](double s) {
    VecR y = x;
    y(a) += s;
    return f(y);
  };
  return (-at(2 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2 * h)) / (12.0 * h);
}

}  // namespace

MatR real_two_form(const MatC& H) {
  const MatC B = real_basis(H.rows());
  return 2.0 * (B.adjoint() * H * B).imag();
}

MatR real_metric(const MatC& H) {
  const MatC B = real_basis(H.rows());
  return 2.0 * (B.adjoint() * H * B).real();
}

VecR lee_form(const PotentialField& P, const VecC& z) {
  return P.lambda * orbit_time_gradient(z, P.flow, P.shell, P.tol);
}

FormSample form_sample(const PotentialField& P, const VecC& z) {
  const HessianSample hs = wirtinger_hessian(P, z);
  FormSample f;
  f.z = z;
  f.phi = hs.phi;
  f.omega_tilde = hs.H;
  f.omega = HermitianForm::symmetrized(hs.H.matrix() / hs.phi);
  // theta = -d log phi = -(d phi)/phi
  f.theta = -real_gradient(hs.grad) / hs.phi;
  f.automorphy_factor = std::exp(-P.lambda);
  return f;
}

ExteriorResidual check_dtheta_zero(const PotentialField& P, const VecC& z) {
  const VecR x = to_real(z);
  const Eigen::Index m = x.size();
  const double h = fd_step(z);
  MatR J(m, m);  // J(a, b) = d theta_b / d x_a
  for (Eigen::Index a = 0; a < m; ++a) {
    VecR xp = x, xm = x;
    xp(a) += h;
    xm(a) -= h;
    J.row(a) = ((lee_form(P, from_real(xp)) - lee_form(P, from_real(xm))) / (2.0 * h)).transpose();
  }
  const VecR theta = lee_form(P, z);
  const double scale = std::max(J.norm(), theta.norm() / z.norm());
  ExteriorResidual r;
  r.z = z;
  r.form_degree = 2;
  r.residual_norm = (J - J.transpose()).norm() / scale;
  r.tolerance = P.tol.dtheta;
  return r;
}

ExteriorResidual check_lck_identity(const PotentialField& P, const VecC& z) {
  const Eigen::Index n = z.size();
  if (n > 3) {
    throw LckError(ErrorCode::DimensionUnsupported, "3-form check is limited to n <= 3");
  }
  const Eigen::Index m = 2 * n;
  const VecR x = to_real(z);
  auto omega_at = [&P](const VecR& y) {
    const HessianSample hs = wirtinger_hessian(P, from_real(y));
    return MatR(real_two_form(hs.H.matrix() / hs.phi));
  };
  const double h = outer_step(z);
  std::vector<MatR> dOmega;
  dOmega.reserve(m);
  for (Eigen::Index a = 0; a < m; ++a) dOmega.push_back(partial4(omega_at, x, a, h));

  const MatR Omega = omega_at(x);
  const VecR theta = lee_form(P, z);
  double worst = 0.0, scale = 0.0;
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = a + 1; b < m; ++b) {
      for (Eigen::Index c = b + 1; c < m; ++c) {
        const double d = dOmega[a](b, c) - dOmega[b](a, c) + dOmega[c](a, b);
        const double w = theta(a) * Omega(b, c) - theta(b) * Omega(a, c) + theta(c) * Omega(a, b);
        worst = std::max(worst, std::abs(d - w));
        scale = std::max(scale, std::abs(w));
      }
    }
  }
  ExteriorResidual r;
  r.z = z;
  r.form_degree = 3;
  r.residual_norm = worst / std::max(scale, 1e-300);
  r.tolerance = P.tol.lck_identity;
  return r;
}

CheckReport check_gamma_pullback(const PotentialField& P, const VecC& z, int iterations) {
  MatC Ak = MatC::Identity(z.size(), z.size());
  for (int k = 0; k < iterations; ++k) Ak = P.A() * Ak;
  const HessianOptions opt{true};
  const HessianSample at_z = wirtinger_hessian(P, z, opt);
  const HessianSample at_Az = wirtinger_hessian(P, Ak * z, opt);
  const double expected_factor = std::exp(-iterations * P.lambda);

  const MatC pulled = Ak.adjoint() * at_Az.H.matrix() * Ak;
  const MatC& Hz = at_z.H.matrix();
  const double homothety = (pulled - expected_factor * Hz).norm() / (expected_factor * Hz.norm());
  const MatC omega_pulled = pulled / at_Az.phi;
  const MatC omega_z = Hz / at_z.phi;
  const double invariance = (omega_pulled - omega_z).norm() / omega_z.norm();

  CheckReport r = graded("pullback", std::max(homothety, invariance), P.tol.pullback);
  r.worst_sample = z;
  r.worst_value = r.residual;
  r.metrics["homothety_residual"] = homothety;
  r.metrics["invariance_residual"] = invariance;
  // least-squares ratio of the pulled-back form to omega_tilde_z
  r.metrics["factor"] = (Hz.adjoint() * pulled).trace().real() / Hz.squaredNorm();
  r.metrics["expected_factor"] = expected_factor;
  return r;
}

CheckReport check_theta_invariance(const PotentialField& P, const VecC& z) {
  const VecC Az = P.A() * z;
  const VecC g_z = solve_orbit(z, P.flow, P.shell, P.tol, true).grad_zbar;
  const VecC g_Az = solve_orbit(Az, P.flow, P.shell, P.tol, true).grad_zbar;
  // theta_w(v) = 2 lambda Re<g_w, v>; pulling back by A gives A^* g_{Az}
  const VecC pulled = P.A().adjoint() * g_Az;
  CheckReport r = graded("theta_invariance", (pulled - g_z).norm() / g_z.norm(), P.tol.pullback);
  r.worst_sample = z;
  r.worst_value = r.residual;
  return r;
}

}  // namespace lcklab
