#include "lcklab/shell.hpp"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

namespace lcklab {

VecR to_real(const VecC& z) {
  VecR x(2 * z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    x(2 * j) = z(j).real();
    x(2 * j + 1) = z(j).imag();
  }
  return x;
}

VecC from_real(const VecR& x) {
  VecC z(x.size() / 2);
  for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = cxd(x(2 * j), x(2 * j + 1));
  return z;
}

VecR real_gradient(const VecC& grad_zbar) { return 2.0 * to_real(grad_zbar); }

ShellSpec ShellSpec::sphere(Eigen::Index n) {
  ShellSpec s;
  s.kind_ = Kind::Sphere;
  s.n_ = n;
  s.P_ = MatC::Identity(n, n);
  return s;
}

ShellSpec ShellSpec::ellipsoid(const HermitianForm& P) {
  if (min_eig_hermitian(P) <= 0.0) {
    throw LckError(ErrorCode::InvalidConfig, "ellipsoid matrix must be positive definite");
  }
  ShellSpec s;
  s.kind_ = Kind::Ellipsoid;
  s.n_ = P.dim();
  s.P_ = P.matrix();
  return s;
}

ShellSpec ShellSpec::custom(Eigen::Index n, CustomFunction f) {
  if (!f.value || !f.gradient || !f.hessian) {
    throw LckError(ErrorCode::InvalidConfig, "custom shell needs value, gradient and hessian");
  }
  ShellSpec s;
  s.kind_ = Kind::Custom;
  s.n_ = n;
  s.custom_ = std::move(f);
  return s;
}

double ShellSpec::value(const VecC& z) const {
  if (kind_ == Kind::Custom) return custom_.value(z);
  return z.dot(P_ * z).real();
}

VecC ShellSpec::gradient(const VecC& z) const {
  if (kind_ == Kind::Custom) return custom_.gradient(z);
  return P_ * z;
}

MatC ShellSpec::hessian(const VecC& z) const {
  if (kind_ == Kind::Custom) return custom_.hessian(z);
  return P_;
}

LeviCert levi_check(const ShellSpec& S, const VecC& p, const ToleranceProfile& tol) {
  const Eigen::Index n = S.dim();
  const double F = S.value(p);
  if (std::abs(F - 1.0) > tol.on_shell) {
    throw LckError(ErrorCode::NotOnShell, "F(p) = " + std::to_string(F));
  }
  const VecC g = S.gradient(p);
  if (g.norm() <= tol.degenerate_gradient) {
    throw LckError(ErrorCode::DegenerateGradient, "dF vanishes at p");
  }
  // H_p = { v : <g, v> = 0 }, the complex tangent space of S at p
  Eigen::HouseholderQR<MatC> qr(g);
  const MatC Q = qr.householderQ() * MatC::Identity(n, n);
  LeviCert cert;
  cert.point = p;
  cert.basis = Q.rightCols(n - 1);
  cert.restricted =
      HermitianForm::symmetrized(cert.basis.adjoint() * S.hessian(p) * cert.basis);
  cert.min_eig = n > 1 ? min_eig_hermitian(cert.restricted) : 0.0;
  return cert;
}

double hermitian_part_margin(const ShellSpec& S, const FlowGenerator& flow) {
  if (!S.is_quadratic()) {
    throw LckError(ErrorCode::Inadmissible, "Hermitian-part certificate needs a quadratic shell");
  }
  const MatC& P = S.P();
  const MatC sym = 0.5 * (P * flow.L + flow.L.adjoint() * P);
  Eigen::GeneralizedSelfAdjointEigenSolver<MatC> es(0.5 * (sym + sym.adjoint()),
                                                    0.5 * (P + P.adjoint()),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

AdmissibilityCertificate empirical_admissibility(const ShellSpec& S, const FlowGenerator& flow,
                                                 const EmpiricalOptions& opt) {
  const Eigen::Index n = S.dim();
  const double rate = -spectral_abscissa(flow.L);
  if (!(rate > 0.0)) throw LckError(ErrorCode::Inadmissible, "flow is not contracting");
  // run the orbit long enough to shrink or grow by ~e^40 at the slowest rate
  const double horizon = 40.0 / rate;
  const double ds = 2.0 * horizon / static_cast<double>(opt.steps);
  const MatC step = expm(ds * flow.L);
  const MatC start = expm(-horizon * flow.L);

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss;
  AdmissibilityCertificate cert;
  cert.mode = AdmissibilityCertificate::Mode::Empirical;
  double worst = 0.0;
  for (std::size_t k = 0; k < opt.orbits; ++k) {
    VecC d(n);
    for (Eigen::Index j = 0; j < n; ++j) d(j) = cxd(gauss(rng), gauss(rng));
    d.normalize();
    VecC w = start * d;
    double prev = S.value(w) - 1.0;
    int crossings = 0;
    for (std::size_t i = 0; i < opt.steps; ++i) {
      w = step * w;
      const double cur = S.value(w) - 1.0;
      if ((prev > 0.0) != (cur > 0.0)) ++crossings;
      prev = cur;
    }
    worst = std::max(worst, std::abs(static_cast<double>(crossings) - 1.0));
    ++cert.samples_checked;
  }
  cert.margin = worst;
  cert.passed = worst == 0.0;
  return cert;
}

AdmissibilityCertificate admissibility_check(const ShellSpec& S, const FlowGenerator& flow,
                                             const ToleranceProfile& /*tol*/,
                                             const EmpiricalOptions& opt) {
  if (S.is_quadratic()) {
    AdmissibilityCertificate cert;
    cert.mode = AdmissibilityCertificate::Mode::HermitianPart;
    cert.margin = hermitian_part_margin(S, flow);
    cert.passed = cert.margin < 0.0;
    if (cert.passed) return cert;
  }
  AdmissibilityCertificate emp = empirical_admissibility(S, flow, opt);
  if (!emp.passed) {
    throw LckError(ErrorCode::Inadmissible,
                   "orbits do not cross the shell exactly once (checked " +
                       std::to_string(emp.samples_checked) + " orbits)");
  }
  return emp;
}

ShellSpec lyapunov_shell(const FlowGenerator& flow, const ToleranceProfile& tol) {
  return ShellSpec::ellipsoid(solve_lyapunov(flow, tol));
}

namespace {

struct LogLevel {
  double h;       // log F(exp(-t L) z)
  double dh;      // d/dt
  VecC w;
  MatC M;
};

LogLevel eval_level(const VecC& z, double t, const FlowGenerator& flow, const ShellSpec& S) {
  LogLevel out;
  out.M = expm(-t * flow.L);
  out.w = out.M * z;
  const double F = S.value(out.w);
  const VecC g = S.gradient(out.w);
  out.h = std::log(F);
  out.dh = 2.0 * g.dot(-(flow.L * out.w)).real() / F;
  return out;
}

}  // namespace

OrbitSolution solve_orbit(const VecC& z, const FlowGenerator& flow, const ShellSpec& S,
                          const ToleranceProfile& tol, bool with_gradient) {
  if (z.norm() == 0.0) throw LckError(ErrorCode::NoBracket, "orbit of the origin");
  if (!(S.value(z) > 0.0)) throw LckError(ErrorCode::NoBracket, "F(z) is not positive");

  LogLevel cur = eval_level(z, 0.0, flow, S);
  double lo = 0.0, hi = 0.0;
  double hlo = cur.h, hhi = cur.h;
  if (cur.h == 0.0) {
    lo = hi = 0.0;
  } else {
    // log F(exp(-t L) z) increases with t; walk in unit flow steps
    const double dir = cur.h > 0.0 ? -1.0 : 1.0;
    double t = 0.0, h = cur.h;
    while (true) {
      const double tn = t + dir;
      if (std::abs(tn) > tol.max_flow_time) {
        throw LckError(ErrorCode::NoBracket, "no shell crossing within the flow horizon");
      }
      const double hn = eval_level(z, tn, flow, S).h;
      if (!std::isfinite(hn)) throw LckError(ErrorCode::NoBracket, "flow overflow");
      if ((hn > 0.0) != (h > 0.0) || hn == 0.0) {
        if (dir > 0) { lo = t; hlo = h; hi = tn; hhi = hn; }
        else { lo = tn; hlo = hn; hi = t; hhi = h; }
        break;
      }
      t = tn;
      h = hn;
    }
  }

  OrbitSolution sol;
  double t = std::abs(hlo) < std::abs(hhi) ? lo : hi;
  if (lo == hi) t = lo;
  cur = eval_level(z, t, flow, S);
  double dx_old = hi - lo, dx = dx_old;
  int it = 0;
  for (; it < tol.max_root_iterations && cur.h != 0.0; ++it) {
    const bool newton_out = ((t - hi) * cur.dh - cur.h) * ((t - lo) * cur.dh - cur.h) > 0.0;
    const bool slow = std::abs(2.0 * cur.h) > std::abs(dx_old * cur.dh);
    dx_old = dx;
    if (newton_out || slow || cur.dh <= 0.0) {
      dx = 0.5 * (hi - lo);
      t = lo + dx;
    } else {
      dx = cur.h / cur.dh;
      t -= dx;
    }
    cur = eval_level(z, t, flow, S);
    if (cur.h < 0.0) lo = t; else hi = t;
    if (std::abs(dx) <= 1e-16 * std::max(1.0, std::abs(t)) ||
        std::abs(cur.h) <= 1e-16) {
      break;
    }
  }
  if (std::abs(cur.h) > tol.root) {
    throw LckError(ErrorCode::MaxIterations,
                   "orbit time did not converge (|log F| = " + std::to_string(cur.h) + ")");
  }
  sol.t = t;
  sol.shell_point = cur.w;
  sol.iterations = it;

  if (with_gradient) {
    // implicit differentiation of G(z, t) = F(exp(-t L) z) - 1
    const VecC g = S.gradient(cur.w);
    const double dGdt = 2.0 * g.dot(-(flow.L * cur.w)).real();
    if (!(dGdt > 1e-14 * std::max(1.0, g.norm() * cur.w.norm()))) {
      throw LckError(ErrorCode::DegenerateCrossing, "orbit is tangent to the shell");
    }
    sol.grad_zbar = -(cur.M.adjoint() * g) / dGdt;
  }
  return sol;
}

double orbit_time(const VecC& z, const FlowGenerator& flow, const ShellSpec& S,
                  const ToleranceProfile& tol) {
  return solve_orbit(z, flow, S, tol, false).t;
}

VecR orbit_time_gradient(const VecC& z, const FlowGenerator& flow, const ShellSpec& S,
                         const ToleranceProfile& tol) {
  return real_gradient(solve_orbit(z, flow, S, tol, true).grad_zbar);
}

}  // namespace lcklab
