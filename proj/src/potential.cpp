#include "lcklab/potential.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace lcklab {

PotentialField PotentialField::build(const MatC& A, const ShellSpec& S, double lambda,
                                     const ToleranceProfile& tol) {
  if (!(lambda > 0.0)) throw LckError(ErrorCode::InvalidConfig, "lambda must be positive");
  PotentialField P;
  P.contraction = spectral_check(A, tol);
  P.flow = principal_log(P.contraction, tol);
  if (S.dim() != A.rows()) throw LckError(ErrorCode::InvalidConfig, "shell dimension mismatch");
  P.shell = S;
  P.certificate = admissibility_check(S, P.flow, tol);
  P.lambda = lambda;
  P.tol = tol;
  return P;
}

PotentialField PotentialField::with_lambda(double new_lambda) const {
  if (!(new_lambda > 0.0)) throw LckError(ErrorCode::InvalidConfig, "lambda must be positive");
  PotentialField P = *this;
  P.lambda = new_lambda;
  return P;
}

double eval_potential(const PotentialField& P, const VecC& z) {
  return std::exp(-P.lambda * orbit_time(z, P.flow, P.shell, P.tol));
}

VecC potential_gradient(const PotentialField& P, const VecC& z) {
  const OrbitSolution sol = solve_orbit(z, P.flow, P.shell, P.tol, true);
  const double phi = std::exp(-P.lambda * sol.t);
  return (-P.lambda * phi) * sol.grad_zbar;
}

double fd_step(const VecC& z) {
  static const double cbrt_eps = std::cbrt(std::numeric_limits<double>::epsilon());
  return cbrt_eps * std::max(z.norm(), 1.0);
}

namespace {

MatR real_hessian_central(const std::function<VecC(const VecC&)>& grad_zbar, const VecR& x,
                          double h) {
  const Eigen::Index m = x.size();
  MatR R(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    VecR xp = x, xm = x;
    xp(a) += h;
    xm(a) -= h;
    R.col(a) = (real_gradient(grad_zbar(from_real(xp))) -
                real_gradient(grad_zbar(from_real(xm)))) / (2.0 * h);
  }
  return R;
}

}  // namespace

MatC complex_hessian_fd(const std::function<VecC(const VecC&)>& grad_zbar, const VecC& z,
                        double h, bool richardson) {
  const Eigen::Index n = z.size();
  const VecR x = to_real(z);
  MatR R = real_hessian_central(grad_zbar, x, h);
  if (richardson) {
    const MatR Rh = real_hessian_central(grad_zbar, x, 0.5 * h);
    R = (4.0 * Rh - R) / 3.0;
  }
  // R(b, a) = d/dx_a of (d f/dx_b)
  MatC H(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double xx = R(2 * j, 2 * k), yy = R(2 * j + 1, 2 * k + 1);
      const double yx = R(2 * j + 1, 2 * k), xy = R(2 * j, 2 * k + 1);
      H(j, k) = 0.25 * cxd(xx + yy, yx - xy);
    }
  }
  return H;
}

HessianSample wirtinger_hessian(const PotentialField& P, const VecC& z,
                                const HessianOptions& opt) {
  const double h = fd_step(z);
  if (z.norm() < 100.0 * h) {
    throw LckError(ErrorCode::StepUnderflow, "|z| is too small for the finite-difference step");
  }
  HessianSample s;
  s.z = z;
  const OrbitSolution sol = solve_orbit(z, P.flow, P.shell, P.tol, true);
  s.phi = std::exp(-P.lambda * sol.t);
  s.grad = (-P.lambda * s.phi) * sol.grad_zbar;
  const MatC H = complex_hessian_fd([&P](const VecC& w) { return potential_gradient(P, w); }, z,
                                    h, opt.richardson);
  s.asymmetry = (H - H.adjoint()).norm() / std::max(H.norm(), 1e-300);
  s.H = HermitianForm::symmetrized(H);
  s.min_eig = min_eig_hermitian(s.H);
  return s;
}

CheckReport check_psh(const PotentialField& P, const std::vector<VecC>& samples, int threads) {
  const auto start = std::chrono::steady_clock::now();
  CheckReport r;
  r.name = "psh";
  r.tolerance = -P.tol.psd_margin;
  if (samples.empty()) {
    r.status = Status::Inapplicable;
    r.detail = "empty sample set";
    return r;
  }
  const auto hs = parallel_map<HessianSample>(samples.size(), threads, [&](std::size_t i) {
    return wirtinger_hessian(P, samples[i]);
  });
  std::size_t worst = 0;
  double max_asym = 0.0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    if (hs[i].min_eig < hs[worst].min_eig) worst = i;
    max_asym = std::max(max_asym, hs[i].asymmetry);
  }
  r.worst_sample = samples[worst];
  r.worst_value = hs[worst].min_eig;
  r.residual = -hs[worst].min_eig;
  r.status = hs[worst].min_eig > P.tol.psd_margin ? Status::Pass : Status::Fail;
  r.metrics["max_asymmetry"] = max_asym;
  r.metrics["lambda"] = P.lambda;
  r.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

namespace {

// Derivatives of the orbit time t, which do not depend on lambda:
// H(phi_lambda) = lambda phi (lambda g g^* - T) with g = dt/d(conj z) and T
// the complex Hessian of t.
struct TimeJet {
  double t = 0.0;
  VecC g;
  MatC T;
};

TimeJet time_jet(const PotentialField& P, const VecC& z) {
  TimeJet j;
  const OrbitSolution sol = solve_orbit(z, P.flow, P.shell, P.tol, true);
  j.t = sol.t;
  j.g = sol.grad_zbar;
  const MatC T = complex_hessian_fd(
      [&P](const VecC& w) { return solve_orbit(w, P.flow, P.shell, P.tol, true).grad_zbar; }, z,
      fd_step(z));
  j.T = 0.5 * (T + T.adjoint());
  return j;
}

bool predicate_on_jets(const std::vector<TimeJet>& jets, double lambda, double margin) {
  for (const auto& j : jets) {
    // lambda phi > 0 only scales; testing the bracket avoids overflow of phi
    const MatC K = lambda * j.g * j.g.adjoint() - j.T;
    const double m = min_eig_hermitian(HermitianForm::symmetrized(K));
    if (margin <= 0.0 && m > 0.0) continue;
    if (!(lambda * std::exp(-lambda * j.t) * m > margin)) return false;
  }
  return true;
}

std::vector<TimeJet> jets_for(const PotentialField& P, const std::vector<VecC>& samples,
                              int threads) {
  return parallel_map<TimeJet>(samples.size(), threads,
                               [&](std::size_t i) { return time_jet(P, samples[i]); });
}

}  // namespace

bool psh_predicate(const PotentialField& P, const std::vector<VecC>& samples, double lambda,
                   int threads) {
  return predicate_on_jets(jets_for(P, samples, threads), lambda, P.tol.psd_margin);
}

MinLambdaResult find_min_lambda(const PotentialField& P, const std::vector<VecC>& samples,
                                double bracket_lo, double bracket_hi, int threads) {
  if (!(bracket_lo > 0.0) || !(bracket_hi > bracket_lo)) {
    throw LckError(ErrorCode::InvalidConfig, "lambda bracket must satisfy 0 < lo < hi");
  }
  const auto jets = jets_for(P, samples, threads);
  const double margin = P.tol.psd_margin;
  MinLambdaResult res;
  res.evaluations = 1;
  if (!predicate_on_jets(jets, bracket_hi, margin)) {
    throw LckError(ErrorCode::BracketNotPsh,
                   "potential is not psh at the top of the bracket (" +
                       std::to_string(bracket_hi) + ")");
  }
  ++res.evaluations;
  if (predicate_on_jets(jets, bracket_lo, margin)) {
    res.lambda_star = bracket_lo;
    res.threshold_found = false;
    return res;
  }
  double lo = bracket_lo, hi = bracket_hi;
  while (hi - lo > P.tol.lambda_rel * hi) {
    const double mid = 0.5 * (lo + hi);
    ++res.evaluations;
    if (predicate_on_jets(jets, mid, margin)) hi = mid; else lo = mid;
  }
  res.lambda_star = hi;
  res.lower = lo;
  res.threshold_found = true;
  return res;
}

CheckReport check_ddc_power_identity(const PotentialField& P, const VecC& z, int a) {
  if (a < 1) throw LckError(ErrorCode::InvalidConfig, "power exponent a must be >= 1");
  const HessianOptions opt{true};
  const HessianSample base = wirtinger_hessian(P, z, opt);
  const double p = 2.0 * a;
  const HessianSample power = wirtinger_hessian(P.with_lambda(p * P.lambda), z, opt);
  const MatC predicted =
      std::pow(base.phi, p - 2.0) *
      (p * base.phi * base.H.matrix() + p * (p - 1.0) * base.grad * base.grad.adjoint());
  const double scale = std::max(power.H.matrix().norm(), 1e-300);
  const double tol = a >= 3 ? 10.0 * P.tol.power_identity : P.tol.power_identity;
  CheckReport r = graded("power_identity", (power.H.matrix() - predicted).norm() / scale, tol);
  r.worst_sample = z;
  r.worst_value = r.residual;
  r.metrics["a"] = a;
  return r;
}

CheckReport check_automorphy(const PotentialField& P, const VecC& z, int iterations) {
  const double phi = eval_potential(P, z);
  VecC w = z;
  for (int k = 0; k < iterations; ++k) w = P.A() * w;
  const double phi_w = eval_potential(P, w);
  const double expected = std::exp(-iterations * P.lambda) * phi;
  CheckReport r = graded("automorphy", std::abs(phi_w - expected) / expected, P.tol.automorphy);
  r.worst_sample = z;
  r.worst_value = r.residual;
  return r;
}

}  // namespace lcklab
