#include "lcklab/vaisman.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace lcklab {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Satisfied: return "satisfied";
    case Verdict::Violated: return "violated";
    case Verdict::Inapplicable: return "inapplicable";
  }
  return "inapplicable";
}

MatC canonical_xi(const Contraction& C) {
  if (!C.diagonalizable) {
    throw LckError(ErrorCode::NotDiagonalizable,
                   "xi is only defined in an eigenbasis (eigenvector condition " +
                       std::to_string(C.eigenbasis_condition) + ")");
  }
  VecC logs(C.eigenvalues.size());
  for (Eigen::Index j = 0; j < logs.size(); ++j) {
    logs(j) = cxd(0.0, std::log(std::abs(C.eigenvalues(j))));
  }
  return C.eigenbasis * logs.asDiagonal() * C.eigenbasis.inverse();
}

VaismanCandidate check_vaisman_criterion(const Contraction& C, const ShellSpec& S,
                                         const FlowGenerator& flow,
                                         const ToleranceProfile& tol) {
  VaismanCandidate cand;
  if (!C.diagonalizable) {
    cand.verdict = Verdict::Inapplicable;
    cand.reasons.emplace_back("NotDiagonalizable: no canonical transversal candidate");
    return cand;
  }
  const Eigen::Index n = C.dim();
  const MatC& A = C.A;
  cand.xi = canonical_xi(C);
  cand.U = C.absolute_part * A.inverse();

  cand.commutation_residual = (A * cand.xi - cand.xi * A).norm();
  cand.unitarity_residual = (cand.U.adjoint() * cand.U - MatC::Identity(n, n)).norm();
  switch (S.kind()) {
    case ShellSpec::Kind::Sphere:
      cand.shell_residual = cand.unitarity_residual;
      break;
    case ShellSpec::Kind::Ellipsoid:
      cand.shell_residual = (cand.U.adjoint() * S.P() * cand.U - S.P()).norm();
      break;
    case ShellSpec::Kind::Custom: {
      std::mt19937_64 rng(0x5eed);
      std::normal_distribution<double> gauss;
      double worst = 0.0;
      for (int k = 0; k < 64; ++k) {
        VecC d(n);
        for (Eigen::Index j = 0; j < n; ++j) d(j) = cxd(gauss(rng), gauss(rng));
        const VecC s = solve_orbit(d.normalized(), flow, S, tol, false).shell_point;
        worst = std::max(worst, std::abs(S.value(cand.U * s) - 1.0));
      }
      cand.shell_residual = worst;
      break;
    }
  }

  if (cand.commutation_residual > tol.commutation) {
    cand.reasons.push_back("xi is not invariant under A (residual " +
                           std::to_string(cand.commutation_residual) + ")");
  }
  if (cand.unitarity_residual > tol.unitarity && S.kind() != ShellSpec::Kind::Custom) {
    cand.reasons.push_back("A_abs A^-1 is not unitary (residual " +
                           std::to_string(cand.unitarity_residual) + ")");
  }
  if (cand.shell_residual > tol.shell_preservation && S.kind() != ShellSpec::Kind::Sphere) {
    cand.reasons.push_back("A_abs A^-1 does not preserve the shell (residual " +
                           std::to_string(cand.shell_residual) + ")");
  }
  cand.verdict = cand.reasons.empty() ? Verdict::Satisfied : Verdict::Violated;
  return cand;
}

HomothetyConstants homothety_constants(const PotentialField& P, const MatC& xi,
                                       const std::vector<VecC>& samples) {
  if (samples.empty()) throw LckError(ErrorCode::InvalidConfig, "no samples");
  // -I xi acts as the linear field (Re log A) z
  const MatC field = cxd(0.0, -1.0) * xi;
  std::vector<double> cs, cps;
  for (const VecC& z : samples) {
    const OrbitSolution sol = solve_orbit(z, P.flow, P.shell, P.tol, true);
    // d log phi (v) = -lambda dt(v) = -2 lambda Re<dt/d(conj z), v>
    cs.push_back(-2.0 * P.lambda * sol.grad_zbar.dot(field * z).real());
    cps.push_back(std::log(eval_potential(P, P.A() * z) / std::exp(-P.lambda * sol.t)));
  }
  HomothetyConstants hc;
  hc.samples = samples.size();
  for (std::size_t i = 0; i < cs.size(); ++i) {
    hc.c += cs[i];
    hc.c_prime += cps[i];
  }
  hc.c /= static_cast<double>(cs.size());
  hc.c_prime /= static_cast<double>(cps.size());
  for (double c : cs) hc.spread = std::max(hc.spread, std::abs(c - hc.c));
  if (hc.spread > P.tol.homothety * std::max(1.0, std::abs(hc.c))) {
    throw LckError(ErrorCode::NonConstantRatio,
                   "Lie derivative ratio varies by " + std::to_string(hc.spread));
  }
  const double prod = hc.c * hc.c_prime;
  hc.kappa = prod > 0.0 ? 1.0 / std::sqrt(prod) : std::numeric_limits<double>::quiet_NaN();
  return hc;
}

CheckReport check_reeb_transversal(const MatC& xi, const ShellSpec& S, const VecC& z,
                                   const ToleranceProfile& tol) {
  const double F = S.value(z);
  if (std::abs(F - 1.0) > tol.on_shell) {
    throw LckError(ErrorCode::NotOnShell, "F(z) = " + std::to_string(F));
  }
  const VecC g = S.gradient(z);
  const VecC v = xi * z;
  const double scale = g.norm() * std::max(v.norm(), 1e-300);
  // dF(v) = 2 Re<g, v>
  const double tangency = std::abs(2.0 * g.dot(v).real());
  const double transversality = std::abs(2.0 * g.dot(cxd(0.0, 1.0) * v).real());
  CheckReport r = graded("reeb_transversal", tangency, tol.tangency * scale);
  r.worst_sample = z;
  r.worst_value = transversality;
  r.metrics["tangency"] = tangency;
  r.metrics["transversality"] = transversality;
  if (!(transversality > tol.transversality * std::max(scale, 1e-300))) {
    r.status = Status::Fail;
    r.detail = "field is not transversal to the CR distribution";
  }
  return r;
}

LeeParallelSample lee_parallel_at(const PotentialField& P, const VecC& z) {
  const Eigen::Index n = z.size();
  if (n > 3) throw LckError(ErrorCode::DimensionUnsupported, "Lee-parallel check needs n <= 3");
  const Eigen::Index m = 2 * n;
  const VecR x = to_real(z);
  double quality = 0.0;

  auto metric_at = [&](const VecR& y) {
    const HessianSample hs = wirtinger_hessian(P, from_real(y));
    quality = std::max(quality, hs.asymmetry);
    return MatR(real_metric(hs.H.matrix() / hs.phi));
  };
  const double h2 = std::pow(std::numeric_limits<double>::epsilon(), 0.2) * std::max(z.norm(), 1.0);
  std::vector<MatR> dg(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    auto at = [&](double s) {
      VecR y = x;
      y(a) += s;
      return metric_at(y);
    };
    dg[a] = (-at(2 * h2) + 8.0 * at(h2) - 8.0 * at(-h2) + at(-2 * h2)) / (12.0 * h2);
  }
  const MatR G = metric_at(x);
  const MatR Ginv = G.inverse();

  const double h1 = fd_step(z);
  const VecR theta = lee_form(P, z);
  MatR J(m, m);  // J(a, b) = d_a theta_b
  for (Eigen::Index a = 0; a < m; ++a) {
    VecR xp = x, xm = x;
    xp(a) += h1;
    xm(a) -= h1;
    J.row(a) = ((lee_form(P, from_real(xp)) - lee_form(P, from_real(xm))) / (2.0 * h1)).transpose();
  }
  quality = std::max(quality, (J - J.transpose()).norm() / std::max(J.norm(), 1e-300));
  J = 0.5 * (J + J.transpose());

  // Gamma^c_ab theta_c = 1/2 (G^-1 theta)_d (d_a g_bd + d_b g_ad - d_d g_ab)
  const VecR up = Ginv * theta;
  MatR N = J;
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      double gamma_theta = 0.0;
      for (Eigen::Index d = 0; d < m; ++d) {
        gamma_theta += 0.5 * up(d) * (dg[a](b, d) + dg[b](a, d) - dg[d](a, b));
      }
      N(a, b) -= gamma_theta;
    }
  }
  const double nabla_sq = (Ginv * N * Ginv * N.transpose()).trace();
  const double theta_sq = theta.dot(up);
  LeeParallelSample s;
  s.residual = std::sqrt(std::max(nabla_sq, 0.0)) / theta_sq;
  s.quality = quality;
  return s;
}

CheckReport check_lee_parallel(const PotentialField& P, const std::vector<VecC>& samples,
                               int threads) {
  CheckReport r;
  r.name = "lee_parallel";
  r.tolerance = P.tol.lee_parallel;
  if (samples.empty()) {
    r.status = Status::Inapplicable;
    r.detail = "empty sample set";
    return r;
  }
  const auto vals = parallel_map<LeeParallelSample>(
      samples.size(), threads, [&](std::size_t i) { return lee_parallel_at(P, samples[i]); });
  std::size_t worst = 0;
  double quality = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (vals[i].residual > vals[worst].residual) worst = i;
    quality = std::max(quality, vals[i].quality);
  }
  r.residual = vals[worst].residual;
  r.worst_sample = samples[worst];
  r.worst_value = vals[worst].residual;
  r.metrics["fd_quality"] = quality;
  if (quality > P.tol.lee_noise) {
    r.status = Status::Withheld;
    r.detail = "NoiseDominated: finite-difference quality " + std::to_string(quality);
  } else {
    r.status = r.residual <= r.tolerance ? Status::Pass : Status::Fail;
  }
  return r;
}

}  // namespace lcklab
