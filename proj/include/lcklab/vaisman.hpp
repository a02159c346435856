#pragma once

#include <string>
#include <vector>

#include "lcklab/lck_forms.hpp"

namespace lcklab {

enum class Verdict { Satisfied, Violated, Inapplicable };

std::string_view to_string(Verdict v);

/// Canonical transversal candidate xi = Q (i diag(ln|a_j|)) Q^-1 and the
/// map U = A_abs A^-1 that has to preserve the shell.
struct VaismanCandidate {
  MatC xi;
  MatC U;
  double commutation_residual = 0.0;  // ||A xi - xi A||
  double unitarity_residual = 0.0;    // ||U^* U - I||
  double shell_residual = 0.0;        // ||U^* P U - P|| or max |F(U s) - 1|
  Verdict verdict = Verdict::Inapplicable;
  std::vector<std::string> reasons;
};

struct HomothetyConstants {
  double c = 0.0;        // d/ds log phi(exp(s Re log A) z)
  double c_prime = 0.0;  // log(phi(A z) / phi(z)), equals -lambda
  double kappa = 0.0;    // lambda -> kappa lambda makes c * c' = 1; NaN if c c' <= 0
  double spread = 0.0;   // max |c_i - c| over samples
  std::size_t samples = 0;
};

/// Throws NotDiagonalizable.
MatC canonical_xi(const Contraction& C);

VaismanCandidate check_vaisman_criterion(const Contraction& C, const ShellSpec& S,
                                         const FlowGenerator& flow,
                                         const ToleranceProfile& tol = {});

/// Throws NonConstantRatio when the log-derivative of phi along the flow of
/// -I xi varies across samples.
HomothetyConstants homothety_constants(const PotentialField& P, const MatC& xi,
                                       const std::vector<VecC>& samples);

/// Tangency |dF(xi z)| and transversality |dF(i xi z)| at a shell point.
CheckReport check_reeb_transversal(const MatC& xi, const ShellSpec& S, const VecC& z,
                                   const ToleranceProfile& tol = {});

/// Levi-Civita covariant derivative of the Lee form, sampled. Reports
/// max |nabla theta|_g / |theta|_g^2; status Withheld when the finite-difference
/// quality metric exceeds tol.lee_noise.
CheckReport check_lee_parallel(const PotentialField& P, const std::vector<VecC>& samples,
                               int threads = 1);

/// Per-point value of the Lee-parallel residual and its FD quality metric.
struct LeeParallelSample {
  double residual = 0.0;
  double quality = 0.0;
};
LeeParallelSample lee_parallel_at(const PotentialField& P, const VecC& z);

}  // namespace lcklab
