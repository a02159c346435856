#pragma once

#include <optional>
#include <vector>

#include "lcklab/check.hpp"
#include "lcklab/shell.hpp"

namespace lcklab {

/// phi_lambda(z) = exp(-lambda * t(z)), where t is the orbit time to the
/// shell. phi = 1 on S, phi > 1 outside, and phi(A z) = e^{-lambda} phi(z).
struct PotentialField {
  Contraction contraction;
  FlowGenerator flow;
  ShellSpec shell;
  AdmissibilityCertificate certificate;
  double lambda = 1.0;
  ToleranceProfile tol;

  /// Runs spectral_check, principal_log and admissibility_check.
  static PotentialField build(const MatC& A, const ShellSpec& S, double lambda,
                              const ToleranceProfile& tol = {});

  PotentialField with_lambda(double new_lambda) const;
  Eigen::Index dim() const { return flow.dim(); }
  const MatC& A() const { return contraction.A; }
};

struct HessianOptions {
  bool richardson = false;
};

/// Mixed Wirtinger Hessian H_jk = d^2 phi / d(conj z_j) dz_k at one point.
struct HessianSample {
  VecC z;
  double phi = 0.0;
  VecC grad;              // d phi / d(conj z)
  HermitianForm H;
  double min_eig = 0.0;
  double asymmetry = 0.0; // ||H - H^*|| / ||H|| before symmetrization
};

double eval_potential(const PotentialField& P, const VecC& z);

/// d phi / d(conj z) by the chain rule through the orbit time.
VecC potential_gradient(const PotentialField& P, const VecC& z);

/// Finite-difference step policy for one layer: eps^{1/3} max(|z|, 1).
double fd_step(const VecC& z);

/// Complex Hessian d^2 f / d(conj z_j) dz_k by central differences of an
/// analytic d f / d(conj z). The returned matrix is not symmetrized.
MatC complex_hessian_fd(const std::function<VecC(const VecC&)>& grad_zbar, const VecC& z,
                        double h, bool richardson = false);

HessianSample wirtinger_hessian(const PotentialField& P, const VecC& z,
                                const HessianOptions& opt = {});

CheckReport check_psh(const PotentialField& P, const std::vector<VecC>& samples,
                      int threads = 1);

struct MinLambdaResult {
  double lambda_star = 0.0;
  bool threshold_found = false;   // false: predicate already held at the bracket bottom
  double lower = 0.0;             // last failing lambda (0 when no threshold)
  int evaluations = 0;
};

/// Bisection on lambda for "check_psh passes on samples". Empirical: valid
/// for the given sample set only.
MinLambdaResult find_min_lambda(const PotentialField& P, const std::vector<VecC>& samples,
                                double bracket_lo, double bracket_hi, int threads = 1);

/// The psh predicate of find_min_lambda, evaluated at one lambda.
bool psh_predicate(const PotentialField& P, const std::vector<VecC>& samples, double lambda,
                   int threads = 1);

CheckReport check_ddc_power_identity(const PotentialField& P, const VecC& z, int a);

CheckReport check_automorphy(const PotentialField& P, const VecC& z, int iterations = 1);

}  // namespace lcklab
