#pragma once

#include "lcklab/types.hpp"

namespace lcklab {

/// Invertible linear contraction of C^n together with its eigendata.
///
/// `absolute_part` is Q diag(|a_i|) Q^-1 and is only populated when the
/// eigenvector matrix is well conditioned (cond <= diag_condition).
struct Contraction {
  MatC A;
  VecC eigenvalues;
  bool diagonalizable = false;
  MatC eigenbasis;        // Q, columns are unit eigenvectors
  MatC absolute_part;     // A_abs
  double eigenbasis_condition = 0.0;

  Eigen::Index dim() const { return A.rows(); }
};

/// Additive flow sigma(t) = exp(t L); the deck map is sigma(step) = A.
struct FlowGenerator {
  MatC L;
  double step = 1.0;

  Eigen::Index dim() const { return L.rows(); }
  MatC flow(double t) const;
  VecC apply(double t, const VecC& z) const { return flow(t) * z; }
};

/// A Hermitian matrix, symmetrized on construction.
class HermitianForm {
 public:
  HermitianForm() = default;
  /// Throws IllConditioned if H is further than `sym_tol` (relative) from Hermitian.
  explicit HermitianForm(const MatC& H, double sym_tol = 1e-10);

  static HermitianForm symmetrized(const MatC& H) {
    HermitianForm f;
    f.H_ = 0.5 * (H + H.adjoint());
    return f;
  }

  const MatC& matrix() const { return H_; }
  Eigen::Index dim() const { return H_.rows(); }
  /// h(x, y) = x^* H y
  cxd operator()(const VecC& x, const VecC& y) const { return x.dot(H_ * y); }

 private:
  MatC H_;
};

struct LemmaLinearInstance {
  Eigen::Index n = 0;
  MatC W;               // n x (n-1) basis of the hyperplane
  HermitianForm h1;
  HermitianForm h2;
  VecC y;               // h2(y, y) = 1, y orthogonal to W
  VecC y_prime;         // h1-representer of z -> h1(z, y) on W
  double u0 = 0.0;      // h1 + u h2 is positive definite iff u > u0
};

Contraction spectral_check(const MatC& A, const ToleranceProfile& tol = {});

/// Matrix exponential by scaling and squaring with a [6/6] Pade approximant.
MatC expm(const MatC& X);

/// Principal logarithm of a general square matrix (Schur-Parlett, with
/// inverse scaling and squaring on clustered diagonal blocks).
MatC logm(const MatC& A, const ToleranceProfile& tol = {});

FlowGenerator principal_log(const Contraction& C, const ToleranceProfile& tol = {});

/// Solves L^* P + P L = -I by dense vectorization.
HermitianForm solve_lyapunov(const FlowGenerator& flow, const ToleranceProfile& tol = {});

double min_eig_hermitian(const HermitianForm& H);
double max_eig_hermitian(const HermitianForm& H);

LemmaLinearInstance lemma_linear_u0(const HermitianForm& h1, const HermitianForm& h2,
                                    const MatC& W, const ToleranceProfile& tol = {});

/// Largest real part in the spectrum.
double spectral_abscissa(const MatC& M);

}  // namespace lcklab
