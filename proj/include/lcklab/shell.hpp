#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "lcklab/linalg.hpp"

namespace lcklab {

/// Level set S = F^-1(1) of a defining function F on C^n \ {0}.
///
/// Derivatives use the Wirtinger convention throughout the library:
///   gradient(z)_j = dF/d(conj z_j), so dF(v) = 2 Re <gradient, v>,
///   hessian(z)_jk = d^2 F / d(conj z_j) dz_k, so the Levi form is v^* H v.
/// For the quadratic kinds F(z) = z^* P z, gradient = P z and hessian = P.
class ShellSpec {
 public:
  enum class Kind { Sphere, Ellipsoid, Custom };

  struct CustomFunction {
    std::function<double(const VecC&)> value;
    std::function<VecC(const VecC&)> gradient;
    std::function<MatC(const VecC&)> hessian;
  };

  static ShellSpec sphere(Eigen::Index n);
  /// P must be Hermitian positive definite.
  static ShellSpec ellipsoid(const HermitianForm& P);
  static ShellSpec custom(Eigen::Index n, CustomFunction f);

  Kind kind() const { return kind_; }
  bool is_quadratic() const { return kind_ != Kind::Custom; }
  Eigen::Index dim() const { return n_; }
  /// Only meaningful for quadratic kinds.
  const MatC& P() const { return P_; }

  double value(const VecC& z) const;
  VecC gradient(const VecC& z) const;
  MatC hessian(const VecC& z) const;

 private:
  Kind kind_ = Kind::Sphere;
  Eigen::Index n_ = 0;
  MatC P_;
  CustomFunction custom_;
};

struct AdmissibilityCertificate {
  enum class Mode { HermitianPart, Empirical };
  Mode mode = Mode::HermitianPart;
  /// HermitianPart: max over z of Re<Pz, Lz> / <Pz, z>; negative iff passing.
  /// Empirical: worst deviation from exactly one crossing (0 when passing).
  double margin = 0.0;
  std::size_t samples_checked = 0;
  bool passed = false;
};

struct LeviCert {
  VecC point;
  MatC basis;             // n x (n-1), orthonormal, annihilated by dF at p
  HermitianForm restricted;
  double min_eig = 0.0;

  bool passed() const { return min_eig > 0.0; }
};

struct EmpiricalOptions {
  std::size_t orbits = 64;
  std::size_t steps = 4000;
  std::uint64_t seed = 0x5eed;
};

LeviCert levi_check(const ShellSpec& S, const VecC& p, const ToleranceProfile& tol = {});

/// Generalized Rayleigh bound max Re<Pz, Lz>/<Pz, z> of a quadratic shell.
/// Negative means F strictly decreases along every forward orbit.
double hermitian_part_margin(const ShellSpec& S, const FlowGenerator& flow);

AdmissibilityCertificate empirical_admissibility(const ShellSpec& S, const FlowGenerator& flow,
                                                 const EmpiricalOptions& opt = {});

/// Hermitian-part certificate for quadratic shells, falling back to the
/// empirical orbit count. Throws Inadmissible when neither passes.
AdmissibilityCertificate admissibility_check(const ShellSpec& S, const FlowGenerator& flow,
                                             const ToleranceProfile& tol = {},
                                             const EmpiricalOptions& opt = {});

/// Ellipsoid from the Lyapunov solution P of L^* P + P L = -I.
ShellSpec lyapunov_shell(const FlowGenerator& flow, const ToleranceProfile& tol = {});

/// Unique t with F(exp(-t L) z) = 1 and its derivatives.
struct OrbitSolution {
  double t = 0.0;
  VecC shell_point;       // exp(-t L) z
  VecC grad_zbar;         // dt/d(conj z); real gradient is 2 (Re, Im) interleaved
  int iterations = 0;
};

OrbitSolution solve_orbit(const VecC& z, const FlowGenerator& flow, const ShellSpec& S,
                          const ToleranceProfile& tol = {}, bool with_gradient = true);

double orbit_time(const VecC& z, const FlowGenerator& flow, const ShellSpec& S,
                  const ToleranceProfile& tol = {});

/// Gradient of t over (Re z1, Im z1, Re z2, Im z2, ...).
VecR orbit_time_gradient(const VecC& z, const FlowGenerator& flow, const ShellSpec& S,
                         const ToleranceProfile& tol = {});

/// Real-coordinate helpers: (Re z1, Im z1, ...) <-> z.
VecR to_real(const VecC& z);
VecC from_real(const VecR& x);
/// Real gradient of a real function from its d/d(conj z) vector.
VecR real_gradient(const VecC& grad_zbar);

}  // namespace lcklab
