#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace lcklab {

using cxd = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;
using MatR = Eigen::MatrixXd;
using VecR = Eigen::VectorXd;

enum class ErrorCode {
  NotContraction,
  Singular,
  BranchAmbiguity,
  IllConditioned,
  DegenerateW,
  NotOnShell,
  DegenerateGradient,
  Inadmissible,
  NoBracket,
  MaxIterations,
  DegenerateCrossing,
  StepUnderflow,
  BracketNotPsh,
  DimensionUnsupported,
  NotDiagonalizable,
  NonConstantRatio,
  NoiseDominated,
  InvalidConfig,
};

std::string_view to_string(ErrorCode code);

/// Every failing precondition in the library throws this, tagged with a code
/// so the pipeline can map it onto a report section.
class LckError : public std::runtime_error {
 public:
  LckError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// All numerical thresholds in one place. Defaults are what the test suites
/// and the CLI use unless a config file overrides them.
struct ToleranceProfile {
  double reconstruct = 1e-10;      // ||Q diag(a) Q^-1 - A||, relative to ||A||
  double exp_residual = 1e-12;     // ||exp(log A) - A||
  double branch_cut = 1e-12;       // distance of an eigenvalue to arg = pi
  double diag_condition = 1e8;     // eigenvector condition number cutoff
  double lyapunov_residual = 1e-10;
  double lyapunov_condition = 1e12;
  double sym = 1e-10;              // Hermitian symmetry
  double on_shell = 1e-9;          // |F(p) - 1|
  double degenerate_gradient = 1e-12;
  double root = 1e-13;             // |log F - 1| at the orbit time
  double max_flow_time = 200.0;
  int max_root_iterations = 200;
  double psd_margin = 0.0;
  double lambda_rel = 1e-3;        // find_min_lambda bisection width
  double power_identity = 1e-6;
  double automorphy = 1e-8;
  double dtheta = 1e-5;
  double lck_identity = 1e-4;
  double pullback = 1e-6;
  double commutation = 1e-10;
  double unitarity = 1e-10;
  double shell_preservation = 1e-10;
  double homothety = 1e-6;
  double tangency = 1e-8;
  double transversality = 1e-8;
  double lee_parallel = 1e-2;
  double lee_noise = 1e-3;         // FD quality budget for the slow check
};

}  // namespace lcklab
