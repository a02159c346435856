#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lcklab/config.hpp"
#include "lcklab/vaisman.hpp"

namespace lcklab {

inline constexpr int kReportSchemaVersion = 1;

/// Deterministic sample set: complex Gaussian directions drawn sequentially
/// from the seed, projected to S along the flow, then pushed by flow times
/// uniform in [t_min, t_max]. Orbit time of sample i equals its drawn time.
std::vector<VecC> sample_points(const FlowGenerator& flow, const ShellSpec& S,
                                const SamplingConfig& cfg, const ToleranceProfile& tol = {},
                                int threads = 1);

/// Contraction, flow generator, shell and admissibility certificate for a
/// config. `stage` names the step that threw.
struct PreparedRun {
  Contraction contraction;
  FlowGenerator flow;
  ShellSpec shell;
  AdmissibilityCertificate certificate;
  bool lyapunov_fallback = false;
};
PreparedRun prepare_run(const RunConfig& cfg, std::string* stage = nullptr);

struct ContractionSummary {
  VecC eigenvalues;
  bool diagonalizable = false;
  double eigenbasis_condition = 0.0;
  MatC L;
};

struct ShellSummary {
  std::string type;        // sphere | ellipsoid
  MatC P;
  bool lyapunov_fallback = false;
  AdmissibilityCertificate certificate;
};

struct RunReport {
  int schema_version = kReportSchemaVersion;
  RunConfig config;
  std::optional<ContractionSummary> contraction;
  std::optional<ShellSummary> shell;
  std::optional<double> lambda;
  std::optional<double> lambda_star;
  bool lambda_threshold_found = false;
  std::vector<CheckReport> checks;
  std::string overall = "error";   // pass | fail | error
  int exit_code = 2;
  std::string error;
  double elapsed_ms = 0.0;

  const CheckReport* find(std::string_view name) const;
};

/// One row of the per-sample dump.
struct SampleRow {
  VecC z;
  double phi = 0.0;
  double min_eig = 0.0;
};

/// Runs every stage in order; never throws for mathematical failures, they
/// become report sections and an exit code (0 pass, 1 check failed,
/// 2 configuration or precondition error).
RunReport run_pipeline(const RunConfig& cfg, int threads = 1, std::vector<SampleRow>* rows = nullptr);

std::vector<SampleRow> potential_dump(const PotentialField& P, const std::vector<VecC>& samples,
                                      int threads = 1);

std::string emit_json(const RunReport& report, bool include_elapsed = true);
RunReport parse_report(const std::string& text);
/// Header re_z1,im_z1,...,re_zn,im_zn,phi,min_eig.
std::string emit_csv(const std::vector<SampleRow>& rows);

/// Field-by-field equality; elapsed fields are ignored when asked.
bool reports_equal(const RunReport& a, const RunReport& b, bool ignore_elapsed = true);

/// Thread count from LCKLAB_THREADS, or 1.
int threads_from_env();

}  // namespace lcklab
