#include "lcklab/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>

#include "lcklab/json_io.hpp"

namespace lcklab {

using nlohmann::json;

std::vector<VecC> sample_points(const FlowGenerator& flow, const ShellSpec& S,
                                const SamplingConfig& cfg, const ToleranceProfile& tol,
                                int threads) {
  const Eigen::Index n = flow.dim();
  // all randomness is drawn up front, in order
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<VecC> dirs(cfg.count);
  std::vector<double> times(cfg.count);
  for (std::size_t i = 0; i < cfg.count; ++i) {
    VecC d(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      d(j) = cxd(re, im);
    }
    dirs[i] = d.normalized();
    times[i] = cfg.t_min + (cfg.t_max - cfg.t_min) * uniform(rng);
  }
  return parallel_map<VecC>(cfg.count, threads, [&](std::size_t i) {
    const VecC s = solve_orbit(dirs[i], flow, S, tol, false).shell_point;
    return VecC(times[i] == 0.0 ? s : flow.apply(times[i], s));
  });
}

const CheckReport* RunReport::find(std::string_view name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

namespace {

double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

CheckReport skipped(const std::string& name, const std::string& why) {
  CheckReport r;
  r.name = name;
  r.status = Status::Inapplicable;
  r.detail = why;
  return r;
}

// Worst of a set of pointwise reports: any failure fails the aggregate; the
// reported sample is the one with the largest residual/tolerance ratio.
CheckReport aggregate(const std::string& name, const std::vector<CheckReport>& parts) {
  CheckReport out;
  out.name = name;
  if (parts.empty()) return skipped(name, "no samples");
  std::size_t worst = 0;
  double worst_ratio = -1.0;
  bool failed = false;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const double ratio = parts[i].tolerance > 0.0 ? parts[i].residual / parts[i].tolerance
                                                  : parts[i].residual;
    const bool f = parts[i].status == Status::Fail;
    // a failing part always outranks a passing one
    if ((f && !failed) || ((f == failed) && (!(ratio <= worst_ratio)))) {
      worst = i;
      worst_ratio = ratio;
    }
    failed = failed || f;
  }
  const CheckReport& w = parts[worst];
  out.status = failed ? Status::Fail : Status::Pass;
  out.residual = w.residual;
  out.tolerance = w.tolerance;
  out.worst_sample = w.worst_sample;
  out.worst_value = w.worst_value;
  out.detail = w.detail;
  out.metrics = w.metrics;
  out.metrics["samples"] = static_cast<double>(parts.size());
  return out;
}

CheckReport from_exterior(const std::string& name, const std::vector<ExteriorResidual>& parts) {
  std::vector<CheckReport> reps;
  reps.reserve(parts.size());
  for (const auto& p : parts) {
    CheckReport r = graded(name, p.residual_norm, p.tolerance);
    r.worst_sample = p.z;
    r.worst_value = p.residual_norm;
    reps.push_back(std::move(r));
  }
  return aggregate(name, reps);
}

std::vector<VecC> head(const std::vector<VecC>& v, std::size_t k) {
  return {v.begin(), v.begin() + static_cast<std::ptrdiff_t>(std::min(k, v.size()))};
}

}  // namespace

std::vector<SampleRow> potential_dump(const PotentialField& P, const std::vector<VecC>& samples,
                                      int threads) {
  return parallel_map<SampleRow>(samples.size(), threads, [&](std::size_t i) {
    const HessianSample hs = wirtinger_hessian(P, samples[i]);
    return SampleRow{samples[i], hs.phi, hs.min_eig};
  });
}

PreparedRun prepare_run(const RunConfig& cfg, std::string* stage) {
  const ToleranceProfile& tol = cfg.tolerances;
  std::string local;
  std::string& st = stage ? *stage : local;
  PreparedRun out;
  st = "config";
  if (cfg.A.rows() != cfg.n || cfg.A.cols() != cfg.n) {
    throw LckError(ErrorCode::InvalidConfig, "A does not match the declared n");
  }
  st = "spectral_check";
  out.contraction = spectral_check(cfg.A, tol);
  st = "principal_log";
  out.flow = principal_log(out.contraction, tol);
  st = "shell";
  switch (cfg.shell.type) {
    case ShellConfig::Type::Sphere:
      out.shell = ShellSpec::sphere(cfg.n);
      break;
    case ShellConfig::Type::Ellipsoid:
      if (!cfg.shell.P) throw LckError(ErrorCode::InvalidConfig, "ellipsoid shell needs P");
      out.shell = ShellSpec::ellipsoid(HermitianForm(*cfg.shell.P, tol.sym));
      break;
    case ShellConfig::Type::Lyapunov:
      out.shell = ShellSpec::sphere(cfg.n);
      if (!(hermitian_part_margin(out.shell, out.flow) < 0.0)) {
        out.shell = lyapunov_shell(out.flow, tol);
        out.lyapunov_fallback = true;
      }
      break;
  }
  st = "admissibility";
  out.certificate = admissibility_check(out.shell, out.flow, tol);
  return out;
}

RunReport run_pipeline(const RunConfig& cfg, int threads, std::vector<SampleRow>* rows) {
  const auto start = std::chrono::steady_clock::now();
  RunReport rep;
  rep.config = cfg;
  const std::vector<std::string> checks = cfg.checks.empty() ? known_checks() : cfg.checks;
  const ToleranceProfile& tol = cfg.tolerances;

  auto fail_all = [&](const std::string& stage, const LckError& e) {
    rep.error = stage + ": " + e.what();
    rep.overall = "error";
    rep.exit_code = 2;
    rep.checks.clear();
    for (const auto& c : checks) rep.checks.push_back(skipped(c, "skipped after " + stage + " error"));
    rep.elapsed_ms = ms_since(start);
    return rep;
  };

  // --- preconditions: contraction, flow, shell, admissibility, samples
  std::string stage;
  PreparedRun prep;
  std::vector<VecC> samples;
  try {
    prep = prepare_run(cfg, &stage);
    rep.contraction = ContractionSummary{prep.contraction.eigenvalues, prep.contraction.diagonalizable,
                                         prep.contraction.eigenbasis_condition, prep.flow.L};
    rep.shell = ShellSummary{prep.shell.kind() == ShellSpec::Kind::Sphere ? "sphere" : "ellipsoid",
                             prep.shell.P(), prep.lyapunov_fallback, prep.certificate};
    stage = "sampling";
    samples = sample_points(prep.flow, prep.shell, cfg.sampling, tol, threads);
  } catch (const LckError& e) {
    return fail_all(stage, e);
  }
  const Contraction& C = prep.contraction;
  const FlowGenerator& flow = prep.flow;
  const ShellSpec& S = prep.shell;
  const AdmissibilityCertificate& cert = prep.certificate;

  const std::vector<VecC> sub = head(samples, cfg.sampling.subsample);
  auto wants = [&](const std::string& name) {
    return std::find(checks.begin(), checks.end(), name) != checks.end();
  };

  CheckReport levi_report;
  if (wants("levi")) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const auto certs = parallel_map<LeviCert>(sub.size(), threads, [&](std::size_t i) {
        const VecC p = solve_orbit(sub[i], flow, S, tol, false).shell_point;
        return levi_check(S, p, tol);
      });
      std::size_t worst = 0;
      for (std::size_t i = 0; i < certs.size(); ++i) {
        if (certs[i].min_eig < certs[worst].min_eig) worst = i;
      }
      levi_report.name = "levi";
      levi_report.tolerance = 0.0;
      levi_report.residual = -certs[worst].min_eig;
      levi_report.worst_sample = certs[worst].point;
      levi_report.worst_value = certs[worst].min_eig;
      levi_report.status = certs[worst].passed() ? Status::Pass : Status::Fail;
      levi_report.metrics["samples"] = static_cast<double>(certs.size());
    } catch (const LckError& e) {
      levi_report = skipped("levi", e.what());
      levi_report.status = Status::Fail;
    }
    levi_report.elapsed_ms = ms_since(t0);
  }

  // --- lambda resolution
  PotentialField P;
  P.contraction = C;
  P.flow = flow;
  P.shell = S;
  P.certificate = cert;
  P.tol = tol;
  P.lambda = 1.0;
  try {
    stage = "lambda";
    if (cfg.lambda) {
      P.lambda = *cfg.lambda;
    } else {
      const MinLambdaResult mr = find_min_lambda(P, samples, cfg.lambda_lo, cfg.lambda_hi, threads);
      rep.lambda_star = mr.lambda_star;
      rep.lambda_threshold_found = mr.threshold_found;
      P.lambda = 2.0 * mr.lambda_star;
    }
    rep.lambda = P.lambda;
  } catch (const LckError& e) {
    return fail_all(stage, e);
  }

  if (rows) *rows = potential_dump(P, samples, threads);

  // --- certification suite
  std::optional<VaismanCandidate> cand;
  std::optional<MatC> xi;
  for (const auto& name : checks) {
    const auto t0 = std::chrono::steady_clock::now();
    CheckReport r;
    try {
      if (name == "levi") {
        r = levi_report;
      } else if (name == "psh") {
        r = check_psh(P, samples, threads);
      } else if (name == "automorphy") {
        r = aggregate(name, parallel_map<CheckReport>(samples.size(), threads, [&](std::size_t i) {
                        return check_automorphy(P, samples[i]);
                      }));
      } else if (name == "power_identity") {
        const auto pts = head(samples, std::min<std::size_t>(cfg.sampling.subsample, 50));
        std::vector<CheckReport> parts;
        for (int a = 1; a <= 3; ++a) {
          auto rs = parallel_map<CheckReport>(pts.size(), threads, [&](std::size_t i) {
            return check_ddc_power_identity(P, pts[i], a);
          });
          parts.insert(parts.end(), rs.begin(), rs.end());
        }
        r = aggregate(name, parts);
      } else if (name == "lck_identity") {
        if (cfg.n > 3) {
          r = skipped(name, "DimensionUnsupported: 3-form check needs n <= 3");
        } else {
          r = from_exterior(name, parallel_map<ExteriorResidual>(sub.size(), threads, [&](std::size_t i) {
                              return check_lck_identity(P, sub[i]);
                            }));
        }
      } else if (name == "dtheta") {
        r = from_exterior(name, parallel_map<ExteriorResidual>(sub.size(), threads, [&](std::size_t i) {
                            return check_dtheta_zero(P, sub[i]);
                          }));
      } else if (name == "pullback") {
        r = aggregate(name, parallel_map<CheckReport>(sub.size(), threads, [&](std::size_t i) {
                        return check_gamma_pullback(P, sub[i]);
                      }));
      } else if (name == "theta_invariance") {
        r = aggregate(name, parallel_map<CheckReport>(sub.size(), threads, [&](std::size_t i) {
                        return check_theta_invariance(P, sub[i]);
                      }));
      } else if (name == "vaisman") {
        cand = check_vaisman_criterion(C, S, flow, tol);
        r.name = name;
        r.residual = std::max({cand->commutation_residual, cand->unitarity_residual,
                               cand->shell_residual});
        r.tolerance = std::min({tol.commutation, tol.unitarity, tol.shell_preservation});
        r.status = cand->verdict == Verdict::Satisfied  ? Status::Pass
                   : cand->verdict == Verdict::Violated ? Status::Fail
                                                        : Status::Inapplicable;
        r.metrics["commutation_residual"] = cand->commutation_residual;
        r.metrics["unitarity_residual"] = cand->unitarity_residual;
        r.metrics["shell_residual"] = cand->shell_residual;
        std::string reasons;
        for (const auto& s : cand->reasons) reasons += (reasons.empty() ? "" : "; ") + s;
        r.detail = std::string(to_string(cand->verdict)) + (reasons.empty() ? "" : ": " + reasons);
        if (cand->verdict == Verdict::Satisfied) xi = cand->xi;
      } else if (name == "reeb_transversal" || name == "homothety") {
        if (!xi) {
          if (!C.diagonalizable) {
            r = skipped(name, "NotDiagonalizable: no canonical transversal candidate");
          } else {
            // the criterion may not have been requested; build the candidate here
            const VaismanCandidate vc = check_vaisman_criterion(C, S, flow, tol);
            if (vc.verdict == Verdict::Satisfied) xi = vc.xi;
          }
        }
        if (xi && name == "reeb_transversal") {
          r = aggregate(name, parallel_map<CheckReport>(sub.size(), threads, [&](std::size_t i) {
                          const VecC p = solve_orbit(sub[i], flow, S, tol, false).shell_point;
                          return check_reeb_transversal(*xi, S, p, tol);
                        }));
        } else if (xi) {
          const HomothetyConstants hc = homothety_constants(P, *xi, sub);
          r = graded(name, hc.spread, tol.homothety * std::max(1.0, std::abs(hc.c)));
          r.metrics["c"] = hc.c;
          r.metrics["c_prime"] = hc.c_prime;
          r.metrics["kappa"] = hc.kappa;
          r.metrics["samples"] = static_cast<double>(hc.samples);
        } else if (r.name.empty()) {
          r = skipped(name, "Vaisman criterion not satisfied");
        }
      } else if (name == "lee_parallel") {
        if (!cfg.slow) {
          r = skipped(name, "slow check; enable with --slow");
        } else if (cfg.n > 3) {
          r = skipped(name, "DimensionUnsupported: needs n <= 3");
        } else {
          r = check_lee_parallel(P, sub, threads);
        }
      }
    } catch (const LckError& e) {
      r = skipped(name, e.what());
      r.status = Status::Fail;
    }
    r.name = name;
    if (name != "levi") r.elapsed_ms = ms_since(t0);
    rep.checks.push_back(std::move(r));
  }

  bool failed = false;
  for (const auto& c : rep.checks) failed = failed || c.status == Status::Fail;
  rep.overall = failed ? "fail" : "pass";
  rep.exit_code = failed ? 1 : 0;
  rep.elapsed_ms = ms_since(start);
  return rep;
}

// ---------------------------------------------------------------- reporting

namespace {

json check_json(const CheckReport& c, bool include_elapsed) {
  json j;
  j["name"] = c.name;
  j["status"] = std::string(to_string(c.status));
  j["residual"] = number_json(c.residual);
  j["tolerance"] = number_json(c.tolerance);
  j["worst_sample"] = vector_json(c.worst_sample);
  j["worst_value"] = number_json(c.worst_value);
  if (include_elapsed) j["elapsed_ms"] = number_json(c.elapsed_ms);
  j["detail"] = c.detail;
  json m = json::object();
  for (const auto& [k, v] : c.metrics) m[k] = number_json(v);
  j["metrics"] = m;
  return j;
}

CheckReport check_from_json(const json& j) {
  CheckReport c;
  c.name = j.at("name").get<std::string>();
  c.status = status_from_string(j.at("status").get<std::string>());
  c.residual = number_from_json(j.at("residual"));
  c.tolerance = number_from_json(j.at("tolerance"));
  c.worst_sample = vector_from_json(j.at("worst_sample"));
  c.worst_value = number_from_json(j.at("worst_value"));
  if (j.contains("elapsed_ms")) c.elapsed_ms = number_from_json(j["elapsed_ms"]);
  c.detail = j.at("detail").get<std::string>();
  for (const auto& [k, v] : j.at("metrics").items()) c.metrics[k] = number_from_json(v);
  return c;
}

std::string_view to_string(AdmissibilityCertificate::Mode m) {
  return m == AdmissibilityCertificate::Mode::HermitianPart ? "hermitian_part" : "empirical";
}

bool same_number(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

bool same_vec(const VecC& a, const VecC& b) {
  if (a.size() != b.size()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (!same_number(a(i).real(), b(i).real()) || !same_number(a(i).imag(), b(i).imag())) {
      return false;
    }
  }
  return true;
}

bool same_mat(const MatC& a, const MatC& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return same_vec(Eigen::Map<const VecC>(a.data(), a.size()),
                  Eigen::Map<const VecC>(b.data(), b.size()));
}

bool same_check(const CheckReport& a, const CheckReport& b, bool ignore_elapsed) {
  if (a.metrics.size() != b.metrics.size()) return false;
  for (const auto& [k, v] : a.metrics) {
    auto it = b.metrics.find(k);
    if (it == b.metrics.end() || !same_number(v, it->second)) return false;
  }
  return a.name == b.name && a.status == b.status && same_number(a.residual, b.residual) &&
         same_number(a.tolerance, b.tolerance) && same_vec(a.worst_sample, b.worst_sample) &&
         same_number(a.worst_value, b.worst_value) && a.detail == b.detail &&
         (ignore_elapsed || same_number(a.elapsed_ms, b.elapsed_ms));
}

}  // namespace

std::string emit_json(const RunReport& r, bool include_elapsed) {
  json j;
  j["schema_version"] = r.schema_version;
  j["config"] = config_json(r.config);
  if (r.contraction) {
    j["contraction"] = {{"eigenvalues", vector_json(r.contraction->eigenvalues)},
                        {"diagonalizable", r.contraction->diagonalizable},
                        {"eigenbasis_condition", number_json(r.contraction->eigenbasis_condition)},
                        {"log", matrix_json(r.contraction->L)}};
  } else {
    j["contraction"] = nullptr;
  }
  if (r.shell) {
    j["shell"] = {{"type", r.shell->type},
                  {"P", matrix_json(r.shell->P)},
                  {"lyapunov_fallback", r.shell->lyapunov_fallback},
                  {"certificate",
                   {{"mode", std::string(to_string(r.shell->certificate.mode))},
                    {"margin", number_json(r.shell->certificate.margin)},
                    {"samples_checked", r.shell->certificate.samples_checked},
                    {"passed", r.shell->certificate.passed}}}};
  } else {
    j["shell"] = nullptr;
  }
  j["lambda"] = r.lambda ? number_json(*r.lambda) : json(nullptr);
  j["lambda_star"] = r.lambda_star ? number_json(*r.lambda_star) : json(nullptr);
  j["lambda_threshold_found"] = r.lambda_threshold_found;
  json cs = json::array();
  for (const auto& c : r.checks) cs.push_back(check_json(c, include_elapsed));
  j["checks"] = cs;
  j["overall"] = r.overall;
  j["exit_code"] = r.exit_code;
  j["error"] = r.error;
  if (include_elapsed) j["elapsed_ms"] = number_json(r.elapsed_ms);
  return dump_json(j);
}

RunReport parse_report(const std::string& text) {
  try {
    const json j = json::parse(text);
    RunReport r;
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kReportSchemaVersion) {
      throw LckError(ErrorCode::InvalidConfig, "unsupported report schema version");
    }
    r.config = config_from_json(j.at("config"));
    if (!j.at("contraction").is_null()) {
      const json& c = j["contraction"];
      ContractionSummary cs;
      cs.eigenvalues = vector_from_json(c.at("eigenvalues"));
      cs.diagonalizable = c.at("diagonalizable").get<bool>();
      cs.eigenbasis_condition = number_from_json(c.at("eigenbasis_condition"));
      const auto n = static_cast<Eigen::Index>(std::lround(std::sqrt(c.at("log").size())));
      cs.L = matrix_from_json(c["log"], n);
      r.contraction = cs;
    }
    if (!j.at("shell").is_null()) {
      const json& s = j["shell"];
      ShellSummary sh;
      sh.type = s.at("type").get<std::string>();
      const auto n = static_cast<Eigen::Index>(std::lround(std::sqrt(s.at("P").size())));
      sh.P = matrix_from_json(s["P"], n);
      sh.lyapunov_fallback = s.at("lyapunov_fallback").get<bool>();
      const json& c = s.at("certificate");
      sh.certificate.mode = c.at("mode").get<std::string>() == "hermitian_part"
                                ? AdmissibilityCertificate::Mode::HermitianPart
                                : AdmissibilityCertificate::Mode::Empirical;
      sh.certificate.margin = number_from_json(c.at("margin"));
      sh.certificate.samples_checked = c.at("samples_checked").get<std::size_t>();
      sh.certificate.passed = c.at("passed").get<bool>();
      r.shell = sh;
    }
    if (!j.at("lambda").is_null()) r.lambda = number_from_json(j["lambda"]);
    if (!j.at("lambda_star").is_null()) r.lambda_star = number_from_json(j["lambda_star"]);
    r.lambda_threshold_found = j.at("lambda_threshold_found").get<bool>();
    for (const auto& c : j.at("checks")) r.checks.push_back(check_from_json(c));
    r.overall = j.at("overall").get<std::string>();
    r.exit_code = j.at("exit_code").get<int>();
    r.error = j.at("error").get<std::string>();
    if (j.contains("elapsed_ms")) r.elapsed_ms = number_from_json(j["elapsed_ms"]);
    return r;
  } catch (const json::exception& e) {
    throw LckError(ErrorCode::InvalidConfig, std::string("malformed report: ") + e.what());
  }
}

std::string emit_csv(const std::vector<SampleRow>& rows) {
  std::ostringstream out;
  out.precision(17);
  const Eigen::Index n = rows.empty() ? 0 : rows.front().z.size();
  for (Eigen::Index j = 1; j <= n; ++j) out << "re_z" << j << ",im_z" << j << ",";
  out << "phi,min_eig\n";
  for (const auto& r : rows) {
    for (Eigen::Index j = 0; j < r.z.size(); ++j) {
      out << r.z(j).real() << "," << r.z(j).imag() << ",";
    }
    out << r.phi << "," << r.min_eig << "\n";
  }
  return out.str();
}

bool reports_equal(const RunReport& a, const RunReport& b, bool ignore_elapsed) {
  if (a.schema_version != b.schema_version || a.overall != b.overall ||
      a.exit_code != b.exit_code || a.error != b.error ||
      a.lambda_threshold_found != b.lambda_threshold_found ||
      a.checks.size() != b.checks.size()) {
    return false;
  }
  if (config_to_json(a.config) != config_to_json(b.config)) return false;
  if (a.lambda.has_value() != b.lambda.has_value() ||
      (a.lambda && !same_number(*a.lambda, *b.lambda))) {
    return false;
  }
  if (a.lambda_star.has_value() != b.lambda_star.has_value() ||
      (a.lambda_star && !same_number(*a.lambda_star, *b.lambda_star))) {
    return false;
  }
  if (a.contraction.has_value() != b.contraction.has_value()) return false;
  if (a.contraction) {
    const auto &x = *a.contraction, &y = *b.contraction;
    if (!same_vec(x.eigenvalues, y.eigenvalues) || x.diagonalizable != y.diagonalizable ||
        !same_number(x.eigenbasis_condition, y.eigenbasis_condition) || !same_mat(x.L, y.L)) {
      return false;
    }
  }
  if (a.shell.has_value() != b.shell.has_value()) return false;
  if (a.shell) {
    const auto &x = *a.shell, &y = *b.shell;
    if (x.type != y.type || !same_mat(x.P, y.P) || x.lyapunov_fallback != y.lyapunov_fallback ||
        x.certificate.mode != y.certificate.mode ||
        !same_number(x.certificate.margin, y.certificate.margin) ||
        x.certificate.samples_checked != y.certificate.samples_checked ||
        x.certificate.passed != y.certificate.passed) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.checks.size(); ++i) {
    if (!same_check(a.checks[i], b.checks[i], ignore_elapsed)) return false;
  }
  return ignore_elapsed || same_number(a.elapsed_ms, b.elapsed_ms);
}

int threads_from_env() {
  if (const char* v = std::getenv("LCKLAB_THREADS")) {
    const int t = std::atoi(v);
    if (t > 0) return t;
  }
  return 1;
}

}  // namespace lcklab
