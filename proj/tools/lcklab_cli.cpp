#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "lcklab/json_io.hpp"
#include "lcklab/pipeline.hpp"

using namespace lcklab;
using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string format = "json";
  bool slow = false;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
};

int write_output(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream f(o.out);
  if (!f) {
    std::cerr << "lcklab: cannot write '" << o.out << "'\n";
    return 2;
  }
  f << text;
  return 0;
}

RunConfig load(const Options& o) {
  RunConfig cfg = load_config(o.config);
  if (o.seed) cfg.sampling.seed = *o.seed;
  if (o.slow) cfg.slow = true;
  return cfg;
}

int threads_of(const Options& o) { return o.threads ? *o.threads : threads_from_env(); }

json error_json(const std::string& stage, const LckError& e) {
  return {{"error", std::string(to_string(e.code()))}, {"stage", stage}, {"message", e.what()}};
}

int cmd_analyze(const Options& o) {
  const RunConfig cfg = load(o);
  std::vector<SampleRow> rows;
  const RunReport r = run_pipeline(cfg, threads_of(o), o.format == "csv" ? &rows : nullptr);
  const int w = write_output(o, o.format == "csv" ? emit_csv(rows) : emit_json(r));
  if (!r.error.empty()) std::cerr << "lcklab: " << r.error << "\n";
  return w ? w : r.exit_code;
}

int cmd_potential_dump(const Options& o) {
  const RunConfig cfg = load(o);
  const int threads = threads_of(o);
  std::string stage;
  try {
    const PreparedRun prep = prepare_run(cfg, &stage);
    stage = "sampling";
    const auto samples = sample_points(prep.flow, prep.shell, cfg.sampling, cfg.tolerances, threads);
    PotentialField P{prep.contraction, prep.flow, prep.shell, prep.certificate, 1.0, cfg.tolerances};
    stage = "lambda";
    if (cfg.lambda) {
      P.lambda = *cfg.lambda;
    } else {
      P.lambda = 2.0 * find_min_lambda(P, samples, cfg.lambda_lo, cfg.lambda_hi, threads).lambda_star;
    }
    const auto rows = potential_dump(P, samples, threads);
    if (o.format == "csv") return write_output(o, emit_csv(rows));
    json j = {{"lambda", number_json(P.lambda)}, {"samples", json::array()}};
    for (const auto& r : rows) {
      j["samples"].push_back(
          {{"z", vector_json(r.z)}, {"phi", number_json(r.phi)}, {"min_eig", number_json(r.min_eig)}});
    }
    return write_output(o, dump_json(j));
  } catch (const LckError& e) {
    write_output(o, dump_json(error_json(stage, e)));
    std::cerr << "lcklab: " << stage << ": " << e.what() << "\n";
    return 2;
  }
}

int cmd_min_lambda(const Options& o) {
  const RunConfig cfg = load(o);
  const int threads = threads_of(o);
  std::string stage;
  try {
    const PreparedRun prep = prepare_run(cfg, &stage);
    stage = "sampling";
    const auto samples = sample_points(prep.flow, prep.shell, cfg.sampling, cfg.tolerances, threads);
    const PotentialField P{prep.contraction, prep.flow, prep.shell, prep.certificate, 1.0,
                           cfg.tolerances};
    stage = "find_min_lambda";
    const MinLambdaResult m = find_min_lambda(P, samples, cfg.lambda_lo, cfg.lambda_hi, threads);
    const json j = {{"lambda_star", number_json(m.lambda_star)},
                    {"threshold_found", m.threshold_found},
                    {"lower", number_json(m.lower)},
                    {"evaluations", m.evaluations},
                    {"lambda_bracket", {cfg.lambda_lo, cfg.lambda_hi}},
                    {"samples", samples.size()}};
    return write_output(o, dump_json(j));
  } catch (const LckError& e) {
    write_output(o, dump_json(error_json(stage, e)));
    std::cerr << "lcklab: " << stage << ": " << e.what() << "\n";
    return 2;
  }
}

int cmd_check_vaisman(const Options& o) {
  const RunConfig cfg = load(o);
  std::string stage;
  try {
    const PreparedRun prep = prepare_run(cfg, &stage);
    stage = "vaisman";
    const VaismanCandidate v = check_vaisman_criterion(prep.contraction, prep.shell, prep.flow,
                                                       cfg.tolerances);
    json j = {{"verdict", std::string(to_string(v.verdict))},
              {"commutation_residual", number_json(v.commutation_residual)},
              {"unitarity_residual", number_json(v.unitarity_residual)},
              {"shell_residual", number_json(v.shell_residual)},
              {"reasons", v.reasons}};
    if (v.verdict != Verdict::Inapplicable) {
      j["xi"] = matrix_json(v.xi);
      j["U"] = matrix_json(v.U);
    }
    const int w = write_output(o, dump_json(j));
    return w ? w : (v.verdict == Verdict::Violated ? 1 : 0);
  } catch (const LckError& e) {
    write_output(o, dump_json(error_json(stage, e)));
    std::cerr << "lcklab: " << stage << ": " << e.what() << "\n";
    return 2;
  }
}

int cmd_shell_suggest(const Options& o) {
  RunConfig cfg = load(o);
  const ToleranceProfile& tol = cfg.tolerances;
  const int threads = threads_of(o);
  std::string stage = "spectral_check";
  try {
    const Contraction C = spectral_check(cfg.A, tol);
    stage = "principal_log";
    const FlowGenerator flow = principal_log(C, tol);
    stage = "lyapunov";
    const ShellSpec S = lyapunov_shell(flow, tol);
    const MatC& P = S.P();
    const MatC I = MatC::Identity(cfg.n, cfg.n);
    const double residual = (flow.L.adjoint() * P + P * flow.L + I).norm();
    stage = "admissibility";
    const double sphere_margin = hermitian_part_margin(ShellSpec::sphere(cfg.n), flow);
    const AdmissibilityCertificate cert = admissibility_check(S, flow, tol);
    stage = "levi";
    SamplingConfig sc = cfg.sampling;
    sc.count = std::min<std::size_t>(sc.count, 100);
    sc.t_min = sc.t_max = 0.0;
    const auto pts = sample_points(flow, S, sc, tol, threads);
    const auto certs = parallel_map<LeviCert>(pts.size(), threads, [&](std::size_t i) {
      return levi_check(S, pts[i], tol);
    });
    double levi_min = std::numeric_limits<double>::infinity();
    for (const auto& c : certs) levi_min = std::min(levi_min, c.min_eig);
    const bool ok = cert.passed && levi_min > 0.0;
    const json j = {{"P", matrix_json(P)},
                    {"lyapunov_residual", number_json(residual)},
                    {"sphere_margin", number_json(sphere_margin)},
                    {"margin", number_json(cert.margin)},
                    {"admissible", cert.passed},
                    {"levi_points", certs.size()},
                    {"levi_min_eig", number_json(levi_min)},
                    {"passed", ok}};
    const int w = write_output(o, dump_json(j));
    return w ? w : (ok ? 0 : 1);
  } catch (const LckError& e) {
    write_output(o, dump_json(error_json(stage, e)));
    std::cerr << "lcklab: " << stage << ": " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lcklab: automorphic LCK potentials on linear Hopf manifolds"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub, bool csv) {
    sub->add_option("--config", o.config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output file (default stdout)");
    sub->add_option("--format", o.format, "output format")
        ->check(csv ? CLI::IsMember({"json", "csv"}) : CLI::IsMember({"json"}));
    sub->add_flag("--slow", o.slow, "enable slow checks");
    sub->add_option("--threads", o.threads, "worker threads (overrides LCKLAB_THREADS)")
        ->check(CLI::Range(1, 1024));
    sub->add_option("--seed", o.seed, "sampling seed (overrides config)");
  };

  auto* analyze = app.add_subcommand("analyze", "run the full certification pipeline");
  auto* min_lambda = app.add_subcommand("min-lambda", "empirical psh threshold for lambda");
  auto* vaisman = app.add_subcommand("check-vaisman", "Vaisman criterion for the contraction");
  auto* suggest = app.add_subcommand("shell-suggest", "Lyapunov ellipsoid shell for A");
  auto* dump = app.add_subcommand("potential-dump", "phi and Hessian min eigenvalue per sample");
  add_common(analyze, true);
  add_common(min_lambda, false);
  add_common(vaisman, false);
  add_common(suggest, false);
  add_common(dump, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(o);
    if (min_lambda->parsed()) return cmd_min_lambda(o);
    if (vaisman->parsed()) return cmd_check_vaisman(o);
    if (suggest->parsed()) return cmd_shell_suggest(o);
    if (dump->parsed()) return cmd_potential_dump(o);
  } catch (const LckError& e) {
    std::cerr << "lcklab: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 2;
  }
  return 2;
}
