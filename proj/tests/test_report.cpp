#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "lcklab/json_io.hpp"
#include "lcklab/pipeline.hpp"
#include "support.hpp"

using namespace lcklab;
using namespace lcklab::testing;

namespace {

const std::string kRadial = R"({
  "n": 2,
  "A": [[0.5, 0], [0, 0], [0, 0], [0.5, 0]],
  "shell": {"type": "sphere"},
  "lambda": 1.3862943611198906,
  "sampling": {"count": 200, "t_range": [-1, 1], "seed": 7}
})";

const std::string kJordan = R"({
  "n": 2,
  "A": [[0.5, 0], [0.5, 0], [0, 0], [0.5, 0]],
  "shell": {"type": "sphere"},
  "lambda": "auto",
  "sampling": {"count": 120, "seed": 3, "subsample": 40}
})";

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LCKLAB_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_path(const std::string& name) {
  return std::string(LCKLAB_CONFIGS) + "/" + name + ".json";
}

}  // namespace

TEST_CASE("config validation") {
  const RunConfig cfg = parse_config(kRadial);
  CHECK(cfg.n == 2);
  CHECK(cfg.A(1, 1) == cxd(0.5, 0.0));
  CHECK(cfg.lambda.has_value());
  CHECK(cfg.sampling.seed == 7);
  CHECK(parse_config(kJordan).lambda == std::nullopt);

  auto rejects = [](const std::string& text) {
    try {
      parse_config(text);
      return false;
    } catch (const LckError& e) {
      return e.code() == ErrorCode::InvalidConfig;
    }
  };
  CHECK(rejects("{not json"));
  CHECK(rejects(R"({"n": 1, "A": [[1,0]], "sampling": {"seed": 1}})"));
  CHECK(rejects(R"({"n": 9, "A": [], "sampling": {"seed": 1}})"));
  CHECK(rejects(R"({"n": 2, "A": [[0.5,0],[0,0],[0,0]], "sampling": {"seed": 1}})"));
  CHECK(rejects(R"({"n": 2, "A": [[0.5,0],[0,0],[0,0],[0.5,0]], "sampling": {"count": 5}})"));
  CHECK(rejects(R"({"n": 2, "A": [[0.5,0],[0,0],[0,0],[0.5,0]], "sampling": {"seed": 1, "count": 0}})"));
  CHECK(rejects(R"({"n": 2, "A": [[0.5,0],[0,0],[0,0],[0.5,0]], "sampling": {"seed": 1}, "lambda": -1})"));
  CHECK(rejects(R"({"n": 2, "A": [[0.5,0],[0,0],[0,0],[0.5,0]], "sampling": {"seed": 1}, "checks": ["nope"]})"));
  CHECK(rejects(R"({"n": 2, "A": [[0.5,0],[0,0],[0,0],[0.5,0]], "sampling": {"seed": 1}, "shell": {"type": "ellipsoid"}})"));
  CHECK(rejects(R"({"n": 2, "A": [[0.5,0],[0,0],[0,0],[0.5,0]], "sampling": {"seed": 1}, "tolerances": {"bogus": 1}})"));

  const RunConfig tuned = parse_config(
      R"({"n": 2, "A": [[0.5,0],[0,0],[0,0],[0.5,0]], "sampling": {"seed": 1}, "tolerances": {"dtheta": 1e-3}})");
  CHECK(tuned.tolerances.dtheta == 1e-3);
}

TEST_CASE("config echo round-trips") {
  const RunConfig cfg = parse_config(kJordan);
  const RunConfig back = parse_config(config_to_json(cfg));
  CHECK(config_to_json(back) == config_to_json(cfg));
}

TEST_CASE("sample points") {
  const PotentialField radial =
      PotentialField::build(0.5 * MatC::Identity(2, 2), ShellSpec::sphere(2), 1.0);
  SUBCASE("single shell point") {
    SamplingConfig cfg{1, 0.0, 0.0, 5, 1};
    const auto pts = sample_points(radial.flow, radial.shell, cfg);
    REQUIRE(pts.size() == 1);
    CHECK(std::abs(radial.shell.value(pts[0]) - 1.0) < 1e-13);
  }
  SUBCASE("deterministic and thread independent") {
    SamplingConfig cfg{300, -1.0, 1.0, 99, 10};
    const auto a = sample_points(radial.flow, radial.shell, cfg, {}, 1);
    const auto b = sample_points(radial.flow, radial.shell, cfg, {}, 1);
    const auto c = sample_points(radial.flow, radial.shell, cfg, {}, 8);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i] == b[i]);
      CHECK(a[i] == c[i]);
    }
  }
  SUBCASE("radial flow bound") {
    SamplingConfig cfg{500, -2.0, 2.0, 3, 10};
    for (const VecC& z : sample_points(radial.flow, radial.shell, cfg)) {
      CHECK(z.norm() >= 0.25 * (1 - 1e-12));
      CHECK(z.norm() <= 4.0 * (1 + 1e-12));
    }
  }
  SUBCASE("orbit times stay in the drawn range") {
    SamplingConfig cfg{50, -1.0, 1.0, 4, 10};
    const auto pts = sample_points(radial.flow, radial.shell, cfg);
    for (const VecC& z : pts) {
      const double t = orbit_time(z, radial.flow, radial.shell);
      CHECK(t >= -1.0 - 1e-12);
      CHECK(t <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("pipeline fixtures") {
  SUBCASE("radial passes everything") {
    RunConfig cfg = parse_config(kRadial);
    cfg.slow = true;
    cfg.sampling.subsample = 20;
    const RunReport r = run_pipeline(cfg);
    CHECK(r.overall == "pass");
    CHECK(r.checks.size() == known_checks().size());
    CHECK(r.exit_code == 0);
    for (const auto& c : r.checks) CHECK(c.status == Status::Pass);
    REQUIRE(r.contraction);
    CHECK(r.contraction->diagonalizable);
    REQUIRE(r.shell);
    CHECK(r.shell->certificate.passed);
  }
  SUBCASE("Jordan: LCK checks pass, Vaisman inapplicable") {
    const RunReport r = run_pipeline(parse_config(kJordan));
    CHECK(r.exit_code == 0);
    REQUIRE(r.lambda_star);
    CHECK(r.lambda_threshold_found);
    CHECK(*r.lambda == doctest::Approx(2.0 * *r.lambda_star));
    for (const char* name : {"psh", "automorphy", "power_identity", "lck_identity", "dtheta",
                             "pullback", "theta_invariance"}) {
      REQUIRE(r.find(name));
      CHECK(r.find(name)->status == Status::Pass);
    }
    CHECK(r.find("vaisman")->status == Status::Inapplicable);
    CHECK(r.find("lee_parallel")->status == Status::Inapplicable);
  }
  SUBCASE("not a contraction") {
    RunConfig cfg = parse_config(kRadial);
    cfg.A(1, 1) = 1.2;
    const RunReport r = run_pipeline(cfg);
    CHECK(r.exit_code == 2);
    CHECK(r.overall == "error");
    CHECK(r.error.find("NotContraction") != std::string::npos);
    CHECK_FALSE(r.contraction);
    for (const auto& c : r.checks) CHECK(c.status == Status::Inapplicable);
  }
  SUBCASE("failing check sets exit code 1") {
    RunConfig cfg = parse_config(kJordan);
    cfg.lambda = 0.05;
    cfg.checks = {"psh", "automorphy"};
    const RunReport r = run_pipeline(cfg);
    CHECK(r.exit_code == 1);
    CHECK(r.overall == "fail");
    CHECK(r.find("psh")->status == Status::Fail);
    CHECK(r.find("automorphy")->status == Status::Pass);
  }
  SUBCASE("every requested check appears exactly once") {
    RunConfig cfg = parse_config(kRadial);
    cfg.checks = {"vaisman", "levi", "homothety"};
    const RunReport r = run_pipeline(cfg);
    REQUIRE(r.checks.size() == 3);
    std::set<std::string> names;
    for (const auto& c : r.checks) names.insert(c.name);
    CHECK(names.size() == 3);
    CHECK(r.checks[0].name == "vaisman");
  }
}

TEST_CASE("report serialization") {
  RunConfig cfg = parse_config(kJordan);
  cfg.sampling.count = 40;
  std::vector<SampleRow> rows;
  const RunReport r = run_pipeline(cfg, 1, &rows);
  const std::string text = emit_json(r);
  const RunReport back = parse_report(text);
  CHECK(reports_equal(r, back, false));
  CHECK(emit_json(back) == text);
  CHECK(text.find("\"schema_version\": 1") != std::string::npos);
  CHECK(text.find("\"overall\": \"pass\"") != std::string::npos);

  SUBCASE("17 significant digits") {
    const std::string s = dump_json(nlohmann::json{{"x", 0.1}, {"y", 2.0}});
    CHECK(s.find("0.10000000000000001") != std::string::npos);
    CHECK(s.find("2.0") != std::string::npos);
  }
  SUBCASE("non-finite numbers survive as null") {
    RunReport copy = r;
    copy.checks[0].residual = std::nan("");
    CHECK(reports_equal(copy, parse_report(emit_json(copy)), false));
  }
  SUBCASE("CSV dump") {
    const std::string csv = emit_csv(rows);
    CHECK(csv.rfind("re_z1,im_z1,re_z2,im_z2,phi,min_eig\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 41);
  }
  SUBCASE("malformed report") {
    CHECK_THROWS_AS(parse_report("{}"), LckError);
  }
}

TEST_CASE("reports are identical across thread counts") {
  const RunConfig cfg = parse_config(kJordan);
  const RunReport one = run_pipeline(cfg, 1);
  const RunReport eight = run_pipeline(cfg, 8);
  CHECK(reports_equal(one, eight));
  CHECK(emit_json(one, false) == emit_json(eight, false));
}

TEST_CASE("command line") {
  const std::string out = "report_cli_test.json";
  CHECK(run_cli("analyze --config " + config_path("radial") + " --out " + out) == 0);
  const RunReport r = parse_report(read_file(out));
  CHECK(r.overall == "pass");
  CHECK(run_cli("analyze --config " + config_path("notcontraction")) == 2);
  CHECK(run_cli("analyze --config " + config_path("radial") + " --format xml") == 2);
  CHECK(run_cli("analyze --config does_not_exist.json") == 2);
  CHECK(run_cli("check-vaisman --config " + config_path("diagonal")) == 0);
  CHECK(run_cli("shell-suggest --config " + config_path("jordan4_lyapunov")) == 0);
  CHECK(run_cli("min-lambda --config " + config_path("jordan")) == 0);
  CHECK(run_cli("potential-dump --config " + config_path("jordan") + " --format csv --out " + out) == 0);
  CHECK(read_file(out).rfind("re_z1,im_z1,re_z2,im_z2,phi,min_eig", 0) == 0);

  // --seed overrides the config, --threads overrides the environment
  CHECK(run_cli("analyze --config " + config_path("radial") + " --seed 8 --out " + out) == 0);
  CHECK(parse_report(read_file(out)).config.sampling.seed == 8);
  setenv("LCKLAB_THREADS", "3", 1);
  CHECK(threads_from_env() == 3);
  CHECK(run_cli("analyze --config " + config_path("radial") + " --threads 2 --out " + out) == 0);
  unsetenv("LCKLAB_THREADS");
  CHECK(threads_from_env() == 1);
  std::remove(out.c_str());
}
