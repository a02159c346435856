#include "lcklab/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "lcklab/json_io.hpp"

namespace lcklab {

using nlohmann::json;

namespace {

const std::vector<std::pair<const char*, double ToleranceProfile::*>>& tolerance_fields() {
  static const std::vector<std::pair<const char*, double ToleranceProfile::*>> fields = {
      {"reconstruct", &ToleranceProfile::reconstruct},
      {"exp_residual", &ToleranceProfile::exp_residual},
      {"branch_cut", &ToleranceProfile::branch_cut},
      {"diag_condition", &ToleranceProfile::diag_condition},
      {"lyapunov_residual", &ToleranceProfile::lyapunov_residual},
      {"lyapunov_condition", &ToleranceProfile::lyapunov_condition},
      {"sym", &ToleranceProfile::sym},
      {"on_shell", &ToleranceProfile::on_shell},
      {"degenerate_gradient", &ToleranceProfile::degenerate_gradient},
      {"root", &ToleranceProfile::root},
      {"max_flow_time", &ToleranceProfile::max_flow_time},
      {"psd_margin", &ToleranceProfile::psd_margin},
      {"lambda_rel", &ToleranceProfile::lambda_rel},
      {"power_identity", &ToleranceProfile::power_identity},
      {"automorphy", &ToleranceProfile::automorphy},
      {"dtheta", &ToleranceProfile::dtheta},
      {"lck_identity", &ToleranceProfile::lck_identity},
      {"pullback", &ToleranceProfile::pullback},
      {"commutation", &ToleranceProfile::commutation},
      {"unitarity", &ToleranceProfile::unitarity},
      {"shell_preservation", &ToleranceProfile::shell_preservation},
      {"homothety", &ToleranceProfile::homothety},
      {"tangency", &ToleranceProfile::tangency},
      {"transversality", &ToleranceProfile::transversality},
      {"lee_parallel", &ToleranceProfile::lee_parallel},
      {"lee_noise", &ToleranceProfile::lee_noise},
  };
  return fields;
}

[[noreturn]] void bad(const std::string& msg) { throw LckError(ErrorCode::InvalidConfig, msg); }

MatC parse_matrix(const json& j, int n, const char* what) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(n) * n) {
    bad(std::string(what) + " must list n*n complex entries row-major");
  }
  MatC M(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const json& e = j[static_cast<std::size_t>(r * n + c)];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
        bad(std::string(what) + " entries must be [re, im] pairs");
      }
      M(r, c) = cxd(e[0].get<double>(), e[1].get<double>());
    }
  }
  return M;
}

ShellConfig::Type shell_type(const std::string& s) {
  if (s == "sphere") return ShellConfig::Type::Sphere;
  if (s == "ellipsoid") return ShellConfig::Type::Ellipsoid;
  if (s == "lyapunov") return ShellConfig::Type::Lyapunov;
  bad("unknown shell type '" + s + "'");
}

}  // namespace

std::string_view to_string(ShellConfig::Type t) {
  switch (t) {
    case ShellConfig::Type::Sphere: return "sphere";
    case ShellConfig::Type::Ellipsoid: return "ellipsoid";
    case ShellConfig::Type::Lyapunov: return "lyapunov";
  }
  return "sphere";
}

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names = {
      "levi",     "psh",           "automorphy",       "power_identity", "lck_identity",
      "dtheta",   "pullback",      "theta_invariance", "vaisman",        "reeb_transversal",
      "homothety", "lee_parallel"};
  return names;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) bad("config must be a JSON object");
  RunConfig cfg;
  if (!j.contains("n") || !j["n"].is_number_integer()) bad("missing integer field 'n'");
  cfg.n = j["n"].get<int>();
  if (cfg.n < 2 || cfg.n > 8) bad("n must lie in [2, 8]");
  if (!j.contains("A")) bad("missing field 'A'");
  cfg.A = parse_matrix(j["A"], cfg.n, "A");

  if (j.contains("shell")) {
    const json& s = j["shell"];
    if (!s.is_object() || !s.contains("type")) bad("shell needs a 'type'");
    cfg.shell.type = shell_type(s["type"].get<std::string>());
    if (s.contains("P") && !s["P"].is_null()) cfg.shell.P = parse_matrix(s["P"], cfg.n, "shell.P");
    if (cfg.shell.type == ShellConfig::Type::Ellipsoid && !cfg.shell.P) {
      bad("ellipsoid shell needs 'P'");
    }
  }

  if (j.contains("lambda")) {
    const json& l = j["lambda"];
    if (l.is_string()) {
      if (l.get<std::string>() != "auto") bad("lambda must be a positive number or \"auto\"");
    } else if (l.is_number()) {
      cfg.lambda = l.get<double>();
      if (!(*cfg.lambda > 0.0)) bad("lambda must be positive");
    } else {
      bad("lambda must be a positive number or \"auto\"");
    }
  }
  if (j.contains("lambda_bracket")) {
    const json& b = j["lambda_bracket"];
    if (!b.is_array() || b.size() != 2) bad("lambda_bracket must be [lo, hi]");
    cfg.lambda_lo = b[0].get<double>();
    cfg.lambda_hi = b[1].get<double>();
    if (!(cfg.lambda_lo > 0.0 && cfg.lambda_hi > cfg.lambda_lo)) bad("lambda_bracket needs 0 < lo < hi");
  }

  if (!j.contains("sampling") || !j["sampling"].is_object()) bad("missing 'sampling' block");
  const json& s = j["sampling"];
  if (!s.contains("seed") || !s["seed"].is_number_integer()) bad("sampling.seed is mandatory");
  cfg.sampling.seed = s["seed"].get<std::uint64_t>();
  if (s.contains("count")) {
    const auto count = s["count"].get<std::int64_t>();
    if (count < 1 || count > 1000000) bad("sampling.count must lie in [1, 1e6]");
    cfg.sampling.count = static_cast<std::size_t>(count);
  }
  if (s.contains("t_range")) {
    const json& t = s["t_range"];
    if (!t.is_array() || t.size() != 2) bad("sampling.t_range must be [t_min, t_max]");
    cfg.sampling.t_min = t[0].get<double>();
    cfg.sampling.t_max = t[1].get<double>();
    if (!(cfg.sampling.t_min <= cfg.sampling.t_max)) bad("sampling.t_range must be ordered");
  }
  if (s.contains("subsample")) {
    const auto sub = s["subsample"].get<std::int64_t>();
    if (sub < 1) bad("sampling.subsample must be positive");
    cfg.sampling.subsample = static_cast<std::size_t>(sub);
  }

  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    if (!t.is_object()) bad("tolerances must be an object");
    for (const auto& [key, val] : t.items()) {
      bool found = false;
      for (const auto& [name, member] : tolerance_fields()) {
        if (key == name) {
          cfg.tolerances.*member = val.get<double>();
          found = true;
        }
      }
      if (key == "max_root_iterations") {
        cfg.tolerances.max_root_iterations = val.get<int>();
        found = true;
      }
      if (!found) bad("unknown tolerance '" + key + "'");
    }
  }

  if (j.contains("checks")) {
    for (const auto& c : j["checks"]) {
      const auto name = c.get<std::string>();
      const auto& known = known_checks();
      if (std::find(known.begin(), known.end(), name) == known.end()) {
        bad("unknown check '" + name + "'");
      }
      if (std::find(cfg.checks.begin(), cfg.checks.end(), name) == cfg.checks.end()) {
        cfg.checks.push_back(name);
      }
    }
  }
  if (j.contains("slow")) cfg.slow = j["slow"].get<bool>();
  return cfg;
}

json config_json(const RunConfig& cfg) {
  json j;
  j["n"] = cfg.n;
  j["A"] = matrix_json(cfg.A);
  j["shell"] = {{"type", std::string(to_string(cfg.shell.type))}};
  if (cfg.shell.P) j["shell"]["P"] = matrix_json(*cfg.shell.P);
  j["lambda"] = cfg.lambda ? json(*cfg.lambda) : json("auto");
  j["lambda_bracket"] = {cfg.lambda_lo, cfg.lambda_hi};
  j["sampling"] = {{"count", cfg.sampling.count},
                   {"t_range", {cfg.sampling.t_min, cfg.sampling.t_max}},
                   {"seed", cfg.sampling.seed},
                   {"subsample", cfg.sampling.subsample}};
  json tol = json::object();
  for (const auto& [name, member] : tolerance_fields()) tol[name] = cfg.tolerances.*member;
  tol["max_root_iterations"] = cfg.tolerances.max_root_iterations;
  j["tolerances"] = tol;
  j["checks"] = cfg.checks;
  j["slow"] = cfg.slow;
  return j;
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    bad(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const json::exception& e) {
    bad(std::string("config has a malformed field: ") + e.what());
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const RunConfig& cfg) { return dump_json(config_json(cfg)); }

}  // namespace lcklab
