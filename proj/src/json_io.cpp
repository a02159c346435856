#include "lcklab/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace lcklab {

using nlohmann::json;

json number_json(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double number_from_json(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

json matrix_json(const MatC& M) {
  json out = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      out.push_back({number_json(M(r, c).real()), number_json(M(r, c).imag())});
    }
  }
  return out;
}

json vector_json(const VecC& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out.push_back({number_json(v(i).real()), number_json(v(i).imag())});
  }
  return out;
}

VecC vector_from_json(const json& j) {
  VecC v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = cxd(number_from_json(j[i][0]), number_from_json(j[i][1]));
  }
  return v;
}

MatC matrix_from_json(const json& j, Eigen::Index n) {
  MatC M(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      const json& e = j[static_cast<std::size_t>(r * n + c)];
      M(r, c) = cxd(number_from_json(e[0]), number_from_json(e[1]));
    }
  }
  return M;
}

namespace {

void write(std::string& out, const json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) { out += "{}"; return; }
      out += "{";
      out += nl;
      bool first = true;
      for (const auto& [key, val] : j.items()) {
        if (!first) { out += ","; out += nl; }
        first = false;
        out += pad;
        out += json(key).dump();
        out += indent > 0 ? ": " : ":";
        write(out, val, indent, depth + 1);
      }
      out += nl;
      out += close_pad;
      out += "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) { out += "[]"; return; }
      // short numeric arrays ([re, im] pairs, ranges) stay on one line
      const bool flat = j.size() <= 2 && std::all_of(j.begin(), j.end(), [](const json& e) {
                          return e.is_number() || e.is_null();
                        });
      out += "[";
      if (!flat) out += nl;
      bool first = true;
      for (const auto& val : j) {
        if (!first) { out += ","; out += flat ? " " : nl; }
        first = false;
        if (!flat) out += pad;
        write(out, val, indent, depth + 1);
      }
      if (!flat) { out += nl; out += close_pad; }
      out += "]";
      return;
    }
    case json::value_t::number_float: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", j.get<double>());
      std::string s(buf);
      // keep the value a float on re-parse
      if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
      out += s;
      return;
    }
    default:
      out += j.dump();
      return;
  }
}

}  // namespace

std::string dump_json(const json& j, int indent) {
  std::string out;
  write(out, j, indent, 0);
  out += "\n";
  return out;
}

}  // namespace lcklab
