#include "lcklab/check.hpp"

#include <cmath>

namespace lcklab {

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::Inapplicable: return "inapplicable";
    case Status::Withheld: return "withheld";
  }
  return "fail";
}

Status status_from_string(std::string_view s) {
  if (s == "pass") return Status::Pass;
  if (s == "fail") return Status::Fail;
  if (s == "inapplicable") return Status::Inapplicable;
  if (s == "withheld") return Status::Withheld;
  throw LckError(ErrorCode::InvalidConfig, "unknown status '" + std::string(s) + "'");
}

CheckReport graded(std::string name, double residual, double tolerance) {
  CheckReport r;
  r.name = std::move(name);
  r.residual = residual;
  r.tolerance = tolerance;
  r.status = (std::isfinite(residual) && residual <= tolerance) ? Status::Pass : Status::Fail;
  return r;
}

}  // namespace lcklab
