#include "ppfso3/errors.hpp"

#include <nlohmann/json.hpp>

#include <sstream>

namespace ppfso3 {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotAntiSymmetric: return "NotAntiSymmetric";
    case ErrorKind::NotRotation: return "NotRotation";
    case ErrorKind::NonUnitAxis: return "NonUnitAxis";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::EnvelopeViolation: return "EnvelopeViolation";
    case ErrorKind::CollinearVectors: return "CollinearVectors";
    case ErrorKind::ZeroNormVector: return "ZeroNormVector";
    case ErrorKind::SingularMB: return "SingularMB";
    case ErrorKind::DegenerateProfile: return "DegenerateProfile";
    case ErrorKind::SingularityNear180: return "SingularityNear180";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

std::string Error::to_json_line() const {
  nlohmann::json j;
  j["error"] = std::string(to_string(kind_));
  j["message"] = what();
  if (has_time()) {
    j["t"] = t_;
  } else {
    j["t"] = nullptr;
  }
  return j.dump();
}

namespace {

std::string envelope_message(double e, double xi, double t) {
  std::ostringstream os;
  os.precision(17);
  os << "normalized error " << e << " outside prescribed envelope (xi = " << xi
     << ") at t = " << t;
  return os.str();
}

}  // namespace

EnvelopeViolationError::EnvelopeViolationError(double e, double xi, double t)
    : Error(ErrorKind::EnvelopeViolation, envelope_message(e, xi, t), t),
      e_(e),
      xi_(xi) {}

}  // namespace ppfso3
