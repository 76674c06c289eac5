#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ppfso3 {

enum class ErrorKind {
  NotAntiSymmetric,
  NotRotation,
  NonUnitAxis,
  InvalidParams,
  EnvelopeViolation,
  CollinearVectors,
  ZeroNormVector,
  SingularMB,
  DegenerateProfile,
  SingularityNear180,
  NonFiniteState,
  InvalidConfig,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Base exception for every failure raised by the library. `kind()` is the
/// machine-readable tag; `t()` is the simulation time when one is known.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what,
        double t = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(what), kind_(kind), t_(t) {}

  ErrorKind kind() const noexcept { return kind_; }
  double t() const noexcept { return t_; }
  bool has_time() const noexcept { return !std::isnan(t_); }

  /// One-line JSON record: {"error":"<kind>","message":"...","t":...}
  std::string to_json_line() const;

 private:
  ErrorKind kind_;
  double t_;
};

/// Raised when the normalized error leaves the open interval
/// (-delta_under * xi, delta_bar * xi).
class EnvelopeViolationError : public Error {
 public:
  EnvelopeViolationError(double e, double xi, double t);

  double error_value() const noexcept { return e_; }
  double xi() const noexcept { return xi_; }

 private:
  double e_;
  double xi_;
};

}  // namespace ppfso3
