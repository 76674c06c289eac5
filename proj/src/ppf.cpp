#include "ppfso3/ppf.hpp"

#include "ppfso3/errors.hpp"

#include <algorithm>
#include <cmath>

namespace ppfso3 {

void PpfParams::validate() const {
  const auto fail = [](const char* what) {
    throw Error(ErrorKind::InvalidParams, std::string("invalid PPF parameters: ") + what);
  };
  if (!(xi_inf > 0.0)) fail("xi_inf must be > 0");
  if (!(xi0 >= xi_inf)) fail("xi0 must be >= xi_inf");
  if (!(ell > 0.0)) fail("ell must be > 0");
  if (!(delta_under > 0.0)) fail("delta_under must be > 0");
  if (!(delta_bar >= delta_under)) fail("delta_bar must be >= delta_under");
}

double xi(const PpfParams& p, double t) {
  return (p.xi0 - p.xi_inf) * std::exp(-p.ell * t) + p.xi_inf;
}

double xi_dot(const PpfParams& p, double t) {
  return -p.ell * (p.xi0 - p.xi_inf) * std::exp(-p.ell * t);
}

double envelope_upper(const PpfParams& p, double t) { return p.delta_bar * xi(p, t); }

double envelope_lower(const PpfParams& p, double t) { return -p.delta_under * xi(p, t); }

namespace {

TransformedError transform_normalized(const PpfParams& p, double r, double xi_t) {
  const double lo = p.delta_under + r;
  const double hi = p.delta_bar - r;
  return {0.5 * std::log(lo / hi), (1.0 / (2.0 * xi_t)) * (1.0 / lo + 1.0 / hi)};
}

}  // namespace

TransformedError transform(const PpfParams& p, double e, double xi_t, double t) {
  const double r = e / xi_t;
  if (!(r > -p.delta_under && r < p.delta_bar)) {
    throw EnvelopeViolationError(e, xi_t, t);
  }
  return transform_normalized(p, r, xi_t);
}

ClampedTransform transform_clamped(const PpfParams& p, double e, double xi_t) {
  const double lo = -p.delta_under + 1e-9;
  const double hi = p.delta_bar - 1e-9;
  const double r = e / xi_t;
  const double rc = std::clamp(r, lo, hi);
  return {transform_normalized(p, rc, xi_t), rc != r};
}

double z_of(const PpfParams& p, double transformed) {
  // Written with tanh-style ratios so large |E| stays finite.
  if (transformed >= 0.0) {
    const double q = std::exp(-2.0 * transformed);
    return (p.delta_bar - p.delta_under * q) / (1.0 + q);
  }
  const double q = std::exp(2.0 * transformed);
  return (p.delta_bar * q - p.delta_under) / (q + 1.0);
}

}  // namespace ppfso3
