#pragma once

#include <limits>

namespace ppfso3 {

/**
 * Exponentially decaying performance envelope
 *   xi(t) = (xi0 - xi_inf) exp(-ell t) + xi_inf
 * and the bounds of the error transform: the normalized error e / xi must
 * stay inside (-delta_under, delta_bar).
 */
struct PpfParams {
  double xi0 = 1.2;
  double xi_inf = 0.05;
  double ell = 3.0;
  double delta_bar = 1.2;
  double delta_under = 1.2;

  /// Throws InvalidParams unless xi0 >= xi_inf > 0, ell > 0 and
  /// delta_bar >= delta_under > 0. xi0 == xi_inf (flat envelope) is allowed.
  void validate() const;
};

struct TransformedError {
  double value = 0.0;  ///< E
  double mu = 0.0;     ///< dE/de, always > 0
};

double xi(const PpfParams& p, double t);
double xi_dot(const PpfParams& p, double t);

/// Upper and lower transform bounds delta_bar * xi(t) and -delta_under * xi(t).
double envelope_upper(const PpfParams& p, double t);
double envelope_lower(const PpfParams& p, double t);

/**
 * E = 0.5 ln((delta_under + e/xi) / (delta_bar - e/xi)) together with
 * mu = (1 / 2xi) (1 / (delta_under + e/xi) + 1 / (delta_bar - e/xi)).
 *
 * Throws EnvelopeViolationError (carrying e, xi_t and t) unless
 * -delta_under * xi_t < e < delta_bar * xi_t.
 */
TransformedError transform(const PpfParams& p, double e, double xi_t,
                           double t = std::numeric_limits<double>::quiet_NaN());

struct ClampedTransform {
  TransformedError te;
  bool clamped = false;
};

/// Like transform(), but clamps e / xi_t to the admissible interval shrunk by
/// 1e-9 instead of throwing. `clamped` reports whether the clamp was active.
ClampedTransform transform_clamped(const PpfParams& p, double e, double xi_t);

/// Z(E) = (delta_bar e^E - delta_under e^-E) / (e^E + e^-E); inverse of the
/// transform in the normalized error e / xi.
double z_of(const PpfParams& p, double transformed);

}  // namespace ppfso3
