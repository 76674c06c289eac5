#pragma once

#include "ppfso3/sensors.hpp"
#include "ppfso3/so3.hpp"

namespace ppfso3 {

struct ReconstructedAttitude {
  RotationMatrix R_y;
  /// J(R_y) = 1 - sum s_i (v_i^B)^T R_y^T v_i^I with weights rescaled to sum 1.
  double residual = 0.0;
};

/**
 * Static attitude from weighted vector pairs (Wahba's problem) via SVD.
 *
 * With weights renormalized to sum to one, B = sum s_i v_i^B (v_i^I)^T =
 * U S V^T and R_y = V_+ U_+^T where U_+ = U diag(1, 1, det U) and
 * V_+ = V diag(1, 1, det V). The result is always a proper rotation.
 *
 * Throws DegenerateProfile for fewer than two observations or when the two
 * smallest singular values of B are both below 1e-9.
 */
ReconstructedAttitude svd_attitude(const MeasurementFrame& frame);

/// Wahba cost J(R) with the weights of `frame` renormalized to sum to one.
double wahba_cost(const MeasurementFrame& frame, const RotationMatrix& R);

}  // namespace ppfso3
