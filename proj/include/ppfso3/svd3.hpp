#pragma once

#include <Eigen/Core>

namespace ppfso3 {

/// a = u * diag(sigma) * v^T with u, v orthogonal (det may be -1).
struct Svd3 {
  Eigen::Matrix3d u;
  Eigen::Vector3d sigma;
  Eigen::Matrix3d v;
};

/**
 * Deterministic 3x3 singular value decomposition by one-sided Jacobi.
 *
 * Column pairs (0,1), (0,2), (1,2) of a working copy W = a * V are rotated
 * in cyclic sweeps until every pair is orthogonal to within 1e-15 relative
 * (at most 60 sweeps). Then:
 *   - sigma_k = |W_k|, u_k = W_k / sigma_k;
 *   - columns are ordered by descending sigma with a stable sort, so ties
 *     keep their Jacobi order;
 *   - each (u_k, v_k) pair is sign-flipped so that the first component of
 *     v_k whose magnitude exceeds 1e-12 is positive;
 *   - u columns for sigma below 1e-12 * sigma_0 are completed to
 *     an orthonormal basis (cross product, or the least-aligned unit axis).
 */
Svd3 svd3(const Eigen::Matrix3d& a);

}  // namespace ppfso3
