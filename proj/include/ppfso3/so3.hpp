#pragma once

#include <Eigen/Dense>

namespace ppfso3 {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Tolerance used to validate R^T R = I and det(R) = 1.
inline constexpr double kOrthonormalTol = 1e-9;
/// Largest drift that a constructor will silently project back onto SO(3).
inline constexpr double kReprojectTol = 1e-6;

/**
 * Element of SO(3). Construction validates the matrix: anything within
 * kOrthonormalTol is accepted as is, anything within kReprojectTol is snapped
 * to the nearest rotation (polar factor), anything else throws NotRotation.
 */
class RotationMatrix {
 public:
  RotationMatrix() : m_(Mat3::Identity()) {}
  explicit RotationMatrix(const Mat3& m);

  static RotationMatrix identity() { return RotationMatrix(); }

  const Mat3& matrix() const noexcept { return m_; }
  double operator()(int r, int c) const { return m_(r, c); }

  RotationMatrix transpose() const { return RotationMatrix(m_.transpose(), Trusted{}); }

  /// Group product. Both factors are valid rotations, so only the
  /// floating-point drift of the product is left; it is not re-validated.
  RotationMatrix operator*(const RotationMatrix& other) const {
    return RotationMatrix(m_ * other.m_, Trusted{});
  }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  /// max |R^T R - I| entry and |det R - 1|, whichever is larger.
  double orthonormality_error() const;

 private:
  struct Trusted {};
  RotationMatrix(const Mat3& m, Trusted) : m_(m) {}

  Mat3 m_;
};

/// Nearest rotation to `m` in the Frobenius sense (polar factor).
Mat3 nearest_rotation(const Mat3& m);

/// Maximum of |R^T R - I| and |det R - 1| for an arbitrary 3x3 matrix.
double orthonormality_error(const Mat3& m);

Mat3 skew(const Vec3& v);

/// Inverse of skew. Throws NotAntiSymmetric when |A + A^T| exceeds 1e-9
/// (scaled by max(1, |A|)).
Vec3 vex(const Mat3& a);

/// Anti-symmetric projection (B - B^T) / 2.
Mat3 pa(const Mat3& b);

/// Symmetric projection (A + A^T) / 2.
Mat3 ps(const Mat3& a);

/// ||R||_I = Tr{I - R} / 4, in [0, 1]; 0 only at the identity and 1 at any
/// half turn.
double norm_euclid_dist(const RotationMatrix& r);

/// Same quantity for a general matrix, e.g. M^B * R_tilde.
double norm_euclid_dist(const Mat3& m);

/// Angle-axis map I - sin(a)[u]x + (1 - cos(a))[u]x^2. Note the orientation:
/// angle_axis(a, u) == exp_so3(-a * u). Throws NonUnitAxis when |u| differs
/// from 1 by more than 1e-9.
RotationMatrix angle_axis(double alpha, const Vec3& u);

/// Rodrigues-parameter map ((1 - |p|^2) I + 2 p p^T + 2 [p]x) / (1 + |p|^2).
RotationMatrix rodriguez(const Vec3& rho);

/// Closed-form exponential exp([w]x) with the positive convention:
/// I + sin|w| [n]x + (1 - cos|w|) [n]x^2, n = w / |w|. Series fallbacks are
/// used for |w| < 1e-4.
RotationMatrix exp_so3(const Vec3& w);

}  // namespace ppfso3
