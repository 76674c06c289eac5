#include "ppfso3/so3.hpp"

#include "ppfso3/errors.hpp"
#include "ppfso3/svd3.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ppfso3 {

double orthonormality_error(const Mat3& m) {
  const double ortho = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
  const double det = std::abs(m.determinant() - 1.0);
  return std::max(ortho, det);
}

Mat3 nearest_rotation(const Mat3& m) {
  const Svd3 s = svd3(m);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (s.u * s.v.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return s.u * d * s.v.transpose();
}

RotationMatrix::RotationMatrix(const Mat3& m) {
  if (!m.allFinite()) {
    throw Error(ErrorKind::NotRotation, "rotation matrix has non-finite entries");
  }
  const double err = ppfso3::orthonormality_error(m);
  if (err <= kOrthonormalTol) {
    m_ = m;
  } else if (err <= kReprojectTol) {
    m_ = nearest_rotation(m);
  } else {
    std::ostringstream os;
    os << "matrix is not a rotation (orthonormality error " << err << ")";
    throw Error(ErrorKind::NotRotation, os.str());
  }
}

double RotationMatrix::orthonormality_error() const {
  return ppfso3::orthonormality_error(m_);
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

Vec3 vex(const Mat3& a) {
  const double asym = (a + a.transpose()).norm();
  if (asym > 1e-9 * std::max(1.0, a.norm())) {
    std::ostringstream os;
    os << "vex of a matrix that is not anti-symmetric (|A + A^T| = " << asym << ")";
    throw Error(ErrorKind::NotAntiSymmetric, os.str());
  }
  return Vec3(a(2, 1), a(0, 2), a(1, 0));
}

Mat3 pa(const Mat3& b) { return 0.5 * (b - b.transpose()); }

Mat3 ps(const Mat3& a) { return 0.5 * (a + a.transpose()); }

double norm_euclid_dist(const Mat3& m) { return 0.25 * (3.0 - m.trace()); }

double norm_euclid_dist(const RotationMatrix& r) {
  // Clamp rounding just outside [0, 1].
  return std::clamp(norm_euclid_dist(r.matrix()), 0.0, 1.0);
}

RotationMatrix angle_axis(double alpha, const Vec3& u) {
  if (std::abs(u.norm() - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "angle-axis axis must be unit length (|u| = " << u.norm() << ")";
    throw Error(ErrorKind::NonUnitAxis, os.str());
  }
  const Mat3 k = skew(u);
  return RotationMatrix(Mat3::Identity() - std::sin(alpha) * k + (1.0 - std::cos(alpha)) * k * k);
}

RotationMatrix rodriguez(const Vec3& rho) {
  const double n2 = rho.squaredNorm();
  const Mat3 m = ((1.0 - n2) * Mat3::Identity() + 2.0 * rho * rho.transpose() + 2.0 * skew(rho)) /
                 (1.0 + n2);
  return RotationMatrix(m);
}

RotationMatrix exp_so3(const Vec3& w) {
  const double theta2 = w.squaredNorm();
  const double theta = std::sqrt(theta2);
  double a;  // sin(theta) / theta
  double b;  // (1 - cos(theta)) / theta^2
  if (theta < 1e-4) {
    a = 1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0;
    b = 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  const Mat3 k = skew(w);
  return RotationMatrix(Mat3::Identity() + a * k + b * k * k);
}

}  // namespace ppfso3
