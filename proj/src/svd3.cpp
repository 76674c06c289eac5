#include "ppfso3/svd3.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace ppfso3 {

namespace {

using Eigen::Matrix3d;
using Eigen::Vector3d;

// Unit vector orthogonal to `a` (assumed unit): the basis axis least aligned
// with `a`, Gram-Schmidt'd against it.
Vector3d orthogonal_unit(const Vector3d& a) {
  int axis = 0;
  a.cwiseAbs().minCoeff(&axis);
  Vector3d e = Vector3d::Zero();
  e(axis) = 1.0;
  Vector3d o = e - a.dot(e) * a;
  return o.normalized();
}

}  // namespace

Svd3 svd3(const Matrix3d& a) {
  Matrix3d w = a;
  Matrix3d v = Matrix3d::Identity();

  constexpr std::array<std::array<int, 2>, 3> kPairs{{{0, 1}, {0, 2}, {1, 2}}};
  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (const auto& [p, q] : kPairs) {
      const double alpha = w.col(p).squaredNorm();
      const double beta = w.col(q).squaredNorm();
      const double gamma = w.col(p).dot(w.col(q));
      if (gamma == 0.0 || std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta)) {
        continue;
      }
      rotated = true;
      const double zeta = (beta - alpha) / (2.0 * gamma);
      const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
      const double c = 1.0 / std::sqrt(1.0 + t * t);
      const double s = c * t;
      for (Matrix3d* m : {&w, &v}) {
        const Vector3d cp = m->col(p);
        const Vector3d cq = m->col(q);
        m->col(p) = c * cp - s * cq;
        m->col(q) = s * cp + c * cq;
      }
    }
    if (!rotated) {
      break;
    }
  }

  Vector3d norms(w.col(0).norm(), w.col(1).norm(), w.col(2).norm());
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return norms(i) > norms(j); });

  Svd3 out;
  for (int k = 0; k < 3; ++k) {
    out.sigma(k) = norms(order[k]);
    out.v.col(k) = v.col(order[k]);
    out.u.col(k) = w.col(order[k]);
  }

  // Columns this small relative to sigma_0 carry no reliable direction.
  const double tiny = std::max(1e-300, 1e-12 * out.sigma(0));
  for (int k = 0; k < 3; ++k) {
    if (out.sigma(k) > tiny) {
      out.u.col(k) /= out.sigma(k);
      continue;
    }
    if (k == 0) {
      out.u.col(0) = Vector3d::UnitX();
    } else if (k == 1) {
      out.u.col(1) = orthogonal_unit(out.u.col(0));
    } else {
      out.u.col(2) = out.u.col(0).cross(out.u.col(1)).normalized();
    }
  }

  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < 3; ++i) {
      const double x = out.v(i, k);
      if (std::abs(x) > 1e-12) {
        if (x < 0.0) {
          out.v.col(k) *= -1.0;
          out.u.col(k) *= -1.0;
        }
        break;
      }
    }
  }
  return out;
}

}  // namespace ppfso3
