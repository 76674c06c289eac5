#include "ppfso3/errors.hpp"
#include "ppfso3/filters.hpp"

#include <cmath>
#include <sstream>

namespace ppfso3 {

Quat quat_multiply(const Quat& a, const Quat& b) {
  const double a0 = a(0);
  const double b0 = b(0);
  const Vec3 av = a.tail<3>();
  const Vec3 bv = b.tail<3>();
  Quat out;
  out(0) = a0 * b0 - av.dot(bv);
  out.tail<3>() = a0 * bv + b0 * av + av.cross(bv);
  return out;
}

Quat quat_conjugate(const Quat& q) { return Quat(q(0), -q(1), -q(2), -q(3)); }

Mat3 quat_to_matrix(const Quat& q) {
  const double q0 = q(0);
  const Vec3 v = q.tail<3>();
  // (q0^2 - |v|^2) I + 2 v v^T + 2 q0 [v]x
  return (q0 * q0 - v.squaredNorm()) * Mat3::Identity() + 2.0 * v * v.transpose() +
         2.0 * q0 * skew(v);
}

Quat quat_from_rotation(const RotationMatrix& R) {
  const Mat3& m = R.matrix();
  const double tr = m.trace();
  Quat q;
  // Shepperd: pivot on the largest of (q0^2, q1^2, q2^2, q3^2).
  const Eigen::Vector4d d(tr, m(0, 0), m(1, 1), m(2, 2));
  int k = 0;
  d.maxCoeff(&k);
  if (k == 0) {
    const double s = 2.0 * std::sqrt(1.0 + tr);
    q << 0.25 * s, (m(2, 1) - m(1, 2)) / s, (m(0, 2) - m(2, 0)) / s, (m(1, 0) - m(0, 1)) / s;
  } else if (k == 1) {
    const double s = 2.0 * std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2));
    q << (m(2, 1) - m(1, 2)) / s, 0.25 * s, (m(0, 1) + m(1, 0)) / s, (m(0, 2) + m(2, 0)) / s;
  } else if (k == 2) {
    const double s = 2.0 * std::sqrt(1.0 - m(0, 0) + m(1, 1) - m(2, 2));
    q << (m(0, 2) - m(2, 0)) / s, (m(0, 1) + m(1, 0)) / s, 0.25 * s, (m(1, 2) + m(2, 1)) / s;
  } else {
    const double s = 2.0 * std::sqrt(1.0 - m(0, 0) - m(1, 1) + m(2, 2));
    q << (m(1, 0) - m(0, 1)) / s, (m(0, 2) + m(2, 0)) / s, (m(1, 2) + m(2, 1)) / s, 0.25 * s;
  }
  if (q(0) < 0.0) {
    q = -q;
  }
  return q.normalized();
}

Eigen::Matrix4d quat_psi(const Vec3& x) {
  Eigen::Matrix4d m;
  m(0, 0) = 0.0;
  m.block<1, 3>(0, 1) = -x.transpose();
  m.block<3, 1>(1, 0) = x;
  m.block<3, 3>(1, 1) = -skew(x);
  return m;
}

MekfNoise mekf_case(int which) {
  double qv = 0.0;
  double qw = 0.0;
  switch (which) {
    case 1: qv = 1.0; qw = 1.0; break;
    case 2: qv = 0.1; qw = 10.0; break;
    case 3: qv = 0.01; qw = 100.0; break;
    default: {
      std::ostringstream os;
      os << "unknown MEKF case " << which << " (expected 1, 2 or 3)";
      throw Error(ErrorKind::InvalidParams, os.str());
    }
  }
  return {{qv * Mat3::Identity()}, qw * Mat3::Identity(), qw * Mat3::Identity()};
}

RotationMatrix MekfState::attitude() const { return RotationMatrix(quat_to_matrix(q_hat)); }

MekfState make_mekf_state(const RotationMatrix& R0, const Vec3& b0, MekfNoise noise, double p_a0,
                          double p_b0) {
  MekfState s;
  s.q_hat = quat_from_rotation(R0);
  s.b_hat = b0;
  s.P_a = p_a0 * Mat3::Identity();
  s.P_b = p_b0 * Mat3::Identity();
  s.P_c.setZero();
  s.noise = std::move(noise);
  return s;
}

MekfState mekf_step(const MekfState& s, const MeasurementFrame& frame, double dt) {
  const std::size_t n = frame.observations.size();
  const std::vector<Mat3>& qv = s.noise.q_v;
  if (qv.empty() || (qv.size() != 1 && qv.size() != n)) {
    throw Error(ErrorKind::InvalidParams, "MEKF needs one Qv or one Qv per observation", frame.t);
  }

  const Quat q_inv = quat_conjugate(s.q_hat);
  Vec3 W = Vec3::Zero();
  Mat3 S = Mat3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const VectorObservation& o = frame.observations[i];
    const Mat3 qv_inv = (qv.size() == 1 ? qv[0] : qv[i]).inverse();
    Quat v_i;
    v_i << 0.0, o.v_inertial_ref;
    const Vec3 v_hat = quat_multiply(quat_multiply(q_inv, v_i), s.q_hat).tail<3>();
    W += v_hat.cross(qv_inv * (v_hat - o.v_body_meas));
    const Mat3 k = skew(v_hat);
    S += k.transpose() * qv_inv * k;
  }

  const Vec3 w = frame.omega_m - s.b_hat;
  const Mat3 wx = skew(w);

  const Quat q_dot = 0.5 * quat_psi(w + s.P_a * W) * s.q_hat;
  const Vec3 b_dot = s.P_c.transpose() * W;
  const Mat3 pa_dot = s.noise.q_omega + 2.0 * ps(s.P_a * wx - s.P_c) - s.P_a * S * s.P_a;
  const Mat3 pb_dot = s.noise.q_b - s.P_c.transpose() * S * s.P_c;
  const Mat3 pc_dot = -wx * s.P_c - s.P_a * S * s.P_c - s.P_b;

  MekfState next = s;
  next.q_hat = (s.q_hat + dt * q_dot).normalized();
  next.b_hat = s.b_hat + dt * b_dot;
  next.P_a = ps(s.P_a + dt * pa_dot);
  next.P_b = ps(s.P_b + dt * pb_dot);
  next.P_c = s.P_c + dt * pc_dot;

  if (!next.q_hat.allFinite() || !next.b_hat.allFinite() || !next.P_a.allFinite() ||
      !next.P_b.allFinite() || !next.P_c.allFinite()) {
    throw Error(ErrorKind::NonFiniteState, "MEKF state became non-finite", frame.t);
  }
  return next;
}

}  // namespace ppfso3
