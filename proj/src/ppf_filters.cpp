#include "ppfso3/errors.hpp"
#include "ppfso3/filters.hpp"
#include "ppfso3/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ppfso3 {

void PpfFilterGains::validate() const {
  if (!(gamma > 0.0) || !(k_w > 0.0)) {
    throw Error(ErrorKind::InvalidParams, "filter gains gamma and k_w must be > 0");
  }
}

double lyapunov(double E, const Vec3& b_tilde, double gamma) {
  return 0.5 * E * E + b_tilde.squaredNorm() / (2.0 * gamma);
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Correction terms evaluated at one (R_hat, t).
struct Correction {
  Vec3 W = Vec3::Zero();
  Vec3 b_dot = Vec3::Zero();
  double e = 0.0;
  double E = kNaN;
  double mu = kNaN;
  double xi_t = kNaN;
  bool clamped = false;
  bool gated = false;
  bool singular = false;
};

// Fills E and mu; returns false when the correction must be skipped.
bool apply_transform(const PpfParams& p, double t, const GuardOptions& guard, Correction& c) {
  switch (guard.mode) {
    case GuardMode::Strict: {
      const TransformedError te = transform(p, c.e, c.xi_t, t);
      c.E = te.value;
      c.mu = te.mu;
      return true;
    }
    case GuardMode::Clamp: {
      const ClampedTransform ct = transform_clamped(p, c.e, c.xi_t);
      c.E = ct.te.value;
      c.mu = ct.te.mu;
      c.clamped = ct.clamped;
      return true;
    }
    case GuardMode::Gate:
      if (c.e > -p.delta_under * c.xi_t && c.e < p.delta_bar * c.xi_t) {
        const TransformedError te = transform(p, c.e, c.xi_t, t);
        c.E = te.value;
        c.mu = te.mu;
        return true;
      }
      c.gated = true;
      return false;
  }
  return false;
}

bool singular_guard(const char* what, double denom, double t, const GuardOptions& guard,
                    Correction& c) {
  if (denom > guard.eps_sing) return false;
  if (guard.mode == GuardMode::Strict) {
    std::ostringstream os;
    os.precision(17);
    os << what << " = " << denom << " is within the singularity guard";
    throw Error(ErrorKind::SingularityNear180, os.str(), t);
  }
  c.singular = true;
  return true;
}

// Correction flow with the measurement held, then the gyro rotation.
template <typename CorrectionFn>
PpfStepResult integrate(const PpfFilterState& s, const Vec3& omega_m, double t, double dt,
                        const GuardOptions& guard, CorrectionFn&& correction) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidParams, "dt must be > 0", t);

  Correction c = correction(s.R_hat, t);
  PpfStepResult out{s, {}};
  StepDiagnostics& diag = out.diag;
  diag.err_metric = c.e;
  diag.E = c.E;
  diag.mu = c.mu;
  diag.W = c.W;
  diag.xi_t = c.xi_t;
  diag.envelope_ok = c.e < c.xi_t;

  RotationMatrix R = s.R_hat;
  Vec3 b = s.b_hat;
  const double h_min = dt / std::max(1, guard.max_substeps);
  double tau = 0.0;
  while (true) {
    diag.clamped = diag.clamped || c.clamped;
    diag.gated = diag.gated || c.gated;
    diag.singular = diag.singular || c.singular;

    double h = dt - tau;
    const double w = c.W.norm();
    if (w * h > guard.max_substep_angle) {
      h = std::min(h, std::max(guard.max_substep_angle / w, h_min));
    }
    R = R * exp_so3(-c.W * h);
    b += h * c.b_dot;
    tau += h;
    ++diag.substeps;
    if (dt - tau <= 1e-12 * dt) break;
    c = correction(R, t + tau);
  }

  R = R * exp_so3((omega_m - b) * dt);
  if (R.orthonormality_error() > 1e-12) R = RotationMatrix(nearest_rotation(R.matrix()));
  if (!R.matrix().allFinite() || !b.allFinite()) {
    throw Error(ErrorKind::NonFiniteState, "filter state became non-finite", t);
  }

  out.state.R_hat = R;
  out.state.b_hat = b;
  out.state.last_E = diag.E;
  out.state.last_mu = diag.mu;
  out.state.violation_count += diag.clamped ? 1 : 0;
  out.state.gated_count += diag.gated ? 1 : 0;
  out.state.singular_count += diag.singular ? 1 : 0;
  return out;
}

}  // namespace

PpfStepResult semi_direct_step(const PpfFilterState& s, const MeasurementFrame& frame,
                               const PpfParams& p, const PpfFilterGains& g, double t, double dt,
                               const GuardOptions& guard) {
  const RotationMatrix R_y_T = svd_attitude(frame).R_y.transpose();
  return integrate(s, frame.omega_m, t, dt, guard, [&](const RotationMatrix& R_hat, double tau) {
    const RotationMatrix r_tilde = R_y_T * R_hat;
    Correction c;
    c.e = norm_euclid_dist(r_tilde);
    c.xi_t = xi(p, tau);
    if (!apply_transform(p, tau, guard, c)) return c;
    const Vec3 va = vex(pa(r_tilde.matrix()));
    c.b_dot = 0.5 * g.gamma * c.mu * c.E * va;
    const double denom = 1.0 - c.e;
    if (!singular_guard("1 - ||R_tilde||_I", denom, tau, guard, c)) {
      c.W = 2.0 * (g.k_w * c.mu * c.E - xi_dot(p, tau) / (4.0 * c.xi_t)) / denom * va;
    }
    return c;
  });
}

MeasurementSpaceTerms measurement_space_terms(const MeasurementFrame& frame,
                                              const RotationMatrix& R_hat,
                                              const Mat3& m_body_inverse) {
  MeasurementSpaceTerms out;
  Mat3 cross_sum = Mat3::Zero();  // sum s_i v_i^B v_hat_i^T
  for (const VectorObservation& o : frame.observations) {
    const Vec3 v_hat = R_hat.matrix().transpose() * o.v_inertial_ref;
    out.vex_term += 0.5 * o.weight * v_hat.cross(o.v_body_meas);
    out.distance += 0.25 * o.weight * (1.0 - v_hat.dot(o.v_body_meas));
    cross_sum += o.weight * o.v_body_meas * v_hat.transpose();
  }
  out.upsilon = (m_body_inverse * cross_sum).trace();
  return out;
}

PpfStepResult direct_step(const PpfFilterState& s, const MeasurementFrame& frame,
                          const PpfParams& p, const PpfFilterGains& g, double t, double dt,
                          const GuardOptions& guard) {
  const WeightedMatrices wm = weighted_matrices(frame);
  const Mat3 m_inv = wm.m_body.inverse();
  return integrate(s, frame.omega_m, t, dt, guard, [&](const RotationMatrix& R_hat, double tau) {
    const MeasurementSpaceTerms ms = measurement_space_terms(frame, R_hat, m_inv);
    Correction c;
    c.e = ms.distance;
    c.xi_t = xi(p, tau);
    if (!apply_transform(p, tau, guard, c)) return c;
    c.b_dot = 0.5 * g.gamma * c.mu * c.E * ms.vex_term;
    const double denom = 1.0 + ms.upsilon;
    if (!singular_guard("1 + Upsilon", denom, tau, guard, c)) {
      c.W = (4.0 / wm.lambda_min) * (g.k_w * c.mu * c.E - xi_dot(p, tau) / c.xi_t) / denom *
            ms.vex_term;
    }
    return c;
  });
}

PpfStepResult passive_step(const PpfFilterState& s, const MeasurementFrame& frame, double k1,
                           double dt, const GuardOptions& guard) {
  if (!(k1 > 0.0)) {
    throw Error(ErrorKind::InvalidParams, "passive filter gain k1 must be > 0");
  }
  const RotationMatrix R_y_T = svd_attitude(frame).R_y.transpose();
  PpfStepResult out =
      integrate(s, frame.omega_m, frame.t, dt, guard, [&](const RotationMatrix& R_hat, double) {
        const RotationMatrix r_tilde = R_y_T * R_hat;
        Correction c;
        c.e = norm_euclid_dist(r_tilde);
        c.W = k1 * vex(pa(r_tilde.matrix()));
        c.b_dot = c.W;
        return c;
      });
  out.diag.xi_t = kNaN;
  out.diag.envelope_ok = true;
  return out;
}

}  // namespace ppfso3
