#pragma once

#include "ppfso3/ppf.hpp"
#include "ppfso3/sensors.hpp"
#include "ppfso3/so3.hpp"

#include <vector>

namespace ppfso3 {

struct PpfFilterGains {
  double gamma = 1.0;  ///< bias adaptation gain
  double k_w = 3.0;    ///< correction gain

  void validate() const;
};

/// What a PPF filter does when the measured error leaves the transform domain
/// (-delta_under xi, delta_bar xi) or approaches the half-turn singularity.
enum class GuardMode {
  Strict,  ///< throw EnvelopeViolation / SingularityNear180
  Clamp,   ///< clamp e/xi to the bounds shrunk by 1e-9 (counted)
  Gate,    ///< skip the correction for that step, keep propagating the gyro (counted)
};

/// In Clamp and Gate modes a singular step keeps the bias update and sets W = 0.
struct GuardOptions {
  GuardMode mode = GuardMode::Strict;
  double eps_sing = 1e-6;
  /// The correction flow is integrated with the measurement held and the
  /// substep shortened so that |W| h stays below this angle (rad).
  double max_substep_angle = 0.01;
  int max_substeps = 10000;
};

struct PpfFilterState {
  RotationMatrix R_hat;
  Vec3 b_hat = Vec3::Zero();
  double last_E = 0.0;
  double last_mu = 0.0;
  long violation_count = 0;  ///< steps with a clamped transform
  long gated_count = 0;      ///< steps whose correction was skipped
  long singular_count = 0;   ///< steps with W frozen by the singularity guard
};

struct StepDiagnostics {
  double err_metric = 0.0;  ///< ||R_tilde||_I or ||M^B R_tilde||_I
  double E = 0.0;
  double mu = 0.0;
  Vec3 W = Vec3::Zero();
  double xi_t = 0.0;
  bool envelope_ok = true;  ///< err_metric < xi_t
  bool clamped = false;
  bool gated = false;
  bool singular = false;
  int substeps = 0;
};

struct PpfStepResult {
  PpfFilterState state;
  StepDiagnostics diag;
};

/**
 * One step of the filter driven by a reconstructed attitude R_y:
 *
 *   R_tilde = R_y^T R_hat,  e = ||R_tilde||_I,  (E, mu) = transform(e, xi(t))
 *   b_hat'  = 1/2 gamma mu E vex(Pa(R_tilde))
 *   W       = 2 (k_w mu E - xi'/(4 xi)) / (1 - e) vex(Pa(R_tilde))
 *   R_hat'  = R_hat [Omega_m - b_hat - W]x
 *
 * A step of length dt first integrates the correction flow
 * (R_hat' = -R_hat [W]x together with b_hat') with the measurement held,
 * in substeps of at most max_substep_angle / |W|, and then rotates by the
 * gyro: R_hat <- R_hat exp([(Omega_m - b_hat) dt]x). The diagnostics
 * describe the state at the start of the step.
 *
 * Errors: EnvelopeViolation and SingularityNear180 (strict mode), plus
 * anything raised by the reconstruction.
 */
PpfStepResult semi_direct_step(const PpfFilterState& s, const MeasurementFrame& frame,
                               const PpfParams& p, const PpfFilterGains& g, double t, double dt,
                               const GuardOptions& guard = {});

/// vex(Pa(M^B R_tilde)), ||M^B R_tilde||_I and Upsilon(M^B, R_tilde), all
/// written in terms of v_i^B and v_hat_i^B = R_hat^T v_i^I.
struct MeasurementSpaceTerms {
  Vec3 vex_term = Vec3::Zero();
  double distance = 0.0;
  double upsilon = 0.0;
};

/// `m_body_inverse` is (sum s_i v_i^B v_i^B^T)^-1.
MeasurementSpaceTerms measurement_space_terms(const MeasurementFrame& frame,
                                              const RotationMatrix& R_hat,
                                              const Mat3& m_body_inverse);

/**
 * One step of the filter driven directly by the vector measurements:
 *
 *   b_hat' = 1/2 gamma mu E vex(Pa(M^B R_tilde))
 *   W      = (4 / lambda) (k_w mu E - xi'/xi) / (1 + Upsilon) vex(Pa(M^B R_tilde))
 *
 * with (E, mu) evaluated at ||M^B R_tilde||_I and lambda the smallest
 * eigenvalue of Tr{M^B} I - M^B (recomputed from the measurements each step).
 * The step is integrated as in semi_direct_step with v_i^B held.
 *
 * Errors: SingularMB, SingularityNear180 (1 + Upsilon <= eps_sing, strict),
 * EnvelopeViolation (strict).
 */
PpfStepResult direct_step(const PpfFilterState& s, const MeasurementFrame& frame,
                          const PpfParams& p, const PpfFilterGains& g, double t, double dt,
                          const GuardOptions& guard = {});

/// Passive complementary filter with a single constant gain k1:
/// b_hat' = k1 vex(Pa(R_tilde)), W = k1 vex(Pa(R_tilde)), R_tilde = R_y^T R_hat,
/// integrated like the filters above. Diagnostics carry err_metric and W
/// only; E and mu are NaN and the envelope fields are left for the caller.
PpfStepResult passive_step(const PpfFilterState& s, const MeasurementFrame& frame, double k1,
                           double dt, const GuardOptions& guard = {});

// --- multiplicative EKF baseline ---------------------------------------------

using Quat = Eigen::Vector4d;  ///< [q0, q1, q2, q3], scalar first, Hamilton product

Quat quat_multiply(const Quat& a, const Quat& b);
Quat quat_conjugate(const Quat& q);
/// Rotation R(q) with q (0, v) q^-1 = (0, R v).
Mat3 quat_to_matrix(const Quat& q);
/// Unit quaternion with non-negative scalar part.
Quat quat_from_rotation(const RotationMatrix& R);
/// Psi(x) = [[0, -x^T], [x, -[x]x]]; q' = 1/2 Psi(omega) q is body-rate kinematics.
Eigen::Matrix4d quat_psi(const Vec3& x);

struct MekfNoise {
  std::vector<Mat3> q_v;  ///< per observation; a single entry applies to all
  Mat3 q_omega = Mat3::Identity();
  Mat3 q_b = Mat3::Identity();
};

/// Cases 1-3 of the reference comparison: (Qv, Qw, Qb) = (I, I, I),
/// (0.1 I, 10 I, 10 I), (0.01 I, 100 I, 100 I). Throws InvalidParams otherwise.
MekfNoise mekf_case(int which);

struct MekfState {
  Quat q_hat = Quat(1.0, 0.0, 0.0, 0.0);
  Vec3 b_hat = Vec3::Zero();
  Mat3 P_a = Mat3::Identity();  ///< attitude block
  Mat3 P_b = Mat3::Identity();  ///< bias block
  Mat3 P_c = Mat3::Zero();      ///< cross block
  MekfNoise noise;

  RotationMatrix attitude() const;
};

MekfState make_mekf_state(const RotationMatrix& R0, const Vec3& b0, MekfNoise noise,
                          double p_a0 = 1.0, double p_b0 = 1.0);

/**
 * One explicit Euler step of the continuous MEKF:
 *
 *   q'  = 1/2 Psi(Omega_m - b_hat + P_a W) q
 *   W   = sum v_hat_i x Qv_i^-1 (v_hat_i - v_i),  v_hat_i = q^-1 (0, v_i^I) q
 *   b'  = P_c^T W
 *   P_a' = Qw + 2 Ps(P_a [w]x - P_c) - P_a S P_a
 *   P_b' = Qb - P_c^T S P_c
 *   P_c' = -[w]x P_c - P_a S P_c - P_b
 *   S   = sum [v_hat_i]x^T Qv_i^-1 [v_hat_i]x,  w = Omega_m - b_hat
 *
 * q is renormalized and P_a, P_b re-symmetrized after the step. Throws
 * NonFiniteState when anything becomes non-finite.
 */
MekfState mekf_step(const MekfState& s, const MeasurementFrame& frame, double dt);

/// V = 1/2 E^2 + 1/(2 gamma) |b - b_hat|^2.
double lyapunov(double E, const Vec3& b_tilde, double gamma);

}  // namespace ppfso3
