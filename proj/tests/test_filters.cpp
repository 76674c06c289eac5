#include "ppfso3/errors.hpp"
#include "ppfso3/filters.hpp"
#include "ppfso3/reconstruct.hpp"

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace ppfso3;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDt = 5e-3;

const Vec3 kBias(0.1, -0.1, 0.1);

MeasurementFrame noise_free_frame(const Mat3& R, const Vec3& omega, double t) {
  const Vec3 v1 = Vec3(1, -1, 1).normalized();
  const std::vector<RawVectorPair> raw{{v1, R.transpose() * v1},
                                       {Vec3::UnitZ(), R.transpose() * Vec3::UnitZ()}};
  const std::vector<double> w{1.4, 1.4, 0.2};
  return build_frame(raw, w, omega + kBias, t);
}

Mat3 eigen_exp(const Vec3& w) {
  if (w.norm() == 0.0) return Mat3::Identity();
  return Eigen::AngleAxisd(w.norm(), w.normalized()).toRotationMatrix();
}

double max_abs(const Mat3& m) { return m.cwiseAbs().maxCoeff(); }

PpfFilterState state_at(const Mat3& R_hat, const Vec3& b_hat) {
  PpfFilterState s;
  s.R_hat = RotationMatrix(R_hat);
  s.b_hat = b_hat;
  return s;
}

}  // namespace

TEST(SemiDirect, EquilibriumIsFixedPoint) {
  const Mat3 R = exp_so3(Vec3(0.3, -0.2, 0.5)).matrix();
  const Vec3 omega(0.4, 0.1, -0.3);
  const auto out = semi_direct_step(state_at(R, kBias), noise_free_frame(R, omega, 2.0), PpfParams{},
                                    PpfFilterGains{}, 2.0, kDt);
  EXPECT_NEAR(out.diag.err_metric, 0.0, 1e-14);
  EXPECT_NEAR(out.diag.E, 0.0, 1e-13);
  EXPECT_LT(out.diag.W.norm(), 1e-12);
  EXPECT_LT((out.state.b_hat - kBias).norm(), 1e-12);
  EXPECT_LT(max_abs(out.state.R_hat.matrix() - R * eigen_exp(omega * kDt)), 1e-12);
}

TEST(Direct, EquilibriumIsFixedPoint) {
  const Mat3 R = exp_so3(Vec3(-0.7, 0.2, 0.1)).matrix();
  const Vec3 omega(0.2, -0.5, 0.3);
  const auto out = direct_step(state_at(R, kBias), noise_free_frame(R, omega, 1.0), PpfParams{},
                               PpfFilterGains{}, 1.0, kDt);
  EXPECT_NEAR(out.diag.err_metric, 0.0, 1e-14);
  EXPECT_LT(out.diag.W.norm(), 1e-12);
  EXPECT_LT(max_abs(out.state.R_hat.matrix() - R * eigen_exp(omega * kDt)), 1e-12);
}

TEST(MeasurementSpace, MatchesMatrixForms) {
  std::mt19937_64 gen(41);
  std::normal_distribution<double> n;
  for (int i = 0; i < 200; ++i) {
    const Mat3 R = Eigen::Quaterniond(n(gen), n(gen), n(gen), n(gen)).normalized().toRotationMatrix();
    const Mat3 R_hat =
        Eigen::Quaterniond(n(gen), n(gen), n(gen), n(gen)).normalized().toRotationMatrix();
    const MeasurementFrame f = noise_free_frame(R, Vec3::Zero(), 0.0);
    const WeightedMatrices wm = weighted_matrices(f);
    const Mat3 m_inv = wm.m_body.inverse();
    const auto ms = measurement_space_terms(f, RotationMatrix(R_hat), m_inv);
    const Mat3 mr = wm.m_body * R.transpose() * R_hat;
    EXPECT_LT((ms.vex_term - vex(pa(mr))).norm(), 1e-13);
    EXPECT_NEAR(ms.distance, 0.25 * (wm.m_body - mr).trace(), 1e-13);
    EXPECT_NEAR(ms.upsilon, (m_inv * mr).trace(), 1e-12);
  }
}

TEST(MeasurementSpace, UpsilonAtEquilibrium) {
  const Mat3 R = exp_so3(Vec3(1.0, 2.0, -0.5)).matrix();
  const MeasurementFrame f = noise_free_frame(R, Vec3::Zero(), 0.0);
  const auto ms = measurement_space_terms(f, RotationMatrix(R), weighted_matrices(f).m_body.inverse());
  EXPECT_NEAR(ms.upsilon, 3.0, 1e-12);
  EXPECT_NEAR(ms.distance, 0.0, 1e-15);
  EXPECT_LT(ms.vex_term.norm(), 1e-15);
}

TEST(SemiDirect, StrictModeThrowsOutsideEnvelope) {
  const Mat3 R = Mat3::Identity();
  const Mat3 R_hat = angle_axis(kPi / 2, Vec3::UnitZ()).matrix();
  const double t = 5.0;  // xi ~ 0.05, e = 0.5
  try {
    semi_direct_step(state_at(R_hat, kBias), noise_free_frame(R, Vec3::Zero(), t), PpfParams{},
                     PpfFilterGains{}, t, kDt);
    FAIL() << "expected EnvelopeViolation";
  } catch (const EnvelopeViolationError& e) {
    EXPECT_NEAR(e.error_value(), 0.5, 1e-12);
    EXPECT_DOUBLE_EQ(e.t(), t);
  }
}

TEST(SemiDirect, GateSkipsCorrection) {
  const Mat3 R = Mat3::Identity();
  const Mat3 R_hat = angle_axis(kPi / 2, Vec3::UnitZ()).matrix();
  const Vec3 omega(0.1, 0.2, 0.3);
  GuardOptions gate;
  gate.mode = GuardMode::Gate;
  const auto out = semi_direct_step(state_at(R_hat, kBias), noise_free_frame(R, omega, 5.0),
                                    PpfParams{}, PpfFilterGains{}, 5.0, kDt, gate);
  EXPECT_TRUE(out.diag.gated);
  EXPECT_FALSE(out.diag.envelope_ok);
  EXPECT_EQ(out.state.gated_count, 1);
  EXPECT_EQ(out.state.b_hat, kBias);
  EXPECT_LT(max_abs(out.state.R_hat.matrix() - R_hat * eigen_exp(omega * kDt)), 1e-12);
}

TEST(SemiDirect, ClampCountsViolation) {
  const Mat3 R = Mat3::Identity();
  const Mat3 R_hat = angle_axis(0.6, Vec3::UnitX()).matrix();
  GuardOptions clamp;
  clamp.mode = GuardMode::Clamp;
  const auto out = semi_direct_step(state_at(R_hat, kBias), noise_free_frame(R, Vec3::Zero(), 5.0),
                                    PpfParams{}, PpfFilterGains{}, 5.0, kDt, clamp);
  EXPECT_TRUE(out.diag.clamped);
  EXPECT_EQ(out.state.violation_count, 1);
  EXPECT_TRUE(out.state.R_hat.matrix().allFinite());
}

TEST(SemiDirect, HalfTurnSingularity) {
  const Mat3 R = Mat3::Identity();
  const Mat3 R_hat = angle_axis(kPi, Vec3::UnitY()).matrix();
  const MeasurementFrame f = noise_free_frame(R, Vec3::Zero(), 0.0);
  try {
    semi_direct_step(state_at(R_hat, kBias), f, PpfParams{}, PpfFilterGains{}, 0.0, kDt);
    FAIL() << "expected SingularityNear180";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularityNear180);
  }
  GuardOptions gate;
  gate.mode = GuardMode::Gate;
  const auto out =
      semi_direct_step(state_at(R_hat, kBias), f, PpfParams{}, PpfFilterGains{}, 0.0, kDt, gate);
  EXPECT_TRUE(out.diag.singular);
  EXPECT_EQ(out.state.singular_count, 1);
  EXPECT_EQ(out.diag.W, Vec3::Zero());
}

TEST(SemiDirect, NoiseFreeErrorAndLyapunovDecrease) {
  const PpfParams p;
  const PpfFilterGains g;
  std::mt19937_64 gen(42);
  std::normal_distribution<double> n;
  for (int i = 0; i < 50; ++i) {
    const double t = 0.5 + 0.1 * i;
    const Mat3 R = exp_so3(Vec3(n(gen), n(gen), n(gen))).matrix();
    // error well inside the envelope at t
    const double angle = 0.5 * std::acos(1.0 - 2.0 * 0.5 * xi(p, t));
    const Mat3 R_hat = R * exp_so3(angle * Vec3(n(gen), n(gen), n(gen)).normalized()).matrix();
    const Vec3 omega(n(gen), n(gen), n(gen));
    const auto out =
        semi_direct_step(state_at(R_hat, kBias), noise_free_frame(R, omega, t), p, g, t, kDt);
    const RotationMatrix R_next(R * eigen_exp(omega * kDt));
    const double e0 = out.diag.err_metric;
    const double e1 = norm_euclid_dist(R_next.transpose() * out.state.R_hat);
    EXPECT_LT(e1, e0);
    const double V0 = lyapunov(transform(p, e0, xi(p, t)).value, Vec3::Zero(), g.gamma);
    const double V1 = lyapunov(transform(p, e1, xi(p, t + kDt)).value,
                               kBias - out.state.b_hat, g.gamma);
    EXPECT_LT(V1, V0);
  }
}

TEST(Passive, SmallAngleStepMatchesDirectEvaluation) {
  const double k1 = 2.0;
  const Mat3 R = exp_so3(Vec3(0.2, 0.4, -0.1)).matrix();
  const Mat3 R_hat = R * exp_so3(Vec3(0.01, -0.02, 0.005)).matrix();
  const Vec3 b_hat(0.05, 0.0, -0.02);
  const Vec3 omega(0.3, -0.2, 0.1);
  const MeasurementFrame f = noise_free_frame(R, omega, 1.0);
  const auto out = passive_step(state_at(R_hat, b_hat), f, k1, kDt);
  ASSERT_EQ(out.diag.substeps, 1);

  // oracle: one Euler step of the continuous equations, rotations via Eigen
  const Mat3 r_tilde = R.transpose() * R_hat;
  const Vec3 va = 0.5 * Vec3(r_tilde(2, 1) - r_tilde(1, 2), r_tilde(0, 2) - r_tilde(2, 0),
                             r_tilde(1, 0) - r_tilde(0, 1));
  const Vec3 W = k1 * va;
  const Vec3 b_next = b_hat + kDt * W;
  const Mat3 R_next = R_hat * eigen_exp(-W * kDt) * eigen_exp((f.omega_m - b_next) * kDt);
  EXPECT_LT((out.diag.W - W).norm(), 1e-10);
  EXPECT_LT((out.state.b_hat - b_next).norm(), 1e-12);
  EXPECT_LT(max_abs(out.state.R_hat.matrix() - R_next), 1e-10);
  EXPECT_TRUE(std::isnan(out.diag.E));
}

TEST(Passive, RejectsNonPositiveGain) {
  const MeasurementFrame f = noise_free_frame(Mat3::Identity(), Vec3::Zero(), 0.0);
  EXPECT_THROW(passive_step(state_at(Mat3::Identity(), Vec3::Zero()), f, 0.0, kDt), Error);
}

TEST(Integrator, SubstepsLargeCorrections) {
  const Mat3 R = Mat3::Identity();
  const Mat3 R_hat = angle_axis(178.0 * kPi / 180.0, Vec3(4, 1, 5).normalized()).matrix();
  const auto out = semi_direct_step(state_at(R_hat, Vec3::Zero()), noise_free_frame(R, Vec3::Zero(), 0.0),
                                    PpfParams{}, PpfFilterGains{}, 0.0, kDt);
  EXPECT_GT(out.diag.substeps, 1);
  EXPECT_LT(out.state.R_hat.orthonormality_error(), 1e-12);
  EXPECT_LT(norm_euclid_dist(out.state.R_hat), out.diag.err_metric);
}

TEST(Gains, Validation) {
  PpfFilterGains g;
  EXPECT_NO_THROW(g.validate());
  g.gamma = 0.0;
  EXPECT_THROW(g.validate(), Error);
}

TEST(Lyapunov, Value) {
  EXPECT_DOUBLE_EQ(lyapunov(2.0, Vec3(1, 2, 2), 0.5), 2.0 + 9.0);
}

TEST(SemiDirect, LeftTranslationEquivariance) {
  std::mt19937_64 gen(43);
  std::normal_distribution<double> n;
  const Mat3 Q = exp_so3(Vec3(0.7, -1.1, 0.4)).matrix();
  const Vec3 omega(0.3, 0.2, -0.1);
  const Vec3 v1 = Vec3(1, -1, 1).normalized();
  const std::vector<double> w{1.4, 1.4, 0.2};
  for (int i = 0; i < 20; ++i) {
    const Mat3 R = exp_so3(Vec3(n(gen), n(gen), n(gen))).matrix();
    const Mat3 R_hat = R * exp_so3(0.3 * Vec3(n(gen), n(gen), n(gen)).normalized()).matrix();
    auto step = [&](const Mat3& T) {
      const std::vector<RawVectorPair> raw{{T * v1, (T * R).transpose() * (T * v1)},
                                           {T * Vec3::UnitZ(), (T * R).transpose() * (T * Vec3::UnitZ())}};
      const MeasurementFrame f = build_frame(raw, w, omega + kBias, 0.5);
      return semi_direct_step(state_at(T * R_hat, kBias), f, PpfParams{}, PpfFilterGains{}, 0.5, kDt);
    };
    const auto a = step(Mat3::Identity());
    const auto b = step(Q);
    EXPECT_LT(max_abs(Q * a.state.R_hat.matrix() - b.state.R_hat.matrix()), 1e-12);
    EXPECT_LT((a.state.b_hat - b.state.b_hat).norm(), 1e-12);
    EXPECT_NEAR(a.diag.err_metric, b.diag.err_metric, 1e-13);
  }
}
