#include "ppfso3/sensors.hpp"

#include "ppfso3/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace ppfso3 {

void NoiseModel::validate() const {
  if (!(gyro_noise_std >= 0.0) || !(vector_noise_std >= 0.0)) {
    throw Error(ErrorKind::InvalidParams, "noise standard deviations must be >= 0");
  }
}

Vec3 reference_omega(double t) {
  using std::numbers::pi;
  return {std::sin(0.7 * t), 0.7 * std::sin(0.5 * t + pi), 0.5 * std::sin(0.3 * t + pi / 3.0)};
}

TrajectoryState propagate_truth(const TrajectoryState& state, const OmegaFn& omega_fn, double dt) {
  if (!(dt > 0.0)) {
    throw Error(ErrorKind::InvalidParams, "propagate_truth requires dt > 0");
  }
  const Vec3 omega = omega_fn(state.t);
  TrajectoryState next;
  next.t = state.t + dt;
  next.R = state.R * exp_so3(omega * dt);
  next.omega = omega_fn(next.t);
  return next;
}

namespace {

Vec3 gaussian3(SplitMix64& rng, double std_dev) {
  const double x = rng.gaussian();
  const double y = rng.gaussian();
  const double z = rng.gaussian();
  return std_dev * Vec3(x, y, z);
}

Vec3 normalized_or_throw(const Vec3& v, const char* what) {
  const double n = v.norm();
  if (!(n > 1e-12) || !std::isfinite(n)) {
    throw Error(ErrorKind::ZeroNormVector, std::string(what) + " has zero (or non-finite) norm");
  }
  return v / n;
}

bool collinear(const Vec3& a, const Vec3& b) {
  // a, b unit: |a x b| = sin(angle).
  return a.cross(b).norm() <= std::sin(kCollinearAngle);
}

}  // namespace

Vec3 measure_gyro(const Vec3& omega, const NoiseModel& nm, SplitMix64& rng) {
  return omega + nm.gyro_bias + gaussian3(rng, nm.gyro_noise_std);
}

Vec3 measure_vector(const RotationMatrix& R, const Vec3& v_inertial, const Vec3& bias,
                    const NoiseModel& nm, SplitMix64& rng) {
  return R.matrix().transpose() * v_inertial + bias + gaussian3(rng, nm.vector_noise_std);
}

MeasurementFrame build_frame(std::span<const RawVectorPair> raw_pairs,
                             std::span<const double> weights, const Vec3& omega_m, double t) {
  const std::size_t n = raw_pairs.size();
  if (n < 2) {
    throw Error(ErrorKind::InvalidParams, "at least two vector pairs are required");
  }
  const std::size_t total = n == 2 ? 3 : n;
  if (weights.size() != total) {
    std::ostringstream os;
    os << "expected " << total << " weights, got " << weights.size();
    throw Error(ErrorKind::InvalidParams, os.str());
  }
  for (double w : weights) {
    if (!(w > 0.0)) {
      throw Error(ErrorKind::InvalidParams, "weights must be > 0");
    }
  }

  MeasurementFrame frame;
  frame.t = t;
  frame.omega_m = omega_m;
  frame.observations.reserve(total);
  for (const RawVectorPair& p : raw_pairs) {
    frame.observations.push_back({normalized_or_throw(p.inertial, "inertial reference"),
                                  normalized_or_throw(p.body, "body measurement"), 0.0});
  }

  bool any_independent = false;
  for (std::size_t i = 0; i < n && !any_independent; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!collinear(frame.observations[i].v_inertial_ref, frame.observations[j].v_inertial_ref)) {
        any_independent = true;
        break;
      }
    }
  }
  if (!any_independent) {
    throw Error(ErrorKind::CollinearVectors, "inertial reference vectors are collinear");
  }

  if (n == 2) {
    const VectorObservation& a = frame.observations[0];
    const VectorObservation& b = frame.observations[1];
    if (collinear(a.v_body_meas, b.v_body_meas)) {
      throw Error(ErrorKind::CollinearVectors, "body measurements are collinear");
    }
    frame.observations.push_back(
        {normalized_or_throw(a.v_inertial_ref.cross(b.v_inertial_ref), "inertial cross product"),
         normalized_or_throw(a.v_body_meas.cross(b.v_body_meas), "body cross product"), 0.0});
  }

  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (std::size_t i = 0; i < total; ++i) {
    frame.observations[i].weight = 3.0 * weights[i] / sum;
  }
  return frame;
}

WeightedMatrices weighted_matrices(const MeasurementFrame& frame) {
  WeightedMatrices out;
  out.m_body.setZero();
  out.m_inertial.setZero();
  for (const VectorObservation& o : frame.observations) {
    out.m_body += o.weight * o.v_body_meas * o.v_body_meas.transpose();
    out.m_inertial += o.weight * o.v_inertial_ref * o.v_inertial_ref.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(out.m_body, Eigen::EigenvaluesOnly);
  const Vec3 ev = eig.eigenvalues();  // ascending
  if (!(ev(0) >= 1e-9)) {
    std::ostringstream os;
    os << "M^B is singular (smallest eigenvalue " << ev(0) << ")";
    throw Error(ErrorKind::SingularMB, os.str(), frame.t);
  }
  // Eigenvalues of Tr{M} I - M are the pairwise sums of those of M; the
  // smallest is lambda_1 + lambda_2.
  out.lambda_min = ev(0) + ev(1);
  return out;
}

SensorSimulator::SensorSimulator(NoiseModel noise, std::vector<Vec3> inertial_refs,
                                 std::vector<double> weights)
    : noise_(std::move(noise)),
      refs_(std::move(inertial_refs)),
      weights_(std::move(weights)),
      rng_(noise_.rng_seed) {
  noise_.validate();
  if (refs_.size() < 2) {
    throw Error(ErrorKind::InvalidParams, "at least two inertial reference vectors are required");
  }
}

MeasurementFrame SensorSimulator::sample(const TrajectoryState& truth) {
  const Vec3 omega_m = measure_gyro(truth.omega, noise_, rng_);
  std::vector<RawVectorPair> pairs;
  pairs.reserve(refs_.size());
  for (std::size_t i = 0; i < refs_.size(); ++i) {
    const Vec3 ref = refs_[i].normalized();
    const Vec3 bias = i < noise_.vector_bias.size() ? noise_.vector_bias[i] : Vec3::Zero();
    pairs.push_back({ref, measure_vector(truth.R, ref, bias, noise_, rng_)});
  }
  MeasurementFrame frame = build_frame(pairs, weights_, omega_m, truth.t);
  return frame;
}

}  // namespace ppfso3
