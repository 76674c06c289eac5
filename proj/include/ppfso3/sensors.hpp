#pragma once

#include "ppfso3/rng.hpp"
#include "ppfso3/so3.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace ppfso3 {

/// Ground-truth sample: attitude R (body to inertial) and body rate Omega.
struct TrajectoryState {
  double t = 0.0;
  RotationMatrix R;
  Vec3 omega = Vec3::Zero();
};

/// One normalized vector pair and its confidence weight.
struct VectorObservation {
  Vec3 v_inertial_ref;
  Vec3 v_body_meas;
  double weight = 1.0;
};

/// Everything a filter sees at one instant.
struct MeasurementFrame {
  double t = 0.0;
  Vec3 omega_m = Vec3::Zero();
  std::vector<VectorObservation> observations;
};

/// A raw (not yet normalized) inertial reference / body measurement pair.
struct RawVectorPair {
  Vec3 inertial;
  Vec3 body;
};

struct NoiseModel {
  Vec3 gyro_bias = Vec3::Zero();
  double gyro_noise_std = 0.0;
  std::vector<Vec3> vector_bias;  ///< one per measured vector; missing entries mean zero
  double vector_noise_std = 0.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

using OmegaFn = std::function<Vec3(double)>;

/// Body rate used in the reference simulation:
/// [sin(0.7t), 0.7 sin(0.5t + pi), 0.5 sin(0.3t + pi/3)] rad/s.
Vec3 reference_omega(double t);

/// R_{k+1} = R_k exp([Omega(t_k) dt]x), t_{k+1} = t_k + dt. Throws
/// InvalidParams for dt <= 0.
TrajectoryState propagate_truth(const TrajectoryState& state, const OmegaFn& omega_fn, double dt);

/// Omega + b + w with w ~ N(0, gyro_noise_std^2 I).
Vec3 measure_gyro(const Vec3& omega, const NoiseModel& nm, SplitMix64& rng);

/// R^T v_I + bias + w with w ~ N(0, vector_noise_std^2 I); not normalized.
Vec3 measure_vector(const RotationMatrix& R, const Vec3& v_inertial, const Vec3& bias,
                    const NoiseModel& nm, SplitMix64& rng);

/// Minimum angle (rad) between two directions for them to count as
/// non-collinear.
inline constexpr double kCollinearAngle = 1e-3;

/**
 * Normalizes every pair, appends v3 = v1 x v2 (in both frames, normalized)
 * when exactly two pairs are given, and rescales the weights to sum to 3.
 * `weights` must have one entry per observation after completion (so three
 * entries for two raw pairs).
 *
 * Throws ZeroNormVector, CollinearVectors or InvalidParams.
 */
MeasurementFrame build_frame(std::span<const RawVectorPair> raw_pairs,
                             std::span<const double> weights, const Vec3& omega_m, double t = 0.0);

struct WeightedMatrices {
  Mat3 m_body;      ///< M^B = sum s_i v_i^B v_i^B^T
  Mat3 m_inertial;  ///< M^I = sum s_i v_i^I v_i^I^T
  double lambda_min = 0.0;  ///< smallest eigenvalue of Tr{M^B} I - M^B
};

/// Throws SingularMB when the smallest eigenvalue of M^B is below 1e-9.
WeightedMatrices weighted_matrices(const MeasurementFrame& frame);

/// Holds the trajectory, noise model and RNG of one simulated run. Each call
/// to `sample` draws gyro noise (x, y, z) and then, per measured vector in
/// order, its noise (x, y, z), so a seed fixes the whole stream.
class SensorSimulator {
 public:
  SensorSimulator(NoiseModel noise, std::vector<Vec3> inertial_refs, std::vector<double> weights);

  MeasurementFrame sample(const TrajectoryState& truth);

  const std::vector<Vec3>& inertial_refs() const noexcept { return refs_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

 private:
  NoiseModel noise_;
  std::vector<Vec3> refs_;
  std::vector<double> weights_;
  SplitMix64 rng_;
};

}  // namespace ppfso3
