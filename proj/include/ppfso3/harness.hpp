#pragma once

#include "ppfso3/filters.hpp"
#include "ppfso3/ppf.hpp"
#include "ppfso3/sensors.hpp"
#include "ppfso3/so3.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ppfso3 {

enum class FilterKind { SemiDirect, Direct, Passive, Mekf };

struct FilterSelection {
  FilterKind kind = FilterKind::SemiDirect;
  double k1 = 1.0;    ///< passive gain
  int mekf_case = 1;  ///< 1, 2 or 3

  /// "semi-direct", "direct", "passive(k1=10)", "mekf(case=3)".
  std::string label() const;
};

/// Accepts "semi-direct", "direct", "passive", "passive:<k1>", "mekf",
/// "mekf:<case>". Bare "passive"/"mekf" keep the k1/case already in `base`.
FilterSelection parse_filter(const std::string& text, FilterSelection base = {});

enum class TrajectoryKind { Reference, Constant };

struct StatsWindow {
  double t_start = 0.0;
  double t_end = 0.0;
};

struct SimConfig {
  double duration = 15.0;
  double dt = 5e-3;
  std::uint64_t seed = 1;

  NoiseModel noise;  ///< rng_seed is ignored; `seed` above is used
  std::vector<Vec3> inertial_refs;
  std::vector<double> weights;

  FilterSelection filter;
  PpfFilterGains gains;
  PpfParams ppf;
  GuardOptions guard{GuardMode::Gate};

  double init_angle_deg = 178.0;  ///< R_hat(0) = angle_axis(angle, axis / |axis|)
  Vec3 init_axis{4.0, 1.0, 5.0};
  Vec3 init_bias = Vec3::Zero();

  double truth_angle_deg = 0.0;  ///< R(0) = angle_axis(angle, axis / |axis|)
  Vec3 truth_axis{0.0, 0.0, 1.0};
  TrajectoryKind trajectory = TrajectoryKind::Reference;
  Vec3 omega_const = Vec3::Zero();

  double mekf_p_a0 = 1.0;
  double mekf_p_b0 = 1.0;

  std::vector<StatsWindow> windows{{1.0, 15.0}};

  /// Throws InvalidConfig.
  void validate() const;

  /// Reference configuration: 15 s at 200 Hz, gyro bias 0.1[1,-1,1] with
  /// noise STD 0.2, vectors (1/sqrt3)[1,-1,1] and [0,0,1] with biases
  /// 0.1[-1,1,0.5] and 0.1[0,0,1] and noise STD 0.08, weights (1.4, 1.4, 0.2),
  /// gamma = 1, k_w = 3, delta = xi0 = 1.2, xi_inf = 0.05, ell = 3.
  static SimConfig reference_defaults();

  Vec3 omega(double t) const;
  RotationMatrix initial_truth() const;
  RotationMatrix initial_estimate() const;
  std::size_t step_count() const;  ///< N with duration = N dt
};

struct EulerAngles {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
  bool gimbal_lock = false;
};

/**
 * Z-Y-X (yaw, pitch, roll) decomposition R = Rz(yaw) Ry(pitch) Rx(roll).
 * A positive yaw rotates x toward y, so angle_axis(pi/2, z), which equals
 * exp_so3(-pi/2 z), has yaw = -pi/2. Within 1e-6 rad of pitch = +-pi/2 the
 * split is ambiguous: gimbal_lock is set, roll = 0 and the whole rotation
 * about z goes into yaw.
 */
EulerAngles euler_zyx(const RotationMatrix& R);
RotationMatrix from_euler_zyx(double roll, double pitch, double yaw);

struct RunRow {
  double t = 0.0;
  double err_I = 0.0;       ///< ||R^T R_hat||_I against ground truth
  double err_metric = 0.0;  ///< the filter's own error measure
  double E = 0.0;
  double mu = 0.0;
  double xi = 0.0;
  Vec3 b_hat = Vec3::Zero();
  EulerAngles truth;
  EulerAngles estimate;
  bool env_ok = true;  ///< err_metric < xi(t)
};

struct RunLog {
  std::vector<RunRow> rows;
  bool has_truth = true;
};

struct WindowStats {
  StatsWindow window;
  double mean = 0.0;
  double std = 0.0;  ///< population STD (divide by N)
  std::size_t count = 0;
};

struct RunStats {
  std::string filter;
  std::uint64_t seed = 0;
  std::vector<WindowStats> windows;
  long envelope_violations = 0;       ///< rows with err_metric >= xi(t)
  long true_envelope_violations = 0;  ///< rows with err_I >= xi(t)
  double first_violation_t = -1.0;    ///< time of the first err_metric violation, -1 if none
  double first_true_violation_t = -1.0;
  long transform_clamps = 0;
  long gated_steps = 0;
  long singular_steps = 0;
  double final_error = 0.0;
};

struct RunResult {
  RunLog log;
  RunStats stats;
};

/// Simulate the configured trajectory, sensors and filter. Deterministic in
/// (config, seed). Errors from the filter are re-raised with the timestamp.
RunResult run(const SimConfig& config);

/// Drive the configured filter with recorded frames (no ground truth:
/// err_I and the true Euler angles are NaN and statistics use err_metric).
RunResult run_frames(const SimConfig& config, const std::vector<MeasurementFrame>& frames);

/// Mean and population STD of `values` restricted to rows with t inside the
/// window (inclusive, 1e-9 slack). A window containing no sample, including
/// t_start == t_end, falls back to the single sample nearest to t_start.
WindowStats window_stats(const RunLog& log, const StatsWindow& w, bool use_truth);

RunStats compute_stats(const RunLog& log, const SimConfig& config);

/// Fixed-column CSV with 17 significant digits per float.
void write_run_csv(std::ostream& os, const RunLog& log);
std::string run_csv(const RunLog& log);
std::string stats_json(const RunStats& stats);

struct ReportRow {
  std::string filter;
  std::uint64_t seed = 0;
  StatsWindow window;
  double mean = 0.0;
  double std = 0.0;
  long envelope_violations = 0;
  long true_envelope_violations = 0;
};

/// One row per (config, window).
std::vector<ReportRow> compare_report(const std::vector<SimConfig>& configs);
void write_report_csv(std::ostream& os, const std::vector<ReportRow>& rows);

struct MonteCarloSummary {
  std::vector<RunStats> runs;  ///< sorted by seed
  std::vector<WindowStats> mean_of_means;  ///< per window: mean and STD across runs
};

/// Runs `config` once per seed on up to `threads` worker threads. The
/// reduction happens after sorting by seed, so thread count does not change
/// the result.
MonteCarloSummary monte_carlo(const SimConfig& config, const std::vector<std::uint64_t>& seeds,
                              unsigned threads);

}  // namespace ppfso3
