#include "ppfso3/config.hpp"
#include "ppfso3/errors.hpp"
#include "ppfso3/harness.hpp"

#include <Eigen/Geometry>
#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace ppfso3;

namespace {

constexpr double kPi = std::numbers::pi;

SimConfig short_config(const std::string& filter, double duration = 2.0) {
  SimConfig c = SimConfig::reference_defaults();
  c.duration = duration;
  c.windows = {{std::min(1.0, duration), duration}};
  c.filter = parse_filter(filter);
  return c;
}

ErrorKind config_error(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_config(in).validate();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "accepted: " << text;
  return ErrorKind::Io;
}

RunLog log_of(const std::vector<std::pair<double, double>>& samples) {
  RunLog log;
  for (auto [t, e] : samples) {
    RunRow r;
    r.t = t;
    r.err_I = e;
    r.err_metric = e;
    log.rows.push_back(r);
  }
  return log;
}

}  // namespace

TEST(FilterSelection, ParseAndLabel) {
  EXPECT_EQ(parse_filter("semi-direct").label(), "semi-direct");
  EXPECT_EQ(parse_filter("semi_direct").kind, FilterKind::SemiDirect);
  EXPECT_EQ(parse_filter("direct").label(), "direct");
  EXPECT_EQ(parse_filter("passive:100").label(), "passive(k1=100)");
  EXPECT_EQ(parse_filter("mekf:3").label(), "mekf(case=3)");
  FilterSelection base;
  base.k1 = 7.0;
  EXPECT_DOUBLE_EQ(parse_filter("passive", base).k1, 7.0);
  EXPECT_THROW(parse_filter("kalman"), Error);
  EXPECT_THROW(parse_filter("direct:2"), Error);
  EXPECT_THROW(parse_filter("passive:abc"), Error);
}

TEST(Config, ReferenceDefaults) {
  const SimConfig c = SimConfig::reference_defaults();
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.step_count(), 3000u);
  EXPECT_EQ(c.inertial_refs.size(), 2u);
  EXPECT_EQ(c.weights.size(), 3u);
  EXPECT_NEAR(norm_euclid_dist(c.initial_estimate()), 0.99969541350954788, 1e-15);
  EXPECT_LT((c.omega(1.0) - reference_omega(1.0)).norm(), 1e-15);
}

TEST(Config, ParsesKeyValueText) {
  std::istringstream in(
      "# comment\n"
      "duration = 3\n"
      "dt = 0.01   # trailing\n"
      "filter = passive:10\n"
      "guard = clamp\n"
      "gyro_bias = 0.2, 0, -0.2\n"
      "windows = 0:1, 1:3\n"
      "\n"
      "trajectory = constant\n"
      "omega_const = 0,0,1\n");
  const SimConfig c = parse_config(in);
  EXPECT_DOUBLE_EQ(c.duration, 3.0);
  EXPECT_DOUBLE_EQ(c.dt, 0.01);
  EXPECT_EQ(c.filter.kind, FilterKind::Passive);
  EXPECT_DOUBLE_EQ(c.filter.k1, 10.0);
  EXPECT_EQ(c.guard.mode, GuardMode::Clamp);
  EXPECT_EQ(c.noise.gyro_bias, Vec3(0.2, 0, -0.2));
  ASSERT_EQ(c.windows.size(), 2u);
  EXPECT_DOUBLE_EQ(c.windows[1].t_end, 3.0);
  EXPECT_EQ(c.trajectory, TrajectoryKind::Constant);
  EXPECT_EQ(c.omega(5.0), Vec3(0, 0, 1));
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, Presets) {
  std::istringstream in("preset = steady\n");
  const SimConfig c = parse_config(in);
  ASSERT_EQ(c.windows.size(), 1u);
  EXPECT_DOUBLE_EQ(c.windows[0].t_start, 7.0);
  EXPECT_DOUBLE_EQ(c.windows[0].t_end, 15.0);
}

TEST(Config, RejectsBadInput) {
  EXPECT_EQ(config_error("nonsense = 1\n"), ErrorKind::InvalidConfig);
  EXPECT_EQ(config_error("dt = fast\n"), ErrorKind::InvalidConfig);
  EXPECT_EQ(config_error("no equals sign\n"), ErrorKind::InvalidConfig);
  EXPECT_EQ(config_error("dt = 0.007\n"), ErrorKind::InvalidConfig);
  EXPECT_EQ(config_error("windows = 3:20\n"), ErrorKind::InvalidConfig);
  EXPECT_EQ(config_error("weights = 1,1\n"), ErrorKind::InvalidConfig);
  EXPECT_EQ(config_error("filter = mekf\nmekf_case = 4\n"), ErrorKind::InvalidConfig);
  EXPECT_EQ(config_error("guard = maybe\n"), ErrorKind::InvalidConfig);
  EXPECT_EQ(config_error("gyro_bias = 1,2\n"), ErrorKind::InvalidConfig);
}

TEST(Euler, RoundTrip) {
  std::mt19937_64 gen(61);
  std::normal_distribution<double> n;
  for (int i = 0; i < 1000; ++i) {
    const RotationMatrix R(
        Eigen::Quaterniond(n(gen), n(gen), n(gen), n(gen)).normalized().toRotationMatrix());
    const EulerAngles a = euler_zyx(R);
    ASSERT_FALSE(a.gimbal_lock);
    const RotationMatrix back = from_euler_zyx(a.roll, a.pitch, a.yaw);
    EXPECT_LT((back.matrix() - R.matrix()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Euler, YawSignAndElementaryAxes) {
  const EulerAngles a = euler_zyx(angle_axis(kPi / 2, Vec3::UnitZ()));
  EXPECT_NEAR(a.yaw, -kPi / 2, 1e-15);
  EXPECT_NEAR(a.roll, 0.0, 1e-15);
  EXPECT_NEAR(a.pitch, 0.0, 1e-15);
  EXPECT_NEAR(euler_zyx(exp_so3(Vec3(0.3, 0, 0))).roll, 0.3, 1e-15);
  EXPECT_NEAR(euler_zyx(exp_so3(Vec3(0, 0.3, 0))).pitch, 0.3, 1e-15);
}

TEST(Euler, GimbalLock) {
  const RotationMatrix R = from_euler_zyx(0.4, kPi / 2, 0.1);
  const EulerAngles a = euler_zyx(R);
  EXPECT_TRUE(a.gimbal_lock);
  EXPECT_DOUBLE_EQ(a.roll, 0.0);
  EXPECT_NEAR(a.pitch, kPi / 2, 1e-7);
  EXPECT_LT((from_euler_zyx(a.roll, a.pitch, a.yaw).matrix() - R.matrix()).cwiseAbs().maxCoeff(),
            1e-6);
}

TEST(WindowStats, PopulationStd) {
  const RunLog log = log_of({{0.0, 9.0}, {1.0, 1.0}, {1.5, 2.0}, {2.0, 3.0}, {2.5, 4.0}, {3.0, 9.0}});
  const WindowStats w = window_stats(log, {1.0, 2.5}, true);
  EXPECT_EQ(w.count, 4u);
  EXPECT_DOUBLE_EQ(w.mean, 2.5);
  EXPECT_DOUBLE_EQ(w.std, std::sqrt(1.25));
}

TEST(WindowStats, EmptyWindowUsesNearestSample) {
  const RunLog log = log_of({{0.0, 1.0}, {1.0, 2.0}, {2.0, 3.0}});
  const WindowStats w = window_stats(log, {1.4, 1.6}, true);
  EXPECT_EQ(w.count, 1u);
  EXPECT_DOUBLE_EQ(w.mean, 2.0);
  EXPECT_DOUBLE_EQ(w.std, 0.0);
  const WindowStats point = window_stats(log, {2.0, 2.0}, true);
  EXPECT_DOUBLE_EQ(point.mean, 3.0);
}

TEST(Run, CsvLayout) {
  const RunResult r = run(short_config("semi-direct", 0.05));
  EXPECT_EQ(r.log.rows.size(), 11u);
  std::istringstream csv(run_csv(r.log));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line,
            "t,err_I,err_metric,E,mu,xi,bx_hat,by_hat,bz_hat,phi,theta,psi,phi_hat,theta_hat,"
            "psi_hat,env_ok");
  int rows = 0;
  while (std::getline(csv, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 15);
    ++rows;
  }
  EXPECT_EQ(rows, 11);
}

TEST(Run, DeterministicPerSeed) {
  const SimConfig c = short_config("semi-direct");
  EXPECT_EQ(run_csv(run(c).log), run_csv(run(c).log));
  SimConfig other = c;
  other.seed = c.seed + 1;
  EXPECT_NE(run_csv(run(c).log), run_csv(run(other).log));
}

TEST(Run, ExactInitializationStaysExact) {
  for (const char* f : {"semi-direct", "direct", "passive:10"}) {
    SimConfig c = short_config(f, 3.0);
    c.noise = NoiseModel{};
    c.init_angle_deg = 0.0;
    c.guard.mode = GuardMode::Strict;
    const RunResult r = run(c);
    for (const RunRow& row : r.log.rows) ASSERT_LT(row.err_I, 1e-9) << f << " t=" << row.t;
  }
}

TEST(Run, AllFiltersFinish) {
  for (const char* f : {"semi-direct", "direct", "passive:1", "passive:100", "mekf:1", "mekf:3"}) {
    const RunResult r = run(short_config(f));
    EXPECT_TRUE(std::isfinite(r.stats.final_error)) << f;
    EXPECT_EQ(r.stats.windows.size(), 1u);
  }
}

TEST(Run, ErrorsCarryTimestamp) {
  SimConfig c = short_config("semi-direct");
  c.guard.mode = GuardMode::Strict;
  c.ppf.xi0 = c.ppf.xi_inf = 0.05;  // initial error far outside a flat narrow envelope
  try {
    run(c);
    FAIL() << "expected EnvelopeViolation";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EnvelopeViolation);
    EXPECT_TRUE(e.has_time());
    EXPECT_DOUBLE_EQ(e.t(), 0.0);
  }
}

TEST(Stats, JsonParses) {
  const RunResult r = run(short_config("direct"));
  const auto j = nlohmann::json::parse(stats_json(r.stats));
  EXPECT_EQ(j.at("filter"), "direct");
  EXPECT_EQ(j.at("seed"), 1);
  EXPECT_EQ(j.at("windows").size(), 1u);
  EXPECT_TRUE(j.contains("true_envelope_violations"));
}

TEST(MonteCarlo, IndependentOfThreadCount) {
  const SimConfig c = short_config("semi-direct", 1.5);
  const std::vector<std::uint64_t> seeds{3, 1, 2, 4};
  const MonteCarloSummary one = monte_carlo(c, seeds, 1);
  const MonteCarloSummary four = monte_carlo(c, seeds, 4);
  ASSERT_EQ(one.runs.size(), 4u);
  EXPECT_EQ(one.runs.front().seed, 1u);
  EXPECT_EQ(one.mean_of_means[0].mean, four.mean_of_means[0].mean);
  EXPECT_EQ(one.mean_of_means[0].std, four.mean_of_means[0].std);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(one.runs[i].windows[0].mean, four.runs[i].windows[0].mean);
  }
}

TEST(MeasurementLog, ReplayMatchesSimulation) {
  const SimConfig c = short_config("semi-direct");
  const auto frames = record_measurements(c);
  std::stringstream io;
  write_measurement_log(io, frames, c.inertial_refs.size());
  const auto replay = read_measurement_log(io, c);
  ASSERT_EQ(replay.size(), frames.size());
  const RunResult sim = run(c);
  const RunResult rep = run_frames(c, replay);
  EXPECT_FALSE(rep.log.has_truth);
  ASSERT_EQ(rep.log.rows.size(), sim.log.rows.size());
  for (std::size_t i = 0; i < sim.log.rows.size(); i += 50) {
    EXPECT_NEAR(rep.log.rows[i].err_metric, sim.log.rows[i].err_metric, 1e-9);
    EXPECT_TRUE(std::isnan(rep.log.rows[i].err_I));
  }
}

TEST(MeasurementLog, RejectsBadHeader) {
  std::istringstream in("time,a,b\n0,1,2\n");
  EXPECT_THROW(read_measurement_log(in, SimConfig::reference_defaults()), Error);
}

TEST(Report, Csv) {
  std::vector<SimConfig> cs{short_config("semi-direct", 1.5), short_config("passive:1", 1.5)};
  const auto rows = compare_report(cs);
  ASSERT_EQ(rows.size(), 2u);
  std::ostringstream os;
  write_report_csv(os, rows);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')),
            "filter,seed,t_start,t_end,mean,std,envelope_violations,true_envelope_violations");
  EXPECT_EQ(rows[1].filter, "passive(k1=1)");
}
