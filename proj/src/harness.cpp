#include "ppfso3/harness.hpp"

#include "ppfso3/errors.hpp"
#include "ppfso3/reconstruct.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

namespace ppfso3 {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorKind::InvalidConfig, "invalid configuration: " + what);
}

}  // namespace

// --- filter selection ---------------------------------------------------------

std::string FilterSelection::label() const {
  std::ostringstream os;
  switch (kind) {
    case FilterKind::SemiDirect: return "semi-direct";
    case FilterKind::Direct: return "direct";
    case FilterKind::Passive: os << "passive(k1=" << k1 << ")"; return os.str();
    case FilterKind::Mekf: os << "mekf(case=" << mekf_case << ")"; return os.str();
  }
  return "unknown";
}

FilterSelection parse_filter(const std::string& text, FilterSelection base) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? std::string() : text.substr(colon + 1);
  FilterSelection f = base;
  try {
    if (name == "semi-direct" || name == "semi_direct") {
      f.kind = FilterKind::SemiDirect;
    } else if (name == "direct") {
      f.kind = FilterKind::Direct;
    } else if (name == "passive") {
      f.kind = FilterKind::Passive;
      if (!arg.empty()) f.k1 = std::stod(arg);
    } else if (name == "mekf") {
      f.kind = FilterKind::Mekf;
      if (!arg.empty()) f.mekf_case = std::stoi(arg);
    } else {
      config_error("unknown filter '" + text + "'");
    }
  } catch (const std::logic_error&) {
    config_error("bad filter argument in '" + text + "'");
  }
  if ((f.kind == FilterKind::SemiDirect || f.kind == FilterKind::Direct) && !arg.empty()) {
    config_error("filter '" + name + "' takes no argument");
  }
  return f;
}

// --- configuration ------------------------------------------------------------

SimConfig SimConfig::reference_defaults() {
  SimConfig c;
  c.noise.gyro_bias = 0.1 * Vec3(1.0, -1.0, 1.0);
  c.noise.gyro_noise_std = 0.2;
  c.noise.vector_bias = {0.1 * Vec3(-1.0, 1.0, 0.5), 0.1 * Vec3(0.0, 0.0, 1.0)};
  c.noise.vector_noise_std = 0.08;
  c.inertial_refs = {Vec3(1.0, -1.0, 1.0) / std::sqrt(3.0), Vec3(0.0, 0.0, 1.0)};
  c.weights = {1.4, 1.4, 0.2};
  return c;
}

void SimConfig::validate() const {
  if (!(dt > 0.0) || !(dt < duration)) config_error("need 0 < dt < duration");
  const double n = duration / dt;
  if (std::abs(n - std::round(n)) > 1e-6 * std::max(1.0, n)) {
    config_error("duration must be an integer multiple of dt");
  }
  for (const StatsWindow& w : windows) {
    if (!(w.t_start >= 0.0) || !(w.t_end >= w.t_start) || !(w.t_end <= duration + 1e-9)) {
      config_error("statistics windows must satisfy 0 <= t_start <= t_end <= duration");
    }
  }
  if (inertial_refs.size() < 2) config_error("at least two inertial reference vectors");
  const std::size_t expected = inertial_refs.size() == 2 ? 3 : inertial_refs.size();
  if (weights.size() != expected) config_error("weights must have one entry per vector");
  if (init_axis.norm() == 0.0 || truth_axis.norm() == 0.0) config_error("zero rotation axis");
  if (filter.kind == FilterKind::Passive && !(filter.k1 > 0.0)) config_error("k1 must be > 0");
  if (filter.kind == FilterKind::Mekf && (filter.mekf_case < 1 || filter.mekf_case > 3)) {
    config_error("mekf case must be 1, 2 or 3");
  }
  if (!(guard.eps_sing > 0.0)) config_error("eps_sing must be > 0");
  try {
    ppf.validate();
    gains.validate();
    noise.validate();
  } catch (const Error& e) {
    config_error(e.what());
  }
}

Vec3 SimConfig::omega(double t) const {
  return trajectory == TrajectoryKind::Reference ? reference_omega(t) : omega_const;
}

RotationMatrix SimConfig::initial_truth() const {
  return angle_axis(deg2rad(truth_angle_deg), truth_axis.normalized());
}

RotationMatrix SimConfig::initial_estimate() const {
  return angle_axis(deg2rad(init_angle_deg), init_axis.normalized());
}

std::size_t SimConfig::step_count() const {
  return static_cast<std::size_t>(std::llround(duration / dt));
}

// --- Euler angles -------------------------------------------------------------

EulerAngles euler_zyx(const RotationMatrix& R) {
  const Mat3& m = R.matrix();
  EulerAngles out;
  const double cos_pitch = std::hypot(m(0, 0), m(1, 0));
  out.pitch = std::atan2(-m(2, 0), cos_pitch);
  if (cos_pitch < std::sin(1e-6)) {
    out.gimbal_lock = true;
    out.roll = 0.0;
    out.yaw = std::atan2(-m(0, 1), m(1, 1));
    return out;
  }
  out.roll = std::atan2(m(2, 1), m(2, 2));
  out.yaw = std::atan2(m(1, 0), m(0, 0));
  return out;
}

RotationMatrix from_euler_zyx(double roll, double pitch, double yaw) {
  return exp_so3(Vec3(0.0, 0.0, yaw)) * exp_so3(Vec3(0.0, pitch, 0.0)) *
         exp_so3(Vec3(roll, 0.0, 0.0));
}

// --- simulation ---------------------------------------------------------------

namespace {

double measured_distance(const MeasurementFrame& frame, const RotationMatrix& R_hat) {
  double d = 0.0;
  for (const VectorObservation& o : frame.observations) {
    d += 0.25 * o.weight * (1.0 - (R_hat.matrix().transpose() * o.v_inertial_ref).dot(o.v_body_meas));
  }
  return d;
}

// Owns the state of whichever filter is configured.
class FilterDriver {
 public:
  explicit FilterDriver(const SimConfig& c) : c_(c) {
    ppf_.R_hat = c.initial_estimate();
    ppf_.b_hat = c.init_bias;
    if (c.filter.kind == FilterKind::Mekf) {
      mekf_ = make_mekf_state(ppf_.R_hat, c.init_bias, mekf_case(c.filter.mekf_case), c.mekf_p_a0,
                              c.mekf_p_b0);
    }
  }

  RotationMatrix estimate() const {
    return c_.filter.kind == FilterKind::Mekf ? mekf_.attitude() : ppf_.R_hat;
  }
  Vec3 bias() const { return c_.filter.kind == FilterKind::Mekf ? mekf_.b_hat : ppf_.b_hat; }
  const PpfFilterState& ppf_state() const { return ppf_; }

  /// Diagnostics for the current state; then advances one dt.
  StepDiagnostics step(const MeasurementFrame& frame, double t) {
    switch (c_.filter.kind) {
      case FilterKind::SemiDirect: return take(semi_direct_step(ppf_, frame, c_.ppf, c_.gains, t, c_.dt, c_.guard));
      case FilterKind::Direct: return take(direct_step(ppf_, frame, c_.ppf, c_.gains, t, c_.dt, c_.guard));
      case FilterKind::Passive: {
        StepDiagnostics d = take(passive_step(ppf_, frame, c_.filter.k1, c_.dt, c_.guard));
        fill_envelope(d, t);
        return d;
      }
      case FilterKind::Mekf: {
        StepDiagnostics d;
        d.err_metric = measured_distance(frame, mekf_.attitude());
        d.E = kNaN;
        d.mu = kNaN;
        fill_envelope(d, t);
        mekf_ = mekf_step(mekf_, frame, c_.dt);
        return d;
      }
    }
    return {};
  }

 private:
  StepDiagnostics take(PpfStepResult r) {
    ppf_ = std::move(r.state);
    return r.diag;
  }

  void fill_envelope(StepDiagnostics& d, double t) const {
    d.xi_t = xi(c_.ppf, t);
    d.envelope_ok = d.err_metric < d.xi_t;
  }

  const SimConfig& c_;
  PpfFilterState ppf_;
  MekfState mekf_;
};

RunRow make_row(double t, const StepDiagnostics& d, const RotationMatrix& est, const Vec3& b_hat) {
  RunRow row;
  row.t = t;
  row.err_metric = d.err_metric;
  row.E = d.E;
  row.mu = d.mu;
  row.xi = d.xi_t;
  row.b_hat = b_hat;
  row.estimate = euler_zyx(est);
  row.env_ok = d.envelope_ok;
  return row;
}

template <typename Fn>
auto with_timestamp(double t, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.has_time()) throw;
    throw Error(e.kind(), e.what(), t);
  }
}

}  // namespace

RunResult run(const SimConfig& config) {
  config.validate();
  NoiseModel noise = config.noise;
  noise.rng_seed = config.seed;
  SensorSimulator sensors(noise, config.inertial_refs, config.weights);
  FilterDriver driver(config);
  const OmegaFn omega_fn = [&config](double t) { return config.omega(t); };

  const std::size_t n = config.step_count();
  RunResult out;
  out.log.rows.reserve(n + 1);
  RotationMatrix R = config.initial_truth();
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * config.dt;
    const TrajectoryState truth{t, R, config.omega(t)};
    const RotationMatrix est = driver.estimate();
    const Vec3 b_hat = driver.bias();
    const StepDiagnostics d = with_timestamp(t, [&] {
      const MeasurementFrame frame = sensors.sample(truth);
      return driver.step(frame, t);
    });
    RunRow row = make_row(t, d, est, b_hat);
    row.err_I = norm_euclid_dist(R.transpose() * est);
    row.truth = euler_zyx(R);
    out.log.rows.push_back(row);
    if (k < n) {
      R = propagate_truth(truth, omega_fn, config.dt).R;
    }
  }
  out.stats = compute_stats(out.log, config);
  out.stats.transform_clamps = driver.ppf_state().violation_count;
  out.stats.gated_steps = driver.ppf_state().gated_count;
  out.stats.singular_steps = driver.ppf_state().singular_count;
  return out;
}

RunResult run_frames(const SimConfig& config, const std::vector<MeasurementFrame>& frames) {
  if (frames.empty()) {
    throw Error(ErrorKind::InvalidConfig, "measurement log is empty");
  }
  FilterDriver driver(config);
  RunResult out;
  out.log.has_truth = false;
  out.log.rows.reserve(frames.size());
  for (const MeasurementFrame& frame : frames) {
    const RotationMatrix est = driver.estimate();
    const Vec3 b_hat = driver.bias();
    const StepDiagnostics d = with_timestamp(frame.t, [&] { return driver.step(frame, frame.t); });
    RunRow row = make_row(frame.t, d, est, b_hat);
    row.err_I = kNaN;
    row.truth = {kNaN, kNaN, kNaN, false};
    out.log.rows.push_back(row);
  }
  out.stats = compute_stats(out.log, config);
  out.stats.transform_clamps = driver.ppf_state().violation_count;
  out.stats.gated_steps = driver.ppf_state().gated_count;
  out.stats.singular_steps = driver.ppf_state().singular_count;
  return out;
}

// --- statistics ---------------------------------------------------------------

WindowStats window_stats(const RunLog& log, const StatsWindow& w, bool use_truth) {
  WindowStats out;
  out.window = w;
  const auto value = [use_truth](const RunRow& r) { return use_truth ? r.err_I : r.err_metric; };

  std::vector<double> picked;
  for (const RunRow& r : log.rows) {
    if (r.t >= w.t_start - 1e-9 && r.t <= w.t_end + 1e-9) {
      picked.push_back(value(r));
    }
  }
  if (picked.empty() && !log.rows.empty()) {
    const auto nearest = std::min_element(log.rows.begin(), log.rows.end(),
                                          [&](const RunRow& a, const RunRow& b) {
                                            return std::abs(a.t - w.t_start) < std::abs(b.t - w.t_start);
                                          });
    picked.push_back(value(*nearest));
  }
  out.count = picked.size();
  if (picked.empty()) {
    out.mean = kNaN;
    out.std = kNaN;
    return out;
  }
  double sum = 0.0;
  for (double v : picked) sum += v;
  out.mean = sum / static_cast<double>(picked.size());
  double ss = 0.0;
  for (double v : picked) ss += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(ss / static_cast<double>(picked.size()));
  return out;
}

RunStats compute_stats(const RunLog& log, const SimConfig& config) {
  RunStats s;
  s.filter = config.filter.label();
  s.seed = config.seed;
  for (const StatsWindow& w : config.windows) {
    s.windows.push_back(window_stats(log, w, log.has_truth));
  }
  for (const RunRow& r : log.rows) {
    if (!r.env_ok) {
      if (s.envelope_violations == 0) s.first_violation_t = r.t;
      ++s.envelope_violations;
    }
    if (log.has_truth && !(r.err_I < xi(config.ppf, r.t))) {
      if (s.true_envelope_violations == 0) s.first_true_violation_t = r.t;
      ++s.true_envelope_violations;
    }
  }
  if (!log.rows.empty()) {
    s.final_error = log.has_truth ? log.rows.back().err_I : log.rows.back().err_metric;
  }
  return s;
}

// --- output -------------------------------------------------------------------

namespace {

void put(std::ostream& os, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

}  // namespace

void write_run_csv(std::ostream& os, const RunLog& log) {
  os << "t,err_I,err_metric,E,mu,xi,bx_hat,by_hat,bz_hat,phi,theta,psi,phi_hat,theta_hat,psi_hat,"
        "env_ok\n";
  for (const RunRow& r : log.rows) {
    const double vals[] = {r.t, r.err_I, r.err_metric, r.E, r.mu, r.xi,
                           r.b_hat.x(), r.b_hat.y(), r.b_hat.z(),
                           r.truth.roll, r.truth.pitch, r.truth.yaw,
                           r.estimate.roll, r.estimate.pitch, r.estimate.yaw};
    for (double v : vals) {
      put(os, v);
      os << ',';
    }
    os << (r.env_ok ? 1 : 0) << '\n';
  }
}

std::string run_csv(const RunLog& log) {
  std::ostringstream os;
  write_run_csv(os, log);
  return os.str();
}

namespace {

nlohmann::ordered_json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

std::string stats_json(const RunStats& stats) {
  nlohmann::ordered_json j;
  j["filter"] = stats.filter;
  j["seed"] = stats.seed;
  j["windows"] = nlohmann::ordered_json::array();
  for (const WindowStats& w : stats.windows) {
    j["windows"].push_back({{"t_start", w.window.t_start},
                            {"t_end", w.window.t_end},
                            {"mean", number_or_null(w.mean)},
                            {"std", number_or_null(w.std)},
                            {"count", w.count}});
  }
  j["envelope_violations"] = stats.envelope_violations;
  j["true_envelope_violations"] = stats.true_envelope_violations;
  j["first_violation_t"] = stats.first_violation_t;
  j["first_true_violation_t"] = stats.first_true_violation_t;
  j["transform_clamps"] = stats.transform_clamps;
  j["gated_steps"] = stats.gated_steps;
  j["singular_steps"] = stats.singular_steps;
  j["final_error"] = number_or_null(stats.final_error);
  return j.dump(2);
}

std::vector<ReportRow> compare_report(const std::vector<SimConfig>& configs) {
  if (configs.empty()) {
    throw Error(ErrorKind::InvalidConfig, "compare needs at least one configuration");
  }
  std::vector<ReportRow> rows;
  for (const SimConfig& c : configs) {
    const RunResult r = run(c);
    for (const WindowStats& w : r.stats.windows) {
      rows.push_back({r.stats.filter, c.seed, w.window, w.mean, w.std,
                      r.stats.envelope_violations, r.stats.true_envelope_violations});
    }
  }
  return rows;
}

void write_report_csv(std::ostream& os, const std::vector<ReportRow>& rows) {
  os << "filter,seed,t_start,t_end,mean,std,envelope_violations,true_envelope_violations\n";
  for (const ReportRow& r : rows) {
    os << r.filter << ',' << r.seed << ',';
    put(os, r.window.t_start);
    os << ',';
    put(os, r.window.t_end);
    os << ',';
    put(os, r.mean);
    os << ',';
    put(os, r.std);
    os << ',' << r.envelope_violations << ',' << r.true_envelope_violations << '\n';
  }
}

MonteCarloSummary monte_carlo(const SimConfig& config, const std::vector<std::uint64_t>& seeds,
                              unsigned threads) {
  config.validate();
  MonteCarloSummary out;
  out.runs.resize(seeds.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  const auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        SimConfig c = config;
        c.seed = seeds[i];
        out.runs[i] = run(c).stats;
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(seeds.size())));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (std::thread& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);

  std::sort(out.runs.begin(), out.runs.end(),
            [](const RunStats& a, const RunStats& b) { return a.seed < b.seed; });
  for (std::size_t w = 0; w < config.windows.size(); ++w) {
    WindowStats agg;
    agg.window = config.windows[w];
    agg.count = out.runs.size();
    double sum = 0.0;
    for (const RunStats& r : out.runs) sum += r.windows[w].mean;
    agg.mean = out.runs.empty() ? kNaN : sum / static_cast<double>(out.runs.size());
    double ss = 0.0;
    for (const RunStats& r : out.runs) ss += std::pow(r.windows[w].mean - agg.mean, 2);
    agg.std = out.runs.empty() ? kNaN : std::sqrt(ss / static_cast<double>(out.runs.size()));
    out.mean_of_means.push_back(agg);
  }
  return out;
}

}  // namespace ppfso3
