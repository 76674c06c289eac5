#include "ppfso3/verify.hpp"

#include "ppfso3/config.hpp"
#include "ppfso3/errors.hpp"
#include "ppfso3/harness.hpp"
#include "ppfso3/reconstruct.hpp"
#include "ppfso3/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <thread>

namespace ppfso3 {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

unsigned pick_threads(unsigned threads) {
  if (threads > 0) return threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::uint64_t> seed_list(int n) {
  std::vector<std::uint64_t> s(static_cast<std::size_t>(std::max(0, n)));
  std::iota(s.begin(), s.end(), 1);
  return s;
}

Vec3 random_unit(SplitMix64& rng) {
  Vec3 v;
  do {
    v = Vec3(rng.gaussian(), rng.gaussian(), rng.gaussian());
  } while (v.norm() < 1e-6);
  return v.normalized();
}

Vec3 random_vec(SplitMix64& rng) { return Vec3(rng.gaussian(), rng.gaussian(), rng.gaussian()); }

Mat3 random_mat(SplitMix64& rng) {
  Mat3 m;
  for (int i = 0; i < 9; ++i) m(i) = 2.0 * rng.uniform() - 1.0;
  return m;
}

// Uniform on SO(3) from a normalized Gaussian quaternion.
RotationMatrix random_rotation(SplitMix64& rng) {
  Eigen::Vector4d q(rng.gaussian(), rng.gaussian(), rng.gaussian(), rng.gaussian());
  q.normalize();
  const double w = q(0);
  const Vec3 v = q.tail<3>();
  const Mat3 m = (w * w - v.squaredNorm()) * Mat3::Identity() + 2.0 * v * v.transpose() +
                 2.0 * w * skew(v);
  return RotationMatrix(m);
}

// Three unit directions (two random plus their normalized cross product)
// with random positive weights rescaled to sum to 3.
struct RandomProfile {
  std::vector<Vec3> v;
  std::vector<double> s;
};

RandomProfile random_profile(SplitMix64& rng) {
  RandomProfile p;
  Vec3 a = random_unit(rng);
  Vec3 b = random_unit(rng);
  while (a.cross(b).norm() < 0.05) b = random_unit(rng);
  p.v = {a, b, a.cross(b).normalized()};
  p.s = {0.2 + rng.uniform(), 0.2 + rng.uniform(), 0.2 + rng.uniform()};
  const double sum = p.s[0] + p.s[1] + p.s[2];
  for (double& s : p.s) s *= 3.0 / sum;
  return p;
}

Mat3 weighted_outer(const RandomProfile& p) {
  Mat3 m = Mat3::Zero();
  for (std::size_t i = 0; i < p.v.size(); ++i) m += p.s[i] * p.v[i] * p.v[i].transpose();
  return m;
}

double smallest_eigenvalue(const Mat3& sym) {
  return Eigen::SelfAdjointEigenSolver<Mat3>(sym, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

// Tracks the largest deviation seen by a family of checks.
struct Worst {
  double value = 0.0;
  void add(double v) { value = std::max(value, std::isfinite(v) ? v : INFINITY); }
};

}  // namespace

CheckResult check_identities(std::uint64_t seed) {
  const auto t0 = Clock::now();
  CheckResult r{1, "identity suite", false, 0.0, ""};
  SplitMix64 rng(seed);
  constexpr int kCases = 1000;
  constexpr double kTol = 1e-12;

  Worst half_turn_eq;
  for (int i = 0; i < kCases; ++i) {
    const RotationMatrix R = random_rotation(rng);
    const double e = norm_euclid_dist(R);
    half_turn_eq.add(std::abs(vex(pa(R.matrix())).squaredNorm() - 4.0 * (1.0 - e) * e));
  }

  int inequality_tested = 0;
  int inequality_failed = 0;
  for (int i = 0; i < kCases; ++i) {
    const RandomProfile p = random_profile(rng);
    const Mat3 M = weighted_outer(p);
    const Mat3 MR = M * random_rotation(rng).matrix();
    const double lambda = smallest_eigenvalue(M.trace() * Mat3::Identity() - M);
    const double denom = 1.0 + (M.inverse() * MR).trace();
    if (denom <= 1e-6) continue;
    ++inequality_tested;
    const double lhs = 2.0 / lambda * vex(pa(MR)).squaredNorm() / denom;
    if (lhs < norm_euclid_dist(MR) - kTol) ++inequality_failed;
  }

  Worst ident[7];
  for (int i = 0; i < kCases; ++i) {
    const Vec3 a = random_vec(rng);
    const Vec3 b = random_vec(rng);
    const RotationMatrix R = random_rotation(rng);
    const Mat3 A = random_mat(rng);
    const Mat3 Bm = random_mat(rng);
    const Mat3 S = ps(random_mat(rng));
    ident[0].add((skew(a.cross(b)) - (b * a.transpose() - a * b.transpose())).cwiseAbs().maxCoeff());
    ident[1].add((skew(R * a) - R.matrix() * skew(a) * R.matrix().transpose()).cwiseAbs().maxCoeff());
    ident[2].add((skew(a) * skew(a) - (-a.dot(a) * Mat3::Identity() + a * a.transpose()))
                     .cwiseAbs()
                     .maxCoeff());
    ident[3].add((S * skew(a) + skew(a) * S - (S.trace() * skew(a) - skew(S * a)))
                     .cwiseAbs()
                     .maxCoeff());
    ident[4].add(std::abs((A * Bm - Bm * A).trace()));
    ident[5].add(std::abs((S * skew(a)).trace()));
    ident[6].add(std::abs((A * skew(a)).trace() + 2.0 * vex(pa(A)).dot(a)));
  }

  r.seconds = seconds_since(t0);
  double worst_ident = 0.0;
  for (const Worst& w : ident) worst_ident = std::max(worst_ident, w.value);
  r.passed = half_turn_eq.value <= kTol && inequality_failed == 0 && inequality_tested > 0 &&
             worst_ident <= kTol && r.seconds < 1.0;
  std::ostringstream os;
  os << "distance identity max err " << sci(half_turn_eq.value) << "; inequality " << inequality_tested
     << " tested, " << inequality_failed << " failed; identities max err " << sci(worst_ident);
  r.detail = os.str();
  return r;
}

CheckResult check_measurement_space(std::uint64_t seed) {
  const auto t0 = Clock::now();
  CheckResult r{2, "measurement-space oracle", false, 0.0, ""};
  SplitMix64 rng(seed);
  constexpr int kCases = 1000;
  Worst vex_err;
  Worst dist_err;
  Worst ups_err;
  for (int i = 0; i < kCases; ++i) {
    const RandomProfile p = random_profile(rng);
    const RotationMatrix R = random_rotation(rng);
    const RotationMatrix R_hat = random_rotation(rng);
    MeasurementFrame frame;
    for (std::size_t k = 0; k < p.v.size(); ++k) {
      frame.observations.push_back({p.v[k], R.matrix().transpose() * p.v[k], p.s[k]});
    }
    const Mat3 M_I = weighted_outer(p);
    const Mat3 M_B = R.matrix().transpose() * M_I * R.matrix();
    const Mat3 MR = M_B * (R.transpose() * R_hat).matrix();
    const MeasurementSpaceTerms ms = measurement_space_terms(frame, R_hat, M_B.inverse());
    vex_err.add((ms.vex_term - vex(pa(MR))).cwiseAbs().maxCoeff());
    dist_err.add(std::abs(ms.distance - 0.25 * (Mat3::Identity() - MR).trace()));
    ups_err.add(std::abs(ms.upsilon - (M_B.inverse() * MR).trace()));
  }
  r.seconds = seconds_since(t0);
  r.passed = vex_err.value <= 1e-12 && dist_err.value <= 1e-12 && ups_err.value <= 1e-12 &&
             r.seconds < 1.0;
  r.detail = "max err vex " + sci(vex_err.value) + ", distance " + sci(dist_err.value) +
             ", Upsilon " + sci(ups_err.value);
  return r;
}

CheckResult check_noise_free_convergence() {
  CheckResult r{3, "noise-free convergence", true, 0.0, ""};
  std::ostringstream os;
  for (const char* name : {"semi-direct", "direct"}) {
    const auto t0 = Clock::now();
    SimConfig c = SimConfig::reference_defaults();
    c.noise.gyro_noise_std = 0.0;
    c.noise.vector_noise_std = 0.0;
    c.noise.vector_bias.clear();
    c.filter = parse_filter(name);
    c.guard.mode = GuardMode::Strict;
    long outside = 0;
    long v_increases = 0;
    double final_error = NAN;
    std::string failure;
    try {
      const RunResult run_result = run(c);
      double v_prev = INFINITY;
      for (const RunRow& row : run_result.log.rows) {
        if (!(row.err_I < row.xi)) ++outside;
        const double v = lyapunov(row.E, c.noise.gyro_bias - row.b_hat, c.gains.gamma);
        if (v > v_prev + 1e-6 * c.dt) ++v_increases;
        v_prev = v;
      }
      final_error = run_result.log.rows.back().err_I;
    } catch (const Error& e) {
      failure = e.to_json_line();
    }
    const double secs = seconds_since(t0);
    r.seconds += secs;
    const bool ok = failure.empty() && outside == 0 && v_increases == 0 && final_error < 1e-3 &&
                    secs < 5.0;
    r.passed = r.passed && ok;
    os << name << ": ";
    if (!failure.empty()) {
      os << failure;
    } else {
      os << "outside " << outside << ", V increases " << v_increases << ", final "
         << sci(final_error) << ", " << sci(secs) << " s";
    }
    os << "; ";
  }
  r.detail = os.str();
  return r;
}

CheckResult check_reference_reproduction(int seeds, unsigned threads) {
  const auto t0 = Clock::now();
  CheckResult r{4, "reference reproduction", false, 0.0, ""};
  struct Target {
    const char* filter;
    double lo, hi, reference;
  };
  const Target targets[] = {{"semi-direct", 1.4e-3, 1.26e-2, 4.2e-3},
                            {"direct", 2.3e-3, 2.07e-2, 6.9e-3}};
  bool ok = seeds >= 20;
  std::ostringstream os;
  for (const Target& tg : targets) {
    SimConfig c = SimConfig::reference_defaults();
    c.filter = parse_filter(tg.filter);
    c.windows = {{1.0, 15.0}};
    const MonteCarloSummary mc = monte_carlo(c, seed_list(seeds), pick_threads(threads));
    int in_band = 0;
    for (const RunStats& s : mc.runs) {
      const double m = s.windows[0].mean;
      if (m >= tg.lo && m <= tg.hi) ++in_band;
    }
    const double avg = mc.mean_of_means[0].mean;
    const bool filter_ok = in_band == seeds && avg >= tg.reference / 2.0 && avg <= tg.reference * 2.0;
    ok = ok && filter_ok;
    os << tg.filter << ": " << in_band << "/" << seeds << " seeds in band, mean of means "
       << sci(avg) << " (reference " << sci(tg.reference) << "); ";
  }
  r.seconds = seconds_since(t0);
  r.passed = ok && r.seconds < 60.0;
  r.detail = os.str();
  return r;
}

CheckResult check_baseline_separation(int seeds, unsigned threads) {
  const auto t0 = Clock::now();
  CheckResult r{5, "baseline separation", false, 0.0, ""};
  const auto summary = [&](const char* filter) {
    SimConfig c = SimConfig::reference_defaults();
    c.filter = parse_filter(filter);
    c.windows = {{7.0, 15.0}};
    return monte_carlo(c, seed_list(seeds), pick_threads(threads));
  };
  const MonteCarloSummary semi = summary("semi-direct");
  const MonteCarloSummary p100 = summary("passive:100");
  const MonteCarloSummary p1 = summary("passive:1");

  const double ratio = p100.mean_of_means[0].mean / semi.mean_of_means[0].mean;
  int p1_early_exit = 0;
  for (const RunStats& s : p1.runs) {
    if (s.first_true_violation_t >= 0.0 && s.first_true_violation_t < 2.0) ++p1_early_exit;
  }
  long semi_violations = 0;
  for (const RunStats& s : semi.runs) semi_violations += s.true_envelope_violations;

  r.seconds = seconds_since(t0);
  r.passed = ratio >= 10.0 && p1_early_exit == seeds && semi_violations == 0;
  std::ostringstream os;
  os << "passive k1=100 / semi-direct mean ratio " << sci(ratio) << " (need >= 10; "
     << sci(p100.mean_of_means[0].mean) << " vs " << sci(semi.mean_of_means[0].mean)
     << "); passive k1=1 left the envelope before 2 s on " << p1_early_exit << "/" << seeds
     << " seeds; semi-direct violations " << semi_violations;
  r.detail = os.str();
  return r;
}

CheckResult check_svd_reconstruction(std::uint64_t seed) {
  const auto t0 = Clock::now();
  CheckResult r{6, "SVD reconstruction", false, 0.0, ""};
  SplitMix64 rng(seed);
  constexpr int kCases = 1000;
  Worst recovery;
  Worst det_err;
  Worst ortho;
  const auto record = [&](const RotationMatrix& R_y) {
    det_err.add(std::abs(R_y.matrix().determinant() - 1.0));
    ortho.add(orthonormality_error(R_y.matrix()));
  };
  for (int i = 0; i < kCases; ++i) {
    const RandomProfile p = random_profile(rng);
    const RotationMatrix R = random_rotation(rng);
    MeasurementFrame frame;
    for (std::size_t k = 0; k < p.v.size(); ++k) {
      frame.observations.push_back({p.v[k], R.matrix().transpose() * p.v[k], p.s[k]});
    }
    const RotationMatrix R_y = svd_attitude(frame).R_y;
    recovery.add((R_y.matrix() - R.matrix()).norm());
    record(R_y);

    // Mirrored body vectors: the unconstrained optimum is a reflection.
    const Vec3 n = random_unit(rng);
    const Mat3 mirror = Mat3::Identity() - 2.0 * n * n.transpose();
    for (VectorObservation& o : frame.observations) o.v_body_meas = mirror * o.v_body_meas;
    record(svd_attitude(frame).R_y);
  }
  r.seconds = seconds_since(t0);
  r.passed = recovery.value < 1e-10 && det_err.value < 1e-12 && ortho.value < 1e-12;
  r.detail = "max |R_y - R| " + sci(recovery.value) + ", max |det - 1| " + sci(det_err.value) +
             " over " + std::to_string(2 * kCases) + " cases (half reflected)";
  return r;
}

CheckResult check_mekf(int seeds) {
  const auto t0 = Clock::now();
  CheckResult r{7, "MEKF sanity", false, 0.0, ""};
  bool ok = seeds > 0;
  double worst_norm = 0.0;
  int larger = 0;
  std::string failure;
  for (std::uint64_t seed = 1; seed <= static_cast<std::uint64_t>(seeds); ++seed) {
    double std_case[4] = {0.0, 0.0, 0.0, 0.0};
    for (int which = 1; which <= 3; ++which) {
      SimConfig c = SimConfig::reference_defaults();
      c.seed = seed;
      c.filter.kind = FilterKind::Mekf;
      c.filter.mekf_case = which;
      c.windows = {{7.0, 15.0}};
      try {
        MekfState s = make_mekf_state(c.initial_estimate(), c.init_bias, mekf_case(which),
                                      c.mekf_p_a0, c.mekf_p_b0);
        for (const MeasurementFrame& f : record_measurements(c)) {
          s = mekf_step(s, f, c.dt);
          worst_norm = std::max(worst_norm, std::abs(s.q_hat.norm() - 1.0));
        }
        std_case[which] = run(c).stats.windows[0].std;
      } catch (const Error& e) {
        ok = false;
        failure = e.to_json_line();
      }
    }
    if (std_case[3] > std_case[1]) ++larger;
  }
  r.seconds = seconds_since(t0);
  r.passed = ok && worst_norm <= 1e-9 && larger == seeds;
  std::ostringstream os;
  if (!failure.empty()) os << failure << "; ";
  os << "max ||q| - 1| " << sci(worst_norm) << "; case 3 STD > case 1 STD on " << larger << "/"
     << seeds << " seeds";
  r.detail = os.str();
  return r;
}

CheckResult check_determinism() {
  const auto t0 = Clock::now();
  CheckResult r{8, "determinism", false, 0.0, ""};
  SimConfig c = SimConfig::reference_defaults();
  c.seed = 42;
  const std::string a = run_csv(run(c).log);
  const std::string b = run_csv(run(c).log);
  r.seconds = seconds_since(t0);
  r.passed = a == b && !a.empty();
  r.detail = a == b ? "identical CSV (" + std::to_string(a.size()) + " bytes)" : "CSV differs";
  return r;
}

std::vector<CheckResult> run_acceptance(unsigned threads) {
  return {check_identities(),
          check_measurement_space(),
          check_noise_free_convergence(),
          check_reference_reproduction(20, threads),
          check_baseline_separation(20, threads),
          check_svd_reconstruction(),
          check_mekf(),
          check_determinism()};
}

std::string format_check(const CheckResult& r) {
  char buf[48];
  std::snprintf(buf, sizeof buf, " (%.3f s): ", r.seconds);
  return std::string(r.passed ? "[PASS] " : "[FAIL] ") + std::to_string(r.id) + " " + r.name +
         buf + r.detail;
}

}  // namespace ppfso3
