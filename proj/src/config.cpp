#include "ppfso3/config.hpp"

#include "ppfso3/errors.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace ppfso3 {

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& why) {
  throw Error(ErrorKind::InvalidConfig, "config key '" + key + "' = '" + value + "': " + why);
}

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (t.empty() || ec != std::errc() || ptr != last) bad(key, text, "not a number");
  return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    bad(key, text, "not a non-negative integer");
  }
  return v;
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const std::string& item : split(text, ',')) out.push_back(to_double(key, item));
  return out;
}

Vec3 to_vec3(const std::string& key, const std::string& text) {
  const std::vector<double> v = to_list(key, text);
  if (v.size() != 3) bad(key, text, "expected three comma-separated numbers");
  return Vec3(v[0], v[1], v[2]);
}

// "ref2" -> 1 for prefix "ref"; -1 when `key` does not have that form.
int indexed(const std::string& key, const std::string& prefix) {
  if (key.size() <= prefix.size() || key.compare(0, prefix.size(), prefix) != 0) return -1;
  const std::string digits = key.substr(prefix.size());
  int i = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), i);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || i < 1 || i > 64) return -1;
  return i - 1;
}

}  // namespace

void apply_config_entry(SimConfig& c, const std::string& raw_key, const std::string& value) {
  const std::string key = trim(raw_key);
  const auto num = [&] { return to_double(key, value); };
  const auto vec = [&] { return to_vec3(key, value); };

  if (key == "duration") c.duration = num();
  else if (key == "dt") c.dt = num();
  else if (key == "seed") c.seed = to_u64(key, value);
  else if (key == "filter") c.filter = parse_filter(trim(value), c.filter);
  else if (key == "k1") c.filter.k1 = num();
  else if (key == "mekf_case") c.filter.mekf_case = static_cast<int>(to_u64(key, value));
  else if (key == "gamma") c.gains.gamma = num();
  else if (key == "k_w") c.gains.k_w = num();
  else if (key == "xi0") c.ppf.xi0 = num();
  else if (key == "xi_inf") c.ppf.xi_inf = num();
  else if (key == "ell") c.ppf.ell = num();
  else if (key == "delta_bar") c.ppf.delta_bar = num();
  else if (key == "delta_under") c.ppf.delta_under = num();
  else if (key == "guard") {
    const std::string v = trim(value);
    if (v == "strict") c.guard.mode = GuardMode::Strict;
    else if (v == "clamp") c.guard.mode = GuardMode::Clamp;
    else if (v == "gate") c.guard.mode = GuardMode::Gate;
    else bad(key, value, "expected strict, clamp or gate");
  }
  else if (key == "eps_sing") c.guard.eps_sing = num();
  else if (key == "max_substep_angle") c.guard.max_substep_angle = num();
  else if (key == "max_substeps") c.guard.max_substeps = static_cast<int>(to_u64(key, value));
  else if (key == "gyro_bias") c.noise.gyro_bias = vec();
  else if (key == "gyro_noise_std") c.noise.gyro_noise_std = num();
  else if (key == "vector_noise_std") c.noise.vector_noise_std = num();
  else if (key == "weights") c.weights = to_list(key, value);
  else if (key == "init_angle_deg") c.init_angle_deg = num();
  else if (key == "init_axis") c.init_axis = vec();
  else if (key == "init_bias") c.init_bias = vec();
  else if (key == "truth_angle_deg") c.truth_angle_deg = num();
  else if (key == "truth_axis") c.truth_axis = vec();
  else if (key == "trajectory") {
    const std::string v = trim(value);
    if (v == "reference") c.trajectory = TrajectoryKind::Reference;
    else if (v == "constant") c.trajectory = TrajectoryKind::Constant;
    else bad(key, value, "expected reference or constant");
  }
  else if (key == "omega_const") c.omega_const = vec();
  else if (key == "mekf_p_a0") c.mekf_p_a0 = num();
  else if (key == "mekf_p_b0") c.mekf_p_b0 = num();
  else if (key == "windows") {
    c.windows.clear();
    for (const std::string& item : split(value, ',')) {
      const std::vector<std::string> ends = split(item, ':');
      if (ends.size() != 2) bad(key, value, "expected t0:t1 pairs");
      c.windows.push_back({to_double(key, ends[0]), to_double(key, ends[1])});
    }
  }
  else if (key == "preset") {
    const std::string v = trim(value);
    if (v == "full") c.windows = {{1.0, 15.0}};
    else if (v == "steady") c.windows = {{7.0, 15.0}};
    else bad(key, value, "expected full or steady");
  }
  else if (const int i = indexed(key, "ref"); i >= 0) {
    if (c.inertial_refs.size() <= static_cast<std::size_t>(i)) c.inertial_refs.resize(i + 1, Vec3::Zero());
    c.inertial_refs[i] = vec();
  }
  else if (const int j = indexed(key, "vector_bias"); j >= 0) {
    if (c.noise.vector_bias.size() <= static_cast<std::size_t>(j)) c.noise.vector_bias.resize(j + 1, Vec3::Zero());
    c.noise.vector_bias[j] = vec();
  }
  else {
    throw Error(ErrorKind::InvalidConfig, "unknown config key '" + key + "'");
  }
}

SimConfig parse_config(std::istream& in, SimConfig base) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::InvalidConfig,
                  "config line " + std::to_string(line_no) + ": expected key = value");
    }
    apply_config_entry(base, line.substr(0, eq), line.substr(eq + 1));
  }
  return base;
}

SimConfig load_config(const std::filesystem::path& path, SimConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config file '" + path.string() + "'");
  return parse_config(in, std::move(base));
}

std::vector<MeasurementFrame> read_measurement_log(std::istream& in, const SimConfig& config) {
  const std::size_t sensors = config.inertial_refs.size();
  const std::size_t columns = 4 + 3 * sensors;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Io, "measurement log is empty");
  const std::vector<std::string> header = split(trim(line), ',');
  if (header.size() != columns || header[0] != "t") {
    throw Error(ErrorKind::Io, "measurement log header must be t,wx,wy,wz followed by " +
                                   std::to_string(sensors) + " body-vector triples");
  }

  std::vector<MeasurementFrame> frames;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split(trim(line), ',');
    if (cells.size() != columns) {
      throw Error(ErrorKind::Io, "measurement log line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(columns) + " columns");
    }
    std::vector<double> v;
    v.reserve(columns);
    try {
      for (const std::string& cell : cells) v.push_back(to_double("log", cell));
    } catch (const Error&) {
      throw Error(ErrorKind::Io, "measurement log line " + std::to_string(line_no) + ": bad number");
    }
    std::vector<RawVectorPair> pairs;
    for (std::size_t i = 0; i < sensors; ++i) {
      pairs.push_back({config.inertial_refs[i], Vec3(v[4 + 3 * i], v[5 + 3 * i], v[6 + 3 * i])});
    }
    frames.push_back(build_frame(pairs, config.weights, Vec3(v[1], v[2], v[3]), v[0]));
  }
  return frames;
}

void write_measurement_log(std::ostream& out, const std::vector<MeasurementFrame>& frames,
                           std::size_t sensors) {
  out << "t,wx,wy,wz";
  for (std::size_t i = 1; i <= sensors; ++i) {
    out << ",b" << i << "x,b" << i << "y,b" << i << "z";
  }
  out << '\n';
  char buf[40];
  const auto put = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out << buf;
  };
  for (const MeasurementFrame& f : frames) {
    if (f.observations.size() < sensors) {
      throw Error(ErrorKind::Io, "frame has fewer observations than sensors");
    }
    put(f.t);
    for (int k = 0; k < 3; ++k) {
      out << ',';
      put(f.omega_m(k));
    }
    for (std::size_t i = 0; i < sensors; ++i) {
      for (int k = 0; k < 3; ++k) {
        out << ',';
        put(f.observations[i].v_body_meas(k));
      }
    }
    out << '\n';
  }
}

std::vector<MeasurementFrame> record_measurements(const SimConfig& config) {
  config.validate();
  NoiseModel noise = config.noise;
  noise.rng_seed = config.seed;
  SensorSimulator sensors(noise, config.inertial_refs, config.weights);
  const OmegaFn omega_fn = [&config](double t) { return config.omega(t); };
  const std::size_t n = config.step_count();
  std::vector<MeasurementFrame> frames;
  frames.reserve(n + 1);
  TrajectoryState truth{0.0, config.initial_truth(), config.omega(0.0)};
  for (std::size_t k = 0; k <= n; ++k) {
    truth.t = static_cast<double>(k) * config.dt;
    truth.omega = config.omega(truth.t);
    frames.push_back(sensors.sample(truth));
    if (k < n) truth.R = propagate_truth(truth, omega_fn, config.dt).R;
  }
  return frames;
}

}  // namespace ppfso3
