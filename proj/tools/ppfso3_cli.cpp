// Command-line front end: run, compare, verify.

#include "ppfso3/config.hpp"
#include "ppfso3/errors.hpp"
#include "ppfso3/harness.hpp"
#include "ppfso3/verify.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace ppfso3;

namespace {

constexpr const char* kOutEnv = "PPFSO3_OUT_DIR";

struct CommonOptions {
  std::string config_file;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("-c,--config", o.config_file, "key = value configuration file");
  cmd->add_option("--set", o.overrides, "override one key, e.g. --set dt=0.001 (repeatable)");
  cmd->add_option("--seed", o.seed, "RNG seed")->required();
  cmd->add_option("--out", o.out_dir,
                  std::string("output directory (default: $") + kOutEnv + ")");
}

SimConfig base_config(const CommonOptions& o) {
  SimConfig c = o.config_file.empty() ? SimConfig::reference_defaults() : load_config(o.config_file);
  for (const std::string& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::InvalidConfig, "--set expects key=value, got '" + kv + "'");
    }
    apply_config_entry(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  c.seed = *o.seed;
  return c;
}

fs::path output_dir(const CommonOptions& o) {
  std::string dir = o.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv(kOutEnv);
    if (env == nullptr || *env == '\0') {
      throw Error(ErrorKind::InvalidConfig,
                  std::string("--out is required when $") + kOutEnv + " is not set");
    }
    dir = env;
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create output directory '" + dir + "': " + ec.message());
  return dir;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot write '" + p.string() + "'");
  return f;
}

int cmd_run(const CommonOptions& o, const std::string& filter, const std::string& log_in,
            const std::string& record) {
  SimConfig c = base_config(o);
  c.filter = parse_filter(filter, c.filter);
  c.validate();
  const fs::path dir = output_dir(o);

  RunResult result;
  if (!log_in.empty()) {
    std::ifstream in(log_in);
    if (!in) throw Error(ErrorKind::Io, "cannot open measurement log '" + log_in + "'");
    result = run_frames(c, read_measurement_log(in, c));
  } else {
    result = run(c);
  }
  if (!record.empty()) {
    auto f = open_out(dir / record);
    write_measurement_log(f, record_measurements(c), c.inertial_refs.size());
  }

  {
    auto f = open_out(dir / "run.csv");
    write_run_csv(f, result.log);
  }
  const std::string stats = stats_json(result.stats);
  {
    auto f = open_out(dir / "stats.json");
    f << stats << '\n';
  }
  std::cout << stats << '\n';
  return 0;
}

int cmd_compare(const CommonOptions& o, const std::vector<std::string>& filters, int n_seeds) {
  const SimConfig base = base_config(o);
  if (n_seeds < 1) throw Error(ErrorKind::InvalidConfig, "--seeds must be >= 1");
  std::vector<SimConfig> configs;
  for (const std::string& f : filters) {
    for (int k = 0; k < n_seeds; ++k) {
      SimConfig c = base;
      c.filter = parse_filter(f, base.filter);
      c.seed = base.seed + static_cast<std::uint64_t>(k);
      configs.push_back(c);
    }
  }
  const std::vector<ReportRow> rows = compare_report(configs);
  const fs::path dir = output_dir(o);
  {
    auto f = open_out(dir / "report.csv");
    write_report_csv(f, rows);
  }
  write_report_csv(std::cout, rows);
  return 0;
}

int cmd_verify(unsigned threads) {
  bool all = true;
  for (const CheckResult& r : run_acceptance(threads)) {
    std::cout << format_check(r) << std::endl;
    all = all && r.passed;
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attitude filters with prescribed performance on SO(3)"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  std::string run_filter;
  std::string log_in;
  std::string record;
  CLI::App* run_cmd = app.add_subcommand("run", "simulate one configuration, write run.csv and stats.json");
  add_common(run_cmd, run_opts);
  run_cmd->add_option("--filter", run_filter, "semi-direct | direct | passive[:k1] | mekf[:case]")
      ->required();
  run_cmd->add_option("--log", log_in, "drive the filter from a recorded measurement CSV");
  run_cmd->add_option("--record", record, "also write the simulated measurements to this file");

  CommonOptions cmp_opts;
  std::vector<std::string> cmp_filters;
  int cmp_seeds = 1;
  CLI::App* cmp_cmd = app.add_subcommand("compare", "window statistics for several filters");
  add_common(cmp_cmd, cmp_opts);
  cmp_cmd->add_option("--filter", cmp_filters, "filter to include (repeatable)")->required();
  cmp_cmd->add_option("--seeds", cmp_seeds, "number of consecutive seeds starting at --seed");

  unsigned threads = 0;
  CLI::App* ver_cmd = app.add_subcommand("verify", "run the acceptance checks");
  ver_cmd->add_option("--threads", threads, "worker threads (0 = hardware)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << Error(ErrorKind::InvalidConfig, e.what()).to_json_line() << std::endl;
    return 2;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run_opts, run_filter, log_in, record);
    if (cmp_cmd->parsed()) return cmd_compare(cmp_opts, cmp_filters, cmp_seeds);
    return cmd_verify(threads);
  } catch (const Error& e) {
    std::cerr << e.to_json_line() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << Error(ErrorKind::Io, e.what()).to_json_line() << std::endl;
    return 1;
  }
}
