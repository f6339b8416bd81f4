// steinis: run, sweep and oracle subcommands over flat key = value configs.

#include "steinis/config.hpp"
#include "steinis/experiment.hpp"
#include "steinis/report.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace {

using namespace steinis;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitSingular = 3;
constexpr int kExitNoOracle = 4;

struct OracleUnavailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  std::string out_dir = ".";
  std::optional<int> workers;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "Configuration file (key = value lines)")->required();
  cmd->add_option("--seed", f.seed, "Override the configured seed");
  cmd->add_option("--set", f.overrides, "Override one key, as key=value (repeatable)");
  cmd->add_option("--out", f.out_dir, "Output directory");
  cmd->add_option("--workers", f.workers, "Worker threads (default: $STEINIS_WORKERS, else all cores)")
      ->check(CLI::PositiveNumber);
}

Config load_config(const CommonFlags& f) {
  Config cfg = Config::load(f.config_path);
  for (const auto& o : f.overrides) cfg.apply_override(o);
  if (f.seed) cfg.set("seed", std::to_string(*f.seed));
  return cfg;
}

void set_workers(const std::optional<int>& workers) {
  if (workers) {
    omp_set_num_threads(*workers);
    return;
  }
  if (const char* env = std::getenv("STEINIS_WORKERS")) {
    const int n = std::atoi(env);
    if (n < 1) throw ConfigError("STEINIS_WORKERS must be a positive integer");
    omp_set_num_threads(n);
  }
}

std::string output_path(const std::string& dir, const std::string& file) {
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / file).string();
}

std::string summary_value(const std::optional<double>& v, const char* fmt) {
  if (!v) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, *v);
  return buf;
}

int cmd_run(const CommonFlags& f) {
  set_workers(f.workers);
  const Config cfg = load_config(f);
  const RunConfig rc = parse_run_config(cfg);
  const BuiltTarget target = build_target(cfg);

  const auto start = std::chrono::steady_clock::now();
  const RunResult result = execute(rc, target, rc.seed);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::ostringstream csv;
  write_trace_csv(csv, result.trace);
  write_file(output_path(f.out_dir, rc.name + ".csv"), csv.str());
  write_file(output_path(f.out_dir, rc.name + ".json"), result_json(result, rc.name, rc.seed, wall));

  std::string estimate = "log_z=" + summary_value(result.log_z, "%.6f");
  if (!result.log_z && !result.estimates.empty()) {
    estimate = result.estimates.front().first + "=" + summary_value(result.estimates.front().second, "%.6f");
  }
  std::cout << "method=" << result.method << ' ' << estimate << " ess=" << summary_value(result.ess, "%.2f")
            << " wall=" << summary_value(wall, "%.3f") << "s\n";
  return 0;
}

int cmd_sweep(const CommonFlags& f, const std::string& axis_text, const std::string& values_text) {
  set_workers(f.workers);
  const Config cfg = load_config(f);
  const SweepAxis axis = parse_sweep_axis(axis_text);
  const std::vector<double> values = parse_number_list(values_text, "--values");
  if (values.empty()) throw ConfigError("--values: empty list");
  const RunConfig rc = parse_run_config(cfg);

  const auto rows = run_sweep(cfg, axis, values);
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  write_file(output_path(f.out_dir, rc.name + "_agg.csv"), csv.str());
  write_file(output_path(f.out_dir, rc.name + ".json"), sweep_json(rc.name, axis_text, rc.quantity, rows));
  std::cout << csv.str();
  return 0;
}

int cmd_oracle(const CommonFlags& f) {
  const Config cfg = load_config(f);
  const BuiltTarget target = build_target(cfg);
  nlohmann::ordered_json j;
  j["format_version"] = kFormatVersion;
  j["target"] = target.kind;
  if (target.gmm) {
    const double w = cfg.get_double("cos.w", 1.0);
    const double b = cfg.get_double("cos.b", 0.5);
    j["log_z"] = target.log_scale;
    nlohmann::ordered_json moments = nlohmann::ordered_json::object();
    for (const TestFunction& fn : default_test_functions(target.gmm->dim(), w, b)) {
      moments[fn.name()] = target.gmm->exact_expectation(fn);
    }
    j["moments"] = moments;
  } else if (target.rbm) {
    const auto log_z = target.model->exact_log_z();
    if (!log_z) {
      throw OracleUnavailable("rbm with " + std::to_string(target.rbm->hidden()) +
                              " hidden units is too large to enumerate");
    }
    j["log_z"] = *log_z;
  } else {
    throw OracleUnavailable("no closed-form oracle for target " + target.kind);
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stein variational importance sampling experiments"};
  app.require_subcommand(1);

  CommonFlags run_flags, sweep_flags, oracle_flags;
  auto* run = app.add_subcommand("run", "Run one configured method and write <name>.json and <name>.csv");
  add_common(run, run_flags);

  auto* sweep = app.add_subcommand("sweep", "Repeat a run over an axis and seeds; write <name>_agg.csv");
  add_common(sweep, sweep_flags);
  std::string axis, values;
  sweep->add_option("--axis", axis, "n_followers, transitions or dimension")->required();
  sweep->add_option("--values", values, "Axis values, e.g. 50,100,200")->required();

  auto* oracle = app.add_subcommand("oracle", "Print exact log Z (rbm) or exact moments (gmm) as JSON");
  add_common(oracle, oracle_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*run) return cmd_run(run_flags);
    if (*sweep) return cmd_sweep(sweep_flags, axis, values);
    return cmd_oracle(oracle_flags);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SingularMapError& e) {
    std::cerr << "singular map at iteration " << e.iteration() << " (follower " << e.follower() << "): " << e.what()
              << '\n';
    return kExitSingular;
  } catch (const OracleUnavailable& e) {
    std::cerr << "oracle unavailable: " << e.what() << '\n';
    return kExitNoOracle;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
