#pragma once

#include "steinis/baselines.hpp"
#include "steinis/config.hpp"
#include "steinis/ensemble.hpp"
#include "steinis/result.hpp"
#include "steinis/targets.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace steinis {

enum class Method { SteinIS, SVGD, PlainIS, AIS, HAIS, PathIntegration };

Method parse_method(const std::string& text);
std::string method_name(Method m);
DetMode parse_det_mode(const std::string& text);

/// A target built from configuration, with typed handles kept for the oracles.
struct BuiltTarget {
  std::string kind;  // gaussian | gmm | rbm | transformed_gmm
  TargetPtr model;
  std::shared_ptr<const GmmTarget> gmm;  // also set for gaussian targets (one component)
  std::shared_ptr<const RbmTarget> rbm;
  double log_scale = 0.0;
};

BuiltTarget build_target(const Config& cfg);

/// Test functions whose expectations are reported: x_j, x_j^2, cos(w x_j + b) for every coordinate.
std::vector<TestFunction> default_test_functions(long dim, double w, double b);

struct RunConfig {
  std::string name = "run";
  Method method = Method::SteinIS;
  long n_leaders = 100;
  long n_followers = 500;
  long iterations = 800;
  StepSchedule schedule{0.5, 0.5};
  DetMode det_mode = DetMode::Auto;
  KernelSpec kernel = KernelSpec::median();
  std::optional<KernelSpec> ksd_kernel;
  std::uint64_t seed = 1;
  long trials = 1;
  long ksd_every = 0;
  long trace_every = 1;
  std::optional<double> early_stop_ess_fraction;

  Vector q0_mean;  // broadcast to the target dimension when of length 1
  Vector q0_std;

  // AIS / HAIS
  LangevinTransition langevin{0.05, true};
  HmcParams hmc{};
  bool tune_steps = true;
  std::optional<double> tune_low;
  std::optional<double> tune_high;

  // Path integration
  long path_particles = 0;  // 0 = use n_followers
  long crossentropy_samples = 100000;

  double cos_w = 1.0;
  double cos_b = 0.5;
  std::string quantity = "log_z";
};

/// Validates and converts a configuration. Throws ConfigError.
RunConfig parse_run_config(const Config& cfg);

DiagonalGaussian make_q0(const RunConfig& rc, long dim);

/// SteinIS options for a run of rc against a target of dimension `dim`.
SteinIsOptions make_steinis_options(const RunConfig& rc, long dim, std::uint64_t seed);

/// Runs the configured method once with the given seed.
RunResult execute(const RunConfig& rc, const BuiltTarget& target, std::uint64_t seed);

/// Value of rc.quantity read from a result, and its exact value when the target has an oracle.
double extract_quantity(const std::string& quantity, const RunResult& result);
std::optional<double> oracle_quantity(const std::string& quantity, const BuiltTarget& target, const RunConfig& rc);

enum class SweepAxis { Followers, Transitions, Dimension };
SweepAxis parse_sweep_axis(const std::string& text);

struct SweepRow {
  double axis_value = 0.0;
  long trials = 0;
  double mean_estimate = 0.0;
  std::optional<double> mse;
  double std_error = 0.0;
  std::optional<double> oracle;
};

/// Runs the base configuration at each axis value for rc.trials seeds
/// (stream_seed(seed, t)); trials run in parallel, aggregation is in trial order.
std::vector<SweepRow> run_sweep(const Config& base, SweepAxis axis, const std::vector<double>& values);

/// Per-trial estimates of the configured quantity, in trial order.
std::vector<double> run_trials(const RunConfig& rc, const BuiltTarget& target);

}  // namespace steinis
