#include "steinis/experiment.hpp"

#include "steinis/discrepancy.hpp"
#include "steinis/estimators.hpp"
#include "steinis/numerics.hpp"

#include <cmath>
#include <exception>
#include <map>

namespace steinis {

Method parse_method(const std::string& text) {
  static const std::map<std::string, Method> table = {
      {"steinis", Method::SteinIS},    {"svgd", Method::SVGD}, {"plain_is", Method::PlainIS},
      {"ais", Method::AIS},            {"hais", Method::HAIS}, {"path_integration", Method::PathIntegration},
  };
  const auto it = table.find(text);
  if (it == table.end()) throw ConfigError("unknown method \"" + text + "\"");
  return it->second;
}

std::string method_name(Method m) {
  switch (m) {
    case Method::SteinIS:
      return "steinis";
    case Method::SVGD:
      return "svgd";
    case Method::PlainIS:
      return "plain_is";
    case Method::AIS:
      return "ais";
    case Method::HAIS:
      return "hais";
    case Method::PathIntegration:
      return "path_integration";
  }
  return "unknown";
}

DetMode parse_det_mode(const std::string& text) {
  if (text == "exact") return DetMode::Exact;
  if (text == "approx") return DetMode::Approx;
  if (text == "auto") return DetMode::Auto;
  throw ConfigError("det_mode must be exact, approx or auto, got \"" + text + "\"");
}

namespace {

Vector broadcast(const std::vector<double>& values, long dim, const std::string& key) {
  if (values.size() == 1) return Vector::Constant(dim, values[0]);
  if (static_cast<long>(values.size()) != dim) {
    throw ConfigError(key + ": expected 1 or " + std::to_string(dim) + " values");
  }
  return Eigen::Map<const Vector>(values.data(), dim);
}

long positive(const Config& cfg, const std::string& key, long fallback) {
  const long v = cfg.get_long(key, fallback);
  if (v < 1) throw ConfigError(key + " must be positive");
  return v;
}

KernelSpec parse_kernel(const std::string& text, const std::string& key) {
  if (text == "median") return KernelSpec::median();
  try {
    return KernelSpec::fixed(parse_number_list(text, key).at(0));
  } catch (const std::exception&) {
    throw ConfigError(key + " must be \"median\" or a positive number");
  }
}

std::shared_ptr<const GmmTarget> gmm_from_config(const Config& cfg) {
  if (cfg.has("gmm.weights")) {
    const auto w = cfg.get_doubles("gmm.weights");
    const auto mu = cfg.get_doubles("gmm.means");
    const auto sg = cfg.get_doubles("gmm.sigmas");
    const long m = static_cast<long>(w.size());
    if (m == 0 || mu.size() % w.size() != 0 || static_cast<long>(sg.size()) != m) {
      throw ConfigError("gmm: means must hold components x dim values and sigmas one per component");
    }
    const long d = static_cast<long>(mu.size()) / m;
    Vector weights = Eigen::Map<const Vector>(w.data(), m);
    weights /= weights.sum();
    Matrix means(m, d);
    for (long k = 0; k < m; ++k) {
      for (long t = 0; t < d; ++t) means(k, t) = mu[static_cast<std::size_t>(k * d + t)];
    }
    return std::make_shared<GmmTarget>(GmmTarget::isotropic(weights, means, Eigen::Map<const Vector>(sg.data(), m)));
  }
  RandomGmmOptions o;
  o.components = positive(cfg, "gmm.components", o.components);
  o.dim = positive(cfg, "gmm.dim", o.dim);
  o.mean_half_width = cfg.get_double("gmm.mean_half_width", o.mean_half_width);
  o.sigma_min = cfg.get_double("gmm.sigma_min", o.sigma_min);
  o.sigma_max = cfg.get_double("gmm.sigma_max", o.sigma_max);
  return std::make_shared<GmmTarget>(random_gmm(o, cfg.get_u64("gmm.seed", 1)));
}

}  // namespace

BuiltTarget build_target(const Config& cfg) {
  BuiltTarget out;
  out.kind = cfg.get_string("target", "gmm");
  try {
    if (out.kind == "gaussian") {
      const long d = positive(cfg, "gaussian.dim", 1);
      const Vector mean = broadcast(cfg.has("gaussian.mean") ? cfg.get_doubles("gaussian.mean") : std::vector<double>{0.0},
                                    d, "gaussian.mean");
      const Vector sd = broadcast(cfg.has("gaussian.std") ? cfg.get_doubles("gaussian.std") : std::vector<double>{1.0},
                                  d, "gaussian.std");
      out.model = std::make_shared<DiagonalGaussian>(mean, sd);
      std::vector<Matrix> cov{Matrix(sd.array().square().matrix().asDiagonal())};
      out.gmm = std::make_shared<GmmTarget>(Vector::Ones(1), Matrix(mean.transpose()), cov);
    } else if (out.kind == "gmm") {
      out.gmm = gmm_from_config(cfg);
      out.model = out.gmm;
    } else if (out.kind == "rbm") {
      if (cfg.has("rbm.file")) {
        out.rbm = std::make_shared<RbmTarget>(load_rbm(cfg.get_string("rbm.file")));
      } else {
        out.rbm = std::make_shared<RbmTarget>(random_rbm(positive(cfg, "rbm.visible", 10),
                                                         positive(cfg, "rbm.hidden", 10), cfg.get_u64("rbm.seed", 1)));
      }
      out.model = out.rbm;
    } else if (out.kind == "transformed_gmm") {
      const TransformedGmmTarget def = TransformedGmmTarget::default_instance();
      QuadraticWarp warp = def.warp();
      warp.a1 = cfg.get_double("tgmm.a1", warp.a1);
      warp.a2 = cfg.get_double("tgmm.a2", warp.a2);
      warp.a3 = cfg.get_double("tgmm.a3", warp.a3);
      warp.b1 = cfg.get_double("tgmm.b1", warp.b1);
      warp.b2 = cfg.get_double("tgmm.b2", warp.b2);
      out.model = std::make_shared<TransformedGmmTarget>(def.base(), warp);
    } else {
      throw ConfigError("unknown target \"" + out.kind + "\"");
    }
  } catch (const UsageError& e) {
    throw ConfigError(std::string("target: ") + e.what());
  }

  out.log_scale = cfg.get_double("target.log_scale", 0.0);
  if (out.log_scale != 0.0) out.model = std::make_shared<ScaledTarget>(out.model, out.log_scale);
  return out;
}

std::vector<TestFunction> default_test_functions(long dim, double w, double b) {
  std::vector<TestFunction> fns;
  for (long j = 0; j < dim; ++j) {
    fns.push_back(TestFunction::coordinate(j));
    fns.push_back(TestFunction::squared_coordinate(j));
    fns.push_back(TestFunction::cosine(j, w, b));
  }
  return fns;
}

RunConfig parse_run_config(const Config& cfg) {
  RunConfig rc;
  rc.name = cfg.get_string("name", rc.name);
  rc.method = parse_method(cfg.get_string("method", "steinis"));
  rc.n_leaders = cfg.get_long("leaders", rc.n_leaders);
  rc.n_followers = positive(cfg, "followers", rc.n_followers);
  rc.iterations = cfg.get_long("iterations", rc.iterations);
  rc.schedule.alpha = cfg.get_double("alpha", rc.schedule.alpha);
  rc.schedule.beta = cfg.get_double("beta", rc.schedule.beta);
  rc.det_mode = parse_det_mode(cfg.get_string("det_mode", "auto"));
  rc.seed = cfg.get_u64("seed", rc.seed);
  rc.trials = positive(cfg, "trials", rc.trials);
  rc.ksd_every = cfg.get_long("ksd_every", rc.ksd_every);
  rc.trace_every = cfg.get_long("trace_every", rc.trace_every);
  rc.path_particles = cfg.get_long("path.particles", rc.path_particles);
  rc.crossentropy_samples = positive(cfg, "path.crossentropy_samples", rc.crossentropy_samples);
  rc.cos_w = cfg.get_double("cos.w", rc.cos_w);
  rc.cos_b = cfg.get_double("cos.b", rc.cos_b);
  rc.quantity = cfg.get_string("quantity", rc.quantity);

  rc.kernel = parse_kernel(cfg.get_string("bandwidth", "median"), "bandwidth");
  if (cfg.has("ksd.bandwidth")) rc.ksd_kernel = parse_kernel(cfg.get_string("ksd.bandwidth"), "ksd.bandwidth");

  const double stop = cfg.get_double("early_stop_ess", 0.0);
  if (stop < 0.0 || stop > 1.0) throw ConfigError("early_stop_ess must lie in [0, 1]");
  if (stop > 0.0) rc.early_stop_ess_fraction = stop;

  rc.q0_mean = Vector::Zero(1);
  rc.q0_std = Vector::Ones(1);
  if (cfg.has("q0.mean")) {
    const auto v = cfg.get_doubles("q0.mean");
    rc.q0_mean = Eigen::Map<const Vector>(v.data(), static_cast<long>(v.size()));
  }
  if (cfg.has("q0.std")) {
    const auto v = cfg.get_doubles("q0.std");
    rc.q0_std = Eigen::Map<const Vector>(v.data(), static_cast<long>(v.size()));
  }

  rc.langevin.step = cfg.get_double("langevin.step", rc.langevin.step);
  rc.langevin.metropolis = cfg.get_bool("langevin.metropolis", rc.langevin.metropolis);
  rc.hmc.n_leapfrog = positive(cfg, "hmc.leapfrog", rc.hmc.n_leapfrog);
  rc.hmc.step_size = cfg.get_double("hmc.step", rc.hmc.step_size);
  rc.hmc.mass = cfg.get_double("hmc.mass", rc.hmc.mass);
  rc.hmc.persistence = cfg.get_double("hmc.persistence", rc.hmc.persistence);
  rc.tune_steps = cfg.get_bool("tune", rc.tune_steps);
  if (cfg.has("tune.low")) rc.tune_low = cfg.get_double("tune.low");
  if (cfg.has("tune.high")) rc.tune_high = cfg.get_double("tune.high");

  // Method-specific validation.
  if (rc.iterations < 0) throw ConfigError("iterations must be nonnegative");
  if (!(rc.schedule.alpha >= 0.0) || !(rc.schedule.beta >= 0.0)) {
    throw ConfigError("alpha and beta must be nonnegative");
  }
  if (rc.method == Method::SteinIS && rc.n_leaders < 2) throw ConfigError("steinis needs leaders >= 2");
  if ((rc.method == Method::AIS || rc.method == Method::HAIS) && rc.iterations < 1) {
    throw ConfigError("ais/hais need iterations (transitions) >= 1");
  }
  if (!(rc.langevin.step > 0.0)) throw ConfigError("langevin.step must be positive");
  if (!(rc.hmc.step_size > 0.0) || !(rc.hmc.mass > 0.0)) throw ConfigError("hmc.step and hmc.mass must be positive");
  if (rc.hmc.persistence < 0.0 || rc.hmc.persistence >= 1.0) throw ConfigError("hmc.persistence must lie in [0, 1)");
  if ((rc.q0_std.array() <= 0.0).any()) throw ConfigError("q0.std must be positive");
  return rc;
}

DiagonalGaussian make_q0(const RunConfig& rc, long dim) {
  auto widen = [dim](const Vector& v, const char* key) -> Vector {
    if (v.size() == 1) return Vector::Constant(dim, v[0]);
    if (v.size() != dim) throw ConfigError(std::string(key) + ": expected 1 or " + std::to_string(dim) + " values");
    return v;
  };
  return DiagonalGaussian(widen(rc.q0_mean, "q0.mean"), widen(rc.q0_std, "q0.std"));
}

SteinIsOptions make_steinis_options(const RunConfig& rc, long dim, std::uint64_t seed) {
  SteinIsOptions o;
  o.n_leaders = rc.n_leaders;
  o.n_followers = rc.n_followers;
  o.iterations = rc.iterations;
  o.schedule = rc.schedule;
  o.kernel = rc.kernel;
  o.det_mode = rc.det_mode;
  o.seed = seed;
  o.ksd_every = rc.ksd_every;
  o.ksd_kernel = rc.ksd_kernel;
  o.trace_every = rc.trace_every;
  o.early_stop_ess_fraction = rc.early_stop_ess_fraction;
  o.test_functions = default_test_functions(dim, rc.cos_w, rc.cos_b);
  return o;
}

namespace {

void add_estimates(RunResult& result, const WeightedSample& sample, const std::vector<TestFunction>& fns) {
  for (const TestFunction& f : fns) {
    result.estimates.emplace_back(f.name(), estimate_expectation(sample, f.evaluate(sample.positions)));
  }
}

RunResult run_svgd(const RunConfig& rc, const DiagonalGaussian& q0, const TargetModel& target,
                   std::uint64_t seed, const std::vector<TestFunction>& fns) {
  RunResult result;
  result.method = "svgd";
  result.sample_size = rc.n_followers;
  if (rc.n_followers < 2) throw UsageError("svgd needs at least two particles");
  std::mt19937_64 rng(seed);
  Points particles = q0.sample(rng, rc.n_followers);
  for (long l = 0; l < rc.iterations; ++l) {
    const Points scores = evaluate_scores(particles, target);
    const double h = resolve_bandwidth(rc.kernel, particles, particles.rows()).h;
    TraceRow row;
    row.iteration = l + 1;
    row.epsilon = rc.schedule.step(l);
    row.bandwidth = h;
    if (rc.ksd_every > 0 && l % rc.ksd_every == 0) {
      row.ksd_squared = rc.ksd_kernel ? ksd_vstat(particles, target, *rc.ksd_kernel) : ksd_vstat(particles, scores, h);
    }
    particles = apply_step(particles, VelocityField(particles, scores, h), *row.epsilon);
    result.trace.push_back(row);
  }
  result.iterations_run = rc.iterations;
  WeightedSample uniform{particles, Vector::Zero(particles.rows())};
  add_estimates(result, uniform, fns);
  return result;
}

Transition make_transition(const RunConfig& rc, const DiagonalGaussian& q0, const TargetModel& target,
                           std::uint64_t seed) {
  if (rc.method == Method::HAIS) {
    Transition t = HmcTransition{rc.hmc};
    if (!rc.tune_steps) return t;
    return tune_transition(q0, target, t, rc.tune_low.value_or(0.6), rc.tune_high.value_or(0.9), seed);
  }
  Transition t = rc.langevin;
  if (!rc.tune_steps) return t;
  return tune_transition(q0, target, t, rc.tune_low.value_or(0.5), rc.tune_high.value_or(0.7), seed);
}

}  // namespace

RunResult execute(const RunConfig& rc, const BuiltTarget& built, std::uint64_t seed) {
  const TargetModel& target = *built.model;
  const DiagonalGaussian q0 = make_q0(rc, target.dim());
  const auto fns = default_test_functions(target.dim(), rc.cos_w, rc.cos_b);

  switch (rc.method) {
    case Method::SteinIS:
      return run_steinis(make_steinis_options(rc, target.dim(), seed), q0, target).result;
    case Method::SVGD:
      return run_svgd(rc, q0, target, seed, fns);
    case Method::PlainIS: {
      const PlainIsResult r = plain_is(q0, target, rc.n_followers, seed);
      RunResult result;
      result.method = "plain_is";
      result.sample_size = rc.n_followers;
      result.log_z = r.log_z;
      result.ess = effective_sample_size(r.sample);
      add_estimates(result, r.sample, fns);
      return result;
    }
    case Method::AIS:
    case Method::HAIS: {
      const Transition t = make_transition(rc, q0, target, seed);
      const AisResult r = ais_run(q0, target, AnnealingPath::linear(rc.iterations), t, rc.n_followers, seed);
      RunResult result;
      result.method = method_name(rc.method);
      result.sample_size = rc.n_followers;
      result.iterations_run = rc.iterations;
      result.log_z = r.log_z;
      result.ess = effective_sample_size(r.log_weights);
      const WeightedSample sample{r.final_positions, r.log_weights};
      add_estimates(result, sample, fns);
      const double step = std::holds_alternative<HmcTransition>(t) ? std::get<HmcTransition>(t).params.step_size
                                                                   : std::get<LangevinTransition>(t).step;
      double mean_acc = 0.0;
      for (double a : r.acceptance_rate) mean_acc += a;
      mean_acc /= static_cast<double>(r.acceptance_rate.size());
      result.diagnostics.emplace_back("transition_step", step);
      result.diagnostics.emplace_back("mean_acceptance", mean_acc);
      for (long k = 0; k < rc.iterations; ++k) {
        TraceRow row;
        row.iteration = k + 1;
        row.epsilon = step;
        result.trace.push_back(row);
      }
      return result;
    }
    case Method::PathIntegration: {
      PathIntegrationOptions o;
      o.n_particles = rc.path_particles > 0 ? rc.path_particles : rc.n_followers;
      o.iterations = rc.iterations;
      o.schedule = rc.schedule;
      o.kernel = rc.kernel;
      o.n_crossentropy_samples = rc.crossentropy_samples;
      o.seed = seed;
      const PathIntegrationResult r = path_integration(o, q0, target);
      RunResult result;
      result.method = "path_integration";
      result.sample_size = o.n_particles;
      result.iterations_run = rc.iterations;
      result.log_z = r.log_z_estimate;
      result.trace = r.trace;
      result.diagnostics.emplace_back("kl_estimate", r.kl_estimate);
      result.diagnostics.emplace_back("cross_entropy", r.cross_entropy);
      result.diagnostics.emplace_back("initial_ksd_squared", r.initial_ksd_squared);
      result.diagnostics.emplace_back("terminal_ksd_squared", r.terminal_ksd_squared);
      return result;
    }
  }
  throw ConfigError("unsupported method");
}

namespace {

struct QuantitySpec {
  enum class Kind { LogZ, Z, Expectation } kind;
  TestFunction fn = TestFunction::coordinate(0);
};

QuantitySpec parse_quantity(const std::string& q, double w, double b) {
  if (q == "log_z") return {QuantitySpec::Kind::LogZ};
  if (q == "z") return {QuantitySpec::Kind::Z};
  const auto colon = q.find(':');
  if (colon != std::string::npos) {
    const std::string head = q.substr(0, colon);
    long j = 0;
    try {
      j = std::stol(q.substr(colon + 1)) - 1;
    } catch (const std::exception&) {
      throw ConfigError("quantity \"" + q + "\": bad coordinate index");
    }
    if (j < 0) throw ConfigError("quantity \"" + q + "\": coordinates are 1-based");
    if (head == "mean") return {QuantitySpec::Kind::Expectation, TestFunction::coordinate(j)};
    if (head == "second_moment") return {QuantitySpec::Kind::Expectation, TestFunction::squared_coordinate(j)};
    if (head == "cos") return {QuantitySpec::Kind::Expectation, TestFunction::cosine(j, w, b)};
  }
  throw ConfigError("unknown quantity \"" + q + "\" (log_z, z, mean:J, second_moment:J, cos:J)");
}

}  // namespace

double extract_quantity(const std::string& quantity, const RunResult& result) {
  const QuantitySpec spec = parse_quantity(quantity, 0.0, 0.0);
  if (spec.kind != QuantitySpec::Kind::Expectation) {
    if (!result.log_z) throw ConfigError("method " + result.method + " does not estimate the partition function");
    return spec.kind == QuantitySpec::Kind::LogZ ? *result.log_z : std::exp(*result.log_z);
  }
  const std::string name = spec.fn.name();
  for (const auto& [k, v] : result.estimates) {
    if (k == name) return v;
  }
  throw ConfigError("method " + result.method + " reports no estimate for " + name);
}

std::optional<double> oracle_quantity(const std::string& quantity, const BuiltTarget& target, const RunConfig& rc) {
  const QuantitySpec spec = parse_quantity(quantity, rc.cos_w, rc.cos_b);
  if (spec.kind != QuantitySpec::Kind::Expectation) {
    const auto log_z = target.model->exact_log_z();
    if (!log_z) return std::nullopt;
    return spec.kind == QuantitySpec::Kind::LogZ ? *log_z : std::exp(*log_z);
  }
  if (!target.gmm) return std::nullopt;
  if (spec.fn.j >= target.gmm->dim()) throw ConfigError("quantity coordinate exceeds the target dimension");
  return target.gmm->exact_expectation(spec.fn);
}

SweepAxis parse_sweep_axis(const std::string& text) {
  if (text == "n_followers" || text == "followers") return SweepAxis::Followers;
  if (text == "transitions" || text == "iterations") return SweepAxis::Transitions;
  if (text == "dimension") return SweepAxis::Dimension;
  throw ConfigError("sweep axis must be n_followers, transitions or dimension");
}

std::vector<double> run_trials(const RunConfig& rc, const BuiltTarget& target) {
  parse_quantity(rc.quantity, rc.cos_w, rc.cos_b);
  const long n = rc.trials;
  std::vector<double> values(static_cast<std::size_t>(n), 0.0);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (long t = 0; t < n; ++t) {
    try {
      const RunResult r = execute(rc, target, stream_seed(rc.seed, static_cast<std::uint64_t>(t)));
      values[static_cast<std::size_t>(t)] = extract_quantity(rc.quantity, r);
    } catch (...) {
      errors[static_cast<std::size_t>(t)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return values;
}

std::vector<SweepRow> run_sweep(const Config& base, SweepAxis axis, const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("sweep needs at least one axis value");
  std::vector<SweepRow> rows;
  for (double value : values) {
    if (value != std::floor(value) || value < 1) throw ConfigError("sweep values must be positive integers");
    Config cfg = base;
    const std::string v = std::to_string(static_cast<long>(value));
    switch (axis) {
      case SweepAxis::Followers:
        cfg.set("followers", v);
        break;
      case SweepAxis::Transitions:
        cfg.set("iterations", v);
        break;
      case SweepAxis::Dimension: {
        const std::string kind = cfg.get_string("target", "gmm");
        if (kind == "rbm") {
          if (cfg.has("rbm.file")) throw ConfigError("dimension sweep needs a generated rbm, not rbm.file");
          cfg.set("rbm.visible", v);
        } else if (kind == "gmm") {
          cfg.set("gmm.dim", v);
        } else if (kind == "gaussian") {
          cfg.set("gaussian.dim", v);
        } else {
          throw ConfigError("dimension sweep is not available for target " + kind);
        }
        break;
      }
    }
    const RunConfig rc = parse_run_config(cfg);
    const BuiltTarget target = build_target(cfg);
    const std::vector<double> est = run_trials(rc, target);

    SweepRow row;
    row.axis_value = value;
    row.trials = rc.trials;
    row.oracle = oracle_quantity(rc.quantity, target, rc);
    double mean = 0.0;
    for (double e : est) mean += e;
    mean /= static_cast<double>(est.size());
    double var = 0.0;
    double sq_err = 0.0;
    for (double e : est) {
      var += (e - mean) * (e - mean);
      if (row.oracle) sq_err += (e - *row.oracle) * (e - *row.oracle);
    }
    row.mean_estimate = mean;
    row.std_error = est.size() > 1 ? std::sqrt(var / static_cast<double>(est.size() - 1) / static_cast<double>(est.size())) : 0.0;
    if (row.oracle) row.mse = sq_err / static_cast<double>(est.size());
    rows.push_back(row);
  }
  return rows;
}

}  // namespace steinis
