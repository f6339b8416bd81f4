#include "steinis/ensemble.hpp"

#include "steinis/discrepancy.hpp"

#include <limits>
#include <string>

namespace steinis {

EnsembleState init_ensemble(const DiagonalGaussian& q0, long n_leaders, long n_followers,
                            std::uint64_t seed) {
  if (n_leaders < 2) throw UsageError("init_ensemble: at least two leaders are required");
  if (n_followers < 1) throw UsageError("init_ensemble: at least one follower is required");
  std::mt19937_64 rng(seed);
  EnsembleState state;
  state.leaders = q0.sample(rng, n_leaders);
  state.followers = q0.sample(rng, n_followers);
  state.follower_log_q.resize(n_followers);
  for (long i = 0; i < n_followers; ++i) {
    state.follower_log_q[i] = q0.log_density(state.followers.row(i).transpose());
  }
  return state;
}

StepInfo advance(EnsembleState& state, const TargetModel& target, const KernelSpec& kernel,
                 const StepSchedule& schedule, DetMode det_mode) {
  const long d = state.leaders.cols();
  if (d != target.dim() || state.followers.cols() != d) {
    throw UsageError("steinis: ensemble and target dimensions differ");
  }
  if (state.follower_log_q.size() != state.followers.rows()) {
    throw UsageError("steinis: one log q entry per follower required");
  }

  StepInfo info;
  info.iteration = state.iteration;
  info.epsilon = schedule.step(state.iteration);
  const Bandwidth bw = resolve_bandwidth(kernel, state.leaders, state.leaders.rows());
  info.bandwidth = bw.h;
  info.degenerate_bandwidth = bw.degenerate;

  const VelocityField field = VelocityField::build(state.leaders, target, bw.h);
  const double eps = info.epsilon;
  const bool approx = uses_approximation(det_mode, eps);

  const long nb = state.followers.rows();
  Points moved(nb, d);
  Vector log_det(nb);
  constexpr long kNoFailure = std::numeric_limits<long>::max();
  long first_singular = kNoFailure;
  long fallbacks = 0;

#pragma omp parallel reduction(min : first_singular) reduction(+ : fallbacks)
  {
    Matrix jac(d, d);
    Vector velocity(d);
#pragma omp for schedule(static)
    for (long i = 0; i < nb; ++i) {
      const double* y = state.followers.row(i).data();
      bool done = false;
      if (approx) {
        field.eval_fused(y, velocity.data(), jac.data(), false);
        if (auto ld = log_det_approx(jac.col(0).head(d), eps)) {
          log_det[i] = *ld;
          done = true;
        } else {
          ++fallbacks;
        }
      }
      if (!done) {
        field.eval_fused(y, velocity.data(), jac.data(), true);
        try {
          log_det[i] = log_det_exact(jac, eps);
        } catch (const SingularMapError&) {
          first_singular = std::min(first_singular, i);
          log_det[i] = 0.0;
        }
      }
      for (long a = 0; a < d; ++a) moved(i, a) = y[a] + eps * velocity[a];
    }
  }

  if (first_singular != kNoFailure) {
    throw SingularMapError(state.iteration, first_singular,
                           "non-invertible transport at iteration " + std::to_string(state.iteration) +
                               ", follower " + std::to_string(first_singular) + " (step " +
                               std::to_string(eps) + " too large)");
  }

  state.leaders = apply_step(state.leaders, field, eps);
  state.followers = std::move(moved);
  state.follower_log_q -= log_det;
  state.bandwidth_history.push_back(bw.h);
  ++state.iteration;
  info.exact_fallbacks = fallbacks;
  return info;
}

EnsembleState steinis_iterate(EnsembleState state, const TargetModel& target, const KernelSpec& kernel,
                              const StepSchedule& schedule, DetMode det_mode) {
  advance(state, target, kernel, schedule, det_mode);
  return state;
}

WeightedSample compute_weights(const EnsembleState& state, const TargetModel& target) {
  WeightedSample sample;
  sample.positions = state.followers;
  sample.log_weights = evaluate_log_target(state.followers, target) - state.follower_log_q;
  return sample;
}

SteinIsRun run_steinis(const SteinIsOptions& options, const DiagonalGaussian& q0, const TargetModel& target) {
  if (options.iterations < 0) throw UsageError("steinis: iteration count must be nonnegative");
  if (q0.dim() != target.dim()) throw UsageError("steinis: q0 and target dimensions differ");

  SteinIsRun run;
  run.state = init_ensemble(q0, options.n_leaders, options.n_followers, options.seed);
  RunResult& result = run.result;
  result.method = "steinis";
  result.sample_size = options.n_followers;

  const auto ksd_of_followers = [&]() { return ksd_vstat(run.state.followers, target, options.ksd_kernel.value_or(options.kernel)); };
  if (options.ksd_every > 0) result.diagnostics.emplace_back("initial_ksd_squared", ksd_of_followers());

  long exact_fallbacks = 0;
  for (long l = 0; l < options.iterations; ++l) {
    const StepInfo info = advance(run.state, target, options.kernel, options.schedule, options.det_mode);
    exact_fallbacks += info.exact_fallbacks;

    TraceRow row;
    row.iteration = run.state.iteration;
    row.epsilon = info.epsilon;
    row.bandwidth = info.bandwidth;
    const bool last = l + 1 == options.iterations;
    const bool want_weights = options.early_stop_ess_fraction.has_value() || last ||
                              (options.trace_every > 0 && run.state.iteration % options.trace_every == 0);
    if (want_weights) {
      const WeightedSample s = compute_weights(run.state, target);
      row.ess = effective_sample_size(s);
      row.log_z_running = estimate_log_partition(s);
    }
    if (options.ksd_every > 0 && (run.state.iteration % options.ksd_every == 0 || last)) {
      row.ksd_squared = ksd_of_followers();
    }
    result.trace.push_back(row);

    if (options.early_stop_ess_fraction && row.ess &&
        *row.ess >= *options.early_stop_ess_fraction * static_cast<double>(options.n_followers)) {
      result.stopped_early = !last;
      break;
    }
  }

  result.iterations_run = run.state.iteration;
  run.sample = compute_weights(run.state, target);
  result.log_z = estimate_log_partition(run.sample);
  result.ess = effective_sample_size(run.sample);
  for (const TestFunction& f : options.test_functions) {
    result.estimates.emplace_back(f.name(), estimate_expectation(run.sample, f.evaluate(run.sample.positions)));
  }
  result.diagnostics.emplace_back("exact_determinant_fallbacks", static_cast<double>(exact_fallbacks));
  if (!run.state.bandwidth_history.empty()) {
    result.diagnostics.emplace_back("final_bandwidth", run.state.bandwidth_history.back());
  }
  return run;
}

}  // namespace steinis
