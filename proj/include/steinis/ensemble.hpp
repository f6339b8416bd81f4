#pragma once

#include "steinis/estimators.hpp"
#include "steinis/kernels.hpp"
#include "steinis/result.hpp"
#include "steinis/targets.hpp"
#include "steinis/transport.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace steinis {

/// Leader/follower ensemble. Leaders build the transport map; followers are
/// pushed through it and carry log q_l, the log density of the evolving proposal.
struct EnsembleState {
  Points leaders;
  Points followers;
  Vector follower_log_q;
  long iteration = 0;
  std::vector<double> bandwidth_history;
};

/// Leaders then followers drawn i.i.d. from q0 on one seeded stream.
EnsembleState init_ensemble(const DiagonalGaussian& q0, long n_leaders, long n_followers,
                            std::uint64_t seed);

struct StepInfo {
  long iteration = 0;  // index l of the map just applied (0-based)
  double epsilon = 0.0;
  double bandwidth = 0.0;
  bool degenerate_bandwidth = false;
  long exact_fallbacks = 0;  // followers whose approximate determinant was rejected
};

/// One transport step in place: field from the current leaders only, leaders and
/// followers moved simultaneously, and log|det(I + eps grad phi)| at each
/// follower's pre-update position subtracted from its log q.
/// Throws SingularMapError carrying the iteration and the first offending follower.
StepInfo advance(EnsembleState& state, const TargetModel& target, const KernelSpec& kernel,
                 const StepSchedule& schedule, DetMode det_mode);

/// Value-returning form of advance().
EnsembleState steinis_iterate(EnsembleState state, const TargetModel& target, const KernelSpec& kernel,
                              const StepSchedule& schedule, DetMode det_mode);

WeightedSample compute_weights(const EnsembleState& state, const TargetModel& target);

struct SteinIsOptions {
  long n_leaders = 100;
  long n_followers = 500;
  long iterations = 800;
  StepSchedule schedule{0.5, 0.5};
  KernelSpec kernel = KernelSpec::median();
  DetMode det_mode = DetMode::Auto;
  std::uint64_t seed = 1;
  long ksd_every = 0;    // KSD^2 of the followers every n iterations; 0 disables
  std::optional<KernelSpec> ksd_kernel;  // kernel of the KSD diagnostic; defaults to `kernel`
  long trace_every = 1;  // ESS and running log Z every n iterations; 0 = final state only
  std::optional<double> early_stop_ess_fraction;
  std::vector<TestFunction> test_functions;
};

struct SteinIsRun {
  RunResult result;
  EnsembleState state;
  WeightedSample sample;
};

SteinIsRun run_steinis(const SteinIsOptions& options, const DiagonalGaussian& q0, const TargetModel& target);

}  // namespace steinis
