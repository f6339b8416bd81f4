#pragma once

#include "steinis/kernels.hpp"
#include "steinis/result.hpp"
#include "steinis/targets.hpp"
#include "steinis/transport.hpp"

#include <cstdint>
#include <vector>

namespace steinis {

/// Squared kernelized Stein discrepancy as a V-statistic (diagonal included):
///   D^2 = 1/n^2 sum_{i,j} kappa_p(x_i, x_j).
/// The median policy resolves the bandwidth against the points themselves.
double ksd_vstat(const Points& points, const TargetModel& target, const KernelSpec& kernel);

/// Same statistic with precomputed scores and bandwidth. Row sums run in
/// parallel and are reduced in index order, so the value does not depend on
/// the worker count.
double ksd_vstat(const Points& points, const Points& scores, double h);

namespace reference {

double ksd_vstat(const Points& points, const Points& scores, double h);

}  // namespace reference

struct PathIntegrationOptions {
  long n_particles = 500;
  long iterations = 1000;
  StepSchedule schedule{0.05, 0.0};
  KernelSpec kernel = KernelSpec::median();
  long n_crossentropy_samples = 100000;
  std::uint64_t seed = 1;
};

struct PathIntegrationResult {
  double kl_estimate = 0.0;     // sum_l eps_l D^2(q_l || p)
  double cross_entropy = 0.0;   // E_q0[log q0 - log pbar], Monte Carlo
  double log_z_estimate = 0.0;  // kl_estimate - cross_entropy
  double initial_ksd_squared = 0.0;
  double terminal_ksd_squared = 0.0;
  std::vector<TraceRow> trace;
};

/// Plain SVGD over all particles (no leader/follower split), accumulating the
/// KL decrease eps * D^2 along the path, then log Z = KL(q0 || p) - E_q0[log(q0 / pbar)].
PathIntegrationResult path_integration(const PathIntegrationOptions& options, const DiagonalGaussian& q0,
                                       const TargetModel& target);

/// Scores of every row.
Points evaluate_scores(const Points& points, const TargetModel& target);

}  // namespace steinis
