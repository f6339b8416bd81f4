#include "steinis/discrepancy.hpp"

#include "steinis/estimators.hpp"

#include <random>

namespace steinis {

Points evaluate_scores(const Points& points, const TargetModel& target) {
  if (points.cols() != target.dim()) throw UsageError("evaluate_scores: dimension mismatch");
  Points scores(points.rows(), points.cols());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < points.rows(); ++i) scores.row(i) = target.score(points.row(i).transpose()).transpose();
  return scores;
}

double ksd_vstat(const Points& points, const Points& scores, double h) {
  const long n = points.rows();
  const long d = points.cols();
  if (n == 0) throw UsageError("ksd_vstat: no points");
  if (scores.rows() != n || scores.cols() != d) throw UsageError("ksd_vstat: scores shape mismatch");
  if (!(h > 0.0)) throw UsageError("ksd_vstat: bandwidth must be positive");

  // Symmetric kernel: row i sums the diagonal once and each j > i twice.
  Vector row_sums(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (long i = 0; i < n; ++i) {
    const double* x = points.row(i).data();
    const double* s = scores.row(i).data();
    double acc = detail::stein_kernel_raw(x, x, s, s, d, h);
    for (long j = i + 1; j < n; ++j) {
      acc += 2.0 * detail::stein_kernel_raw(x, points.row(j).data(), s, scores.row(j).data(), d, h);
    }
    row_sums[i] = acc;
  }
  double total = 0.0;
  for (long i = 0; i < n; ++i) total += row_sums[i];
  return total / (static_cast<double>(n) * static_cast<double>(n));
}

double ksd_vstat(const Points& points, const TargetModel& target, const KernelSpec& kernel) {
  if (points.rows() == 0) throw UsageError("ksd_vstat: no points");
  const double h = points.rows() < 2 && kernel.policy == KernelSpec::Policy::MedianHeuristic
                       ? 1.0
                       : resolve_bandwidth(kernel, points, points.rows()).h;
  return ksd_vstat(points, evaluate_scores(points, target), h);
}

namespace reference {

double ksd_vstat(const Points& points, const Points& scores, double h) {
  const long n = points.rows();
  double total = 0.0;
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) {
      total += stein_kernel(points.row(i).transpose(), points.row(j).transpose(), scores.row(i).transpose(),
                            scores.row(j).transpose(), h);
    }
  }
  return total / (static_cast<double>(n) * static_cast<double>(n));
}

}  // namespace reference

PathIntegrationResult path_integration(const PathIntegrationOptions& options, const DiagonalGaussian& q0,
                                       const TargetModel& target) {
  if (options.n_particles < 2) throw UsageError("path_integration: at least two particles are required");
  if (options.iterations < 0) throw UsageError("path_integration: iteration count must be nonnegative");
  if (options.n_crossentropy_samples < 1) throw UsageError("path_integration: cross-entropy sample is empty");
  if (q0.dim() != target.dim()) throw UsageError("path_integration: q0 and target dimensions differ");

  PathIntegrationResult out;
  std::mt19937_64 rng(options.seed);
  Points particles = q0.sample(rng, options.n_particles);

  // Independent q0 sample for E_q0[log q0 - log pbar].
  {
    const Points fresh = q0.sample(rng, options.n_crossentropy_samples);
    const Vector log_p = evaluate_log_target(fresh, target);
    double acc = 0.0;
    for (long i = 0; i < fresh.rows(); ++i) acc += q0.log_density(fresh.row(i).transpose()) - log_p[i];
    out.cross_entropy = acc / static_cast<double>(fresh.rows());
  }

  double kl = 0.0;
  double ksd2 = 0.0;
  for (long l = 0; l <= options.iterations; ++l) {
    const Points scores = evaluate_scores(particles, target);
    const double h = resolve_bandwidth(options.kernel, particles, particles.rows()).h;
    ksd2 = ksd_vstat(particles, scores, h);
    if (l == 0) out.initial_ksd_squared = ksd2;
    if (l == options.iterations) break;

    const double eps = options.schedule.step(l);
    kl += eps * ksd2;
    const VelocityField field(particles, scores, h);
    particles = apply_step(particles, field, eps);

    TraceRow row;
    row.iteration = l + 1;
    row.epsilon = eps;
    row.bandwidth = h;
    row.ksd_squared = ksd2;
    row.log_z_running = kl - out.cross_entropy;
    out.trace.push_back(row);
  }
  out.terminal_ksd_squared = ksd2;
  out.kl_estimate = kl;
  out.log_z_estimate = kl - out.cross_entropy;
  return out;
}

}  // namespace steinis
