#include "steinis/estimators.hpp"

#include "steinis/numerics.hpp"

namespace steinis {

namespace {

void require_finite_mass(VectorRef log_weights, const char* who) {
  if (log_weights.size() == 0) throw UsageError(std::string(who) + ": empty sample");
  const double m = log_weights.maxCoeff();
  if (!(m > -std::numeric_limits<double>::infinity()) || std::isnan(m)) {
    throw UsageError(std::string(who) + ": every importance weight is zero");
  }
  if (!std::isfinite(m)) throw UsageError(std::string(who) + ": infinite importance weight");
}

}  // namespace

double estimate_expectation(const WeightedSample& sample, VectorRef values) {
  if (values.size() != sample.log_weights.size()) throw UsageError("estimate_expectation: size mismatch");
  require_finite_mass(sample.log_weights, "estimate_expectation");
  const double m = sample.log_weights.maxCoeff();
  const Vector w = (sample.log_weights.array() - m).exp().matrix();
  return w.dot(values) / w.sum();
}

double estimate_log_partition(VectorRef log_weights) {
  require_finite_mass(log_weights, "estimate_log_partition");
  return log_sum_exp(log_weights) - std::log(static_cast<double>(log_weights.size()));
}

double estimate_log_partition(const WeightedSample& sample) {
  return estimate_log_partition(sample.log_weights);
}

double effective_sample_size(VectorRef log_weights) {
  require_finite_mass(log_weights, "effective_sample_size");
  const double m = log_weights.maxCoeff();
  const Eigen::ArrayXd w = (log_weights.array() - m).exp();
  const double s = w.sum();
  return s * s / w.square().sum();
}

Vector evaluate_log_target(const Points& points, const TargetModel& target) {
  if (points.cols() != target.dim()) throw UsageError("evaluate_log_target: dimension mismatch");
  Vector out(points.rows());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < points.rows(); ++i) out[i] = target.log_unnormalized(points.row(i).transpose());
  return out;
}

}  // namespace steinis
