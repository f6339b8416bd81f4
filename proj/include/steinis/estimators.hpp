#pragma once

#include "steinis/targets.hpp"
#include "steinis/types.hpp"

namespace steinis {

/// Importance sample with log w_i = log pbar(x_i) - log q(x_i).
struct WeightedSample {
  Points positions;
  Vector log_weights;
};

/// Self-normalized estimate sum w_i f_i / sum w_i, computed via a softmax of the log weights.
double estimate_expectation(const WeightedSample& sample, VectorRef values);

/// log Zhat = logsumexp(log w) - log n. Zhat itself is unbiased; log Zhat is not.
double estimate_log_partition(const WeightedSample& sample);
double estimate_log_partition(VectorRef log_weights);

/// (sum w)^2 / sum w^2, in [1, n].
double effective_sample_size(VectorRef log_weights);
inline double effective_sample_size(const WeightedSample& sample) {
  return effective_sample_size(sample.log_weights);
}

/// log pbar at each row.
Vector evaluate_log_target(const Points& points, const TargetModel& target);

}  // namespace steinis
