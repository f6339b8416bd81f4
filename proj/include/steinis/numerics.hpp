#pragma once

#include "steinis/types.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace steinis {

inline constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

/// log(sum_i exp(v_i)); -inf for an empty or all -inf input.
inline double log_sum_exp(VectorRef v) {
  if (v.size() == 0) return -std::numeric_limits<double>::infinity();
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

/// log(e^t + e^-t) without overflow.
inline double log_two_cosh(double t) {
  const double a = std::abs(t);
  return a + std::log1p(std::exp(-2.0 * a));
}

}  // namespace steinis
