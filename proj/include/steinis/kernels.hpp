#pragma once

#include "steinis/types.hpp"

#include <cmath>

namespace steinis {

/// RBF kernel k(x, x') = exp(-|x - x'|^2 / h) with either a fixed bandwidth or
/// the median heuristic h = med^2 / (2 log(n + 1)).
struct KernelSpec {
  enum class Policy { Fixed, MedianHeuristic };

  Policy policy = Policy::MedianHeuristic;
  double bandwidth = 1.0;  // used only when policy == Fixed

  static KernelSpec fixed(double h);
  static KernelSpec median() { return {}; }
};

struct Bandwidth {
  double h = 1.0;
  bool degenerate = false;  // all points coincided; h fell back to 1.0
};

double rbf_eval(VectorRef x, VectorRef x_prime, double h);

/// Gradient of k(x, x') with respect to x.
Vector rbf_grad_first(VectorRef x, VectorRef x_prime, double h);

/// h = med^2 / (2 ln(n_ref + 1)), med = median pairwise distance over i < j.
Bandwidth median_bandwidth(const Points& points, long n_ref);

/// Resolves a KernelSpec against the current particle set. For the median policy the
/// log term uses n_ref (the number of particles that build the field).
Bandwidth resolve_bandwidth(const KernelSpec& spec, const Points& points, long n_ref);

/// Stein kernel kappa_p(x, x') built on the RBF kernel; sx and sxp are the
/// target scores at x and x'.
double stein_kernel(VectorRef x, VectorRef x_prime, VectorRef sx, VectorRef sxp, double h);

namespace detail {

inline double squared_distance(const double* a, const double* b, long d) {
  double s = 0.0;
  for (long k = 0; k < d; ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

// Unchecked stein kernel on raw rows; shared by the serial and parallel KSD paths.
inline double stein_kernel_raw(const double* x, const double* xp, const double* sx,
                               const double* sxp, long d, double h) {
  double r2 = 0.0, ss = 0.0, sr = 0.0, spr = 0.0;
  for (long k = 0; k < d; ++k) {
    const double r = x[k] - xp[k];
    r2 += r * r;
    ss += sx[k] * sxp[k];
    sr += sx[k] * r;
    spr += sxp[k] * r;
  }
  const double kv = std::exp(-r2 / h);
  const double two_over_h = 2.0 / h;
  return kv * (ss + two_over_h * (sr - spr) + two_over_h * static_cast<double>(d) -
               two_over_h * two_over_h * r2);
}

}  // namespace detail

}  // namespace steinis
