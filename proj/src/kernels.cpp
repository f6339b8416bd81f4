#include "steinis/kernels.hpp"

#include <algorithm>
#include <vector>

namespace steinis {

namespace {

void check_pair(VectorRef x, VectorRef x_prime, double h) {
  if (x.size() != x_prime.size()) {
    throw UsageError("rbf kernel: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                     std::to_string(x_prime.size()) + ")");
  }
  if (!(h > 0.0)) throw UsageError("rbf kernel: bandwidth must be positive");
}

}  // namespace

KernelSpec KernelSpec::fixed(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw UsageError("fixed bandwidth must be positive");
  return KernelSpec{Policy::Fixed, h};
}

double rbf_eval(VectorRef x, VectorRef x_prime, double h) {
  check_pair(x, x_prime, h);
  return std::exp(-(x - x_prime).squaredNorm() / h);
}

Vector rbf_grad_first(VectorRef x, VectorRef x_prime, double h) {
  check_pair(x, x_prime, h);
  const Vector r = x - x_prime;
  return (-2.0 / h * std::exp(-r.squaredNorm() / h)) * r;
}

Bandwidth median_bandwidth(const Points& points, long n_ref) {
  const long n = points.rows();
  if (n < 2) throw UsageError("median bandwidth needs at least two points");
  if (n_ref < 1) throw UsageError("median bandwidth: n_ref must be positive");
  const long d = points.cols();

  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (long i = 0; i < n; ++i) {
    const double* a = points.row(i).data();
    for (long j = i + 1; j < n; ++j) {
      dist.push_back(std::sqrt(std::max(0.0, detail::squared_distance(a, points.row(j).data(), d))));
    }
  }

  const std::size_t m = dist.size();
  const std::size_t mid = m / 2;
  std::nth_element(dist.begin(), dist.begin() + static_cast<long>(mid), dist.end());
  double med = dist[mid];
  if (m % 2 == 0) {
    const double lower = *std::max_element(dist.begin(), dist.begin() + static_cast<long>(mid));
    med = 0.5 * (med + lower);
  }

  if (!(med > 0.0)) {
    // Fewer than half the pairs are distinct; fall back if no pair is.
    const double largest = *std::max_element(dist.begin(), dist.end());
    if (!(largest > 0.0)) return {1.0, true};
  }
  const double h = med * med / (2.0 * std::log(static_cast<double>(n_ref) + 1.0));
  if (!(h > 0.0)) {
    // Median collapsed to zero while some pairs differ: use the smallest positive distance.
    double smallest = 0.0;
    for (double v : dist) {
      if (v > 0.0 && (smallest == 0.0 || v < smallest)) smallest = v;
    }
    return {smallest * smallest / (2.0 * std::log(static_cast<double>(n_ref) + 1.0)), false};
  }
  return {h, false};
}

Bandwidth resolve_bandwidth(const KernelSpec& spec, const Points& points, long n_ref) {
  if (spec.policy == KernelSpec::Policy::Fixed) return {spec.bandwidth, false};
  return median_bandwidth(points, n_ref);
}

double stein_kernel(VectorRef x, VectorRef x_prime, VectorRef sx, VectorRef sxp, double h) {
  check_pair(x, x_prime, h);
  if (sx.size() != x.size() || sxp.size() != x.size()) {
    throw UsageError("stein kernel: score dimension mismatch");
  }
  return detail::stein_kernel_raw(x.data(), x_prime.data(), sx.data(), sxp.data(), x.size(), h);
}

}  // namespace steinis
