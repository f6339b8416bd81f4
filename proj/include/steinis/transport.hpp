#pragma once

#include "steinis/targets.hpp"
#include "steinis/types.hpp"

#include <optional>

namespace steinis {

/// epsilon_l = alpha / (1 + l)^beta.
struct StepSchedule {
  double alpha = 0.1;
  double beta = 0.0;

  double step(long iteration) const;
};

/// Jacobian log-determinant strategy. Auto uses the diagonal approximation when
/// epsilon <= kApproxThreshold and the exact factorization otherwise.
enum class DetMode { Exact, Approx, Auto };

inline constexpr double kApproxThreshold = 0.1;

/// Empirical SVGD velocity field built from a frozen particle snapshot:
///   phi(y) = 1/n sum_j [ s(x_j) k(x_j, y) + grad_{x_j} k(x_j, y) ].
class VelocityField {
 public:
  VelocityField(Points sources, Points source_scores, double bandwidth);

  /// Scores the sources against `target` (one score evaluation per source).
  static VelocityField build(const Points& sources, const TargetModel& target, double bandwidth);

  long dim() const { return sources_.cols(); }
  long size() const { return sources_.rows(); }
  double bandwidth() const { return h_; }
  const Points& sources() const { return sources_; }
  const Points& scores() const { return scores_; }

  Vector eval(VectorRef y) const;
  /// d phi_a / d y_b in closed form.
  Matrix jacobian(VectorRef y) const;
  Vector jacobian_diagonal(VectorRef y) const;

  // Fused single pass over the sources. `velocity` has d entries; `jac` is a
  // column-major d x d buffer (full) or d entries (diagonal only).
  void eval_fused(const double* y, double* velocity, double* jac, bool full_jacobian) const;

 private:
  Points sources_;
  Points scores_;
  double h_;
};

/// Moves every row y to y + eps * phi(y). Rows are processed in parallel.
Points apply_step(const Points& points, const VelocityField& field, double eps);

/// log |det(I + eps J)| from a partial-pivot LU. Throws SingularMapError when a
/// pivot vanishes.
double log_det_exact(const Matrix& jacobian, double eps);

/// sum_k log(1 + eps a_kk); nullopt when some factor is not positive, which
/// signals a fallback to the exact determinant.
std::optional<double> log_det_approx(VectorRef jacobian_diagonal, double eps);

/// Whether `mode` asks for the diagonal approximation at this step size.
bool uses_approximation(DetMode mode, double eps);

/// Serial implementations kept as test oracles and benchmark baselines.
namespace reference {

Vector velocity(const VelocityField& field, VectorRef y);
Points apply_step(const Points& points, const VelocityField& field, double eps);

}  // namespace reference

}  // namespace steinis
