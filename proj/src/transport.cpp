#include "steinis/transport.hpp"

#include "steinis/kernels.hpp"

#include <cmath>
#include <string>

namespace steinis {

double StepSchedule::step(long iteration) const {
  return alpha / std::pow(1.0 + static_cast<double>(iteration), beta);
}

VelocityField::VelocityField(Points sources, Points source_scores, double bandwidth)
    : sources_(std::move(sources)), scores_(std::move(source_scores)), h_(bandwidth) {
  if (sources_.rows() == 0) throw UsageError("velocity field: no source particles");
  if (scores_.rows() != sources_.rows() || scores_.cols() != sources_.cols()) {
    throw UsageError("velocity field: scores must match the sources in shape");
  }
  if (!(h_ > 0.0)) throw UsageError("velocity field: bandwidth must be positive");
}

VelocityField VelocityField::build(const Points& sources, const TargetModel& target, double bandwidth) {
  if (sources.cols() != target.dim()) throw UsageError("velocity field: target dimension mismatch");
  Points scores(sources.rows(), sources.cols());
  for (long j = 0; j < sources.rows(); ++j) scores.row(j) = target.score(sources.row(j).transpose()).transpose();
  return VelocityField(sources, std::move(scores), bandwidth);
}

void VelocityField::eval_fused(const double* y, double* velocity, double* jac, bool full_jacobian) const {
  const long d = dim();
  const long n = size();
  const double two_over_h = 2.0 / h_;
  const double four_over_h2 = two_over_h * two_over_h;

  for (long a = 0; a < d; ++a) velocity[a] = 0.0;
  if (jac) {
    const long len = full_jacobian ? d * d : d;
    for (long t = 0; t < len; ++t) jac[t] = 0.0;
  }

  double kernel_sum = 0.0;
  double r[64];
  Vector r_heap;
  double* rv = r;
  if (d > 64) {
    r_heap.resize(d);
    rv = r_heap.data();
  }

  for (long j = 0; j < n; ++j) {
    const double* x = sources_.row(j).data();
    const double* s = scores_.row(j).data();
    double r2 = 0.0;
    for (long a = 0; a < d; ++a) {
      rv[a] = x[a] - y[a];
      r2 += rv[a] * rv[a];
    }
    const double k = std::exp(-r2 / h_);
    kernel_sum += k;
    // s k + grad_x k, with grad_x k(x, y) = -(2/h)(x - y) k.
    for (long a = 0; a < d; ++a) velocity[a] += k * (s[a] - two_over_h * rv[a]);

    if (!jac) continue;
    if (full_jacobian) {
      // (2/h) k s r^T - (4/h^2) k r r^T; the (2/h) k I term is added once below.
      for (long b = 0; b < d; ++b) {
        const double kb = k * rv[b];
        double* col = jac + b * d;
        for (long a = 0; a < d; ++a) col[a] += kb * (two_over_h * s[a] - four_over_h2 * rv[a]);
      }
    } else {
      for (long a = 0; a < d; ++a) jac[a] += k * rv[a] * (two_over_h * s[a] - four_over_h2 * rv[a]);
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  for (long a = 0; a < d; ++a) velocity[a] *= inv_n;
  if (jac) {
    const double diag = two_over_h * kernel_sum;
    if (full_jacobian) {
      for (long t = 0; t < d * d; ++t) jac[t] *= inv_n;
      for (long a = 0; a < d; ++a) jac[a * d + a] += diag * inv_n;
    } else {
      for (long a = 0; a < d; ++a) jac[a] = (jac[a] + diag) * inv_n;
    }
  }
}

Vector VelocityField::eval(VectorRef y) const {
  if (y.size() != dim()) throw UsageError("velocity field: dimension mismatch");
  Vector v(dim());
  eval_fused(y.data(), v.data(), nullptr, false);
  return v;
}

Matrix VelocityField::jacobian(VectorRef y) const {
  if (y.size() != dim()) throw UsageError("velocity field: dimension mismatch");
  Vector v(dim());
  Matrix jac(dim(), dim());
  eval_fused(y.data(), v.data(), jac.data(), true);
  return jac;
}

Vector VelocityField::jacobian_diagonal(VectorRef y) const {
  if (y.size() != dim()) throw UsageError("velocity field: dimension mismatch");
  Vector v(dim());
  Vector diag(dim());
  eval_fused(y.data(), v.data(), diag.data(), false);
  return diag;
}

Points apply_step(const Points& points, const VelocityField& field, double eps) {
  if (points.cols() != field.dim()) throw UsageError("apply_step: dimension mismatch");
  const long n = points.rows();
  const long d = points.cols();
  Points out(n, d);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    field.eval_fused(points.row(i).data(), out.row(i).data(), nullptr, false);
    for (long a = 0; a < d; ++a) out(i, a) = points(i, a) + eps * out(i, a);
  }
  return out;
}

double log_det_exact(const Matrix& jacobian, double eps) {
  if (jacobian.rows() != jacobian.cols()) throw UsageError("log_det_exact: jacobian must be square");
  const long d = jacobian.rows();
  const Matrix m = Matrix::Identity(d, d) + eps * jacobian;
  const Eigen::PartialPivLU<Matrix> lu(m);
  const auto& packed = lu.matrixLU();
  double s = 0.0;
  for (long k = 0; k < d; ++k) {
    const double u = std::abs(packed(k, k));
    if (!(u > 0.0) || !std::isfinite(u)) {
      throw SingularMapError(-1, -1, "I + eps*J is singular at eps = " + std::to_string(eps) +
                                         "; the step size is too large for an invertible map");
    }
    s += std::log(u);
  }
  return s;
}

std::optional<double> log_det_approx(VectorRef jacobian_diagonal, double eps) {
  double s = 0.0;
  for (long k = 0; k < jacobian_diagonal.size(); ++k) {
    const double f = 1.0 + eps * jacobian_diagonal[k];
    if (!(f > 0.0)) return std::nullopt;
    s += std::log(f);
  }
  return s;
}

bool uses_approximation(DetMode mode, double eps) {
  switch (mode) {
    case DetMode::Exact:
      return false;
    case DetMode::Approx:
      return true;
    case DetMode::Auto:
      return eps <= kApproxThreshold;
  }
  return false;
}

namespace reference {

Vector velocity(const VelocityField& field, VectorRef y) {
  const double h = field.bandwidth();
  Vector acc = Vector::Zero(field.dim());
  for (long j = 0; j < field.size(); ++j) {
    const Vector x = field.sources().row(j).transpose();
    const Vector s = field.scores().row(j).transpose();
    acc += s * rbf_eval(x, y, h) + rbf_grad_first(x, y, h);
  }
  return acc / static_cast<double>(field.size());
}

Points apply_step(const Points& points, const VelocityField& field, double eps) {
  Points out(points.rows(), points.cols());
  for (long i = 0; i < points.rows(); ++i) {
    const Vector y = points.row(i).transpose();
    out.row(i) = (y + eps * velocity(field, y)).transpose();
  }
  return out;
}

}  // namespace reference

}  // namespace steinis
