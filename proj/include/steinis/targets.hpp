#pragma once

#include "steinis/types.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace steinis {

/// Unnormalized density p(x) = pbar(x) / Z, exposed through log pbar and its gradient.
class TargetModel {
 public:
  virtual ~TargetModel() = default;

  virtual long dim() const = 0;
  virtual double log_unnormalized(VectorRef x) const = 0;
  virtual Vector score(VectorRef x) const = 0;

  /// Exact log Z when the target has a closed-form or enumerable normalizer.
  virtual std::optional<double> exact_log_z() const { return std::nullopt; }
};

using TargetPtr = std::shared_ptr<const TargetModel>;

/// Diagonal Gaussian N(mean, diag(stddev^2)). Serves as the initial proposal q0
/// and, being normalized, as a target with log Z = 0.
class DiagonalGaussian final : public TargetModel {
 public:
  DiagonalGaussian(Vector mean, Vector stddev);
  static DiagonalGaussian standard(long d, double stddev = 1.0);

  long dim() const override { return mean_.size(); }
  double log_unnormalized(VectorRef x) const override { return log_density(x); }
  Vector score(VectorRef x) const override;
  std::optional<double> exact_log_z() const override { return 0.0; }

  double log_density(VectorRef x) const;
  Points sample(std::mt19937_64& rng, long n) const;

  const Vector& mean() const { return mean_; }
  const Vector& stddev() const { return stddev_; }

 private:
  Vector mean_;
  Vector stddev_;
  double log_norm_;
};

/// pbar(x) = exp(log_scale) * base_pbar(x). Scores are those of the base target.
class ScaledTarget final : public TargetModel {
 public:
  ScaledTarget(TargetPtr base, double log_scale);

  long dim() const override { return base_->dim(); }
  double log_unnormalized(VectorRef x) const override {
    return base_->log_unnormalized(x) + log_scale_;
  }
  Vector score(VectorRef x) const override { return base_->score(x); }
  std::optional<double> exact_log_z() const override;

 private:
  TargetPtr base_;
  double log_scale_;
};

// ---------------------------------------------------------------------------
// Gaussian mixtures

/// Scalar test functions with closed-form mixture expectations.
class TestFunction {
 public:
  enum class Kind { Coordinate, SquaredCoordinate, Cosine };

  static TestFunction coordinate(long j) { return {Kind::Coordinate, j, 0.0, 0.0}; }
  static TestFunction squared_coordinate(long j) { return {Kind::SquaredCoordinate, j, 0.0, 0.0}; }
  static TestFunction cosine(long j, double w, double b) { return {Kind::Cosine, j, w, b}; }

  double operator()(VectorRef x) const;
  Vector evaluate(const Points& xs) const;
  std::string name() const;

  Kind kind;
  long j;
  double w;
  double b;
};

/// Normalized Gaussian mixture (Z = 1) with full SPD covariances.
class GmmTarget final : public TargetModel {
 public:
  GmmTarget(Vector weights, Matrix means, std::vector<Matrix> covariances);

  /// sigmas[k] is the isotropic standard deviation of component k.
  static GmmTarget isotropic(Vector weights, Matrix means, const Vector& sigmas);

  long dim() const override { return means_.cols(); }
  double log_unnormalized(VectorRef x) const override { return log_density(x); }
  Vector score(VectorRef x) const override;
  std::optional<double> exact_log_z() const override { return 0.0; }

  double log_density(VectorRef x) const;
  double exact_expectation(const TestFunction& f) const;
  Points sample(std::mt19937_64& rng, long n) const;

  long components() const { return weights_.size(); }
  const Vector& weights() const { return weights_; }
  const Matrix& means() const { return means_; }
  const std::vector<Matrix>& covariances() const { return covariances_; }

 private:
  // log pi_k + log N(x; mu_k, Sigma_k) for every component, plus Sigma_k^{-1}(x - mu_k).
  void component_terms(VectorRef x, Vector& log_terms, Matrix* precision_times_diff) const;

  Vector weights_;
  Matrix means_;  // m x d
  std::vector<Matrix> covariances_;
  std::vector<Matrix> precisions_;
  std::vector<Matrix> chol_lower_;
  Vector log_const_;  // log pi_k - d/2 log 2pi - 1/2 log det Sigma_k
};

/// Parameters of the seeded random mixture generator.
struct RandomGmmOptions {
  long components = 10;
  long dim = 2;
  double mean_half_width = 2.0;  // means ~ U[-w, w]^d
  double sigma_min = 0.4;        // isotropic sigma ~ U[sigma_min, sigma_max]
  double sigma_max = 0.8;
  double weight_min = 0.5;  // weights proportional to U[weight_min, weight_max]
  double weight_max = 1.5;
};

GmmTarget random_gmm(const RandomGmmOptions& options, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Gauss-Bernoulli RBM with hidden units in {-1, +1}, marginalized over h:
//   log pbar(x) = b'x - |x|^2/2 + sum_i log(2 cosh(phi_i)),  phi = B'x + c.

class RbmTarget final : public TargetModel {
 public:
  static constexpr long kMaxEnumerableHidden = 25;

  RbmTarget(Matrix coupling, Vector visible_bias, Vector hidden_bias);

  long dim() const override { return coupling_.rows(); }
  long hidden() const { return coupling_.cols(); }
  double log_unnormalized(VectorRef x) const override;
  Vector score(VectorRef x) const override;
  std::optional<double> exact_log_z() const override;

  /// Brute-force log Z over all 2^hidden hidden configurations.
  double exact_log_z_enumerated() const;

  const Matrix& coupling() const { return coupling_; }
  const Vector& visible_bias() const { return b_; }
  const Vector& hidden_bias() const { return c_; }

 private:
  Matrix coupling_;  // d x d'
  Vector b_;
  Vector c_;
};

/// b, c ~ N(0, 1); coupling entries are independent fair signs of magnitude 0.5.
RbmTarget random_rbm(long visible, long hidden, std::uint64_t seed);

/// Reads "d d'" on the first line, then the d x d' coupling matrix row-major.
/// Optional further d values of b and d' values of c; zero when absent.
RbmTarget load_rbm(const std::string& path);

// ---------------------------------------------------------------------------
// Pushforward of a 2D mixture through T(z) = [a1 z1 + b1, a2 z1^2 + a3 z2 + b2].

struct QuadraticWarp {
  double a1 = 1.0;
  double a2 = 0.0;
  double a3 = 1.0;
  double b1 = 0.0;
  double b2 = 0.0;

  Vector forward(VectorRef z) const;
  Vector inverse(VectorRef x) const;
};

class TransformedGmmTarget final : public TargetModel {
 public:
  TransformedGmmTarget(GmmTarget base, QuadraticWarp warp);

  /// Our default instance: three isotropic components warped into a banana shape.
  static TransformedGmmTarget default_instance();

  long dim() const override { return 2; }
  double log_unnormalized(VectorRef x) const override { return log_density(x); }
  Vector score(VectorRef x) const override;
  std::optional<double> exact_log_z() const override { return 0.0; }

  double log_density(VectorRef x) const;
  const GmmTarget& base() const { return base_; }
  const QuadraticWarp& warp() const { return warp_; }

 private:
  GmmTarget base_;
  QuadraticWarp warp_;
  double log_abs_jacobian_;
};

}  // namespace steinis
