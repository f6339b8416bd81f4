#include "steinis/targets.hpp"

#include "steinis/numerics.hpp"

#include <bit>
#include <fstream>
#include <sstream>

namespace steinis {

// ---------------------------------------------------------------------------
// DiagonalGaussian

DiagonalGaussian::DiagonalGaussian(Vector mean, Vector stddev)
    : mean_(std::move(mean)), stddev_(std::move(stddev)) {
  if (mean_.size() == 0 || mean_.size() != stddev_.size()) {
    throw UsageError("gaussian: mean and stddev must be non-empty and the same length");
  }
  if ((stddev_.array() <= 0.0).any()) throw UsageError("gaussian: stddev must be positive");
  log_norm_ = -0.5 * static_cast<double>(mean_.size()) * kLogTwoPi - stddev_.array().log().sum();
}

DiagonalGaussian DiagonalGaussian::standard(long d, double stddev) {
  return DiagonalGaussian(Vector::Zero(d), Vector::Constant(d, stddev));
}

double DiagonalGaussian::log_density(VectorRef x) const {
  if (x.size() != mean_.size()) throw UsageError("gaussian: dimension mismatch");
  return log_norm_ - 0.5 * ((x - mean_).array() / stddev_.array()).square().sum();
}

Vector DiagonalGaussian::score(VectorRef x) const {
  if (x.size() != mean_.size()) throw UsageError("gaussian: dimension mismatch");
  return -((x - mean_).array() / stddev_.array().square()).matrix();
}

Points DiagonalGaussian::sample(std::mt19937_64& rng, long n) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Points out(n, dim());
  for (long i = 0; i < n; ++i) {
    for (long k = 0; k < dim(); ++k) out(i, k) = mean_[k] + stddev_[k] * normal(rng);
  }
  return out;
}

// ---------------------------------------------------------------------------
// ScaledTarget

ScaledTarget::ScaledTarget(TargetPtr base, double log_scale)
    : base_(std::move(base)), log_scale_(log_scale) {
  if (!base_) throw UsageError("scaled target: null base");
  if (!std::isfinite(log_scale_)) throw UsageError("scaled target: log scale must be finite");
}

std::optional<double> ScaledTarget::exact_log_z() const {
  const auto base = base_->exact_log_z();
  if (!base) return std::nullopt;
  return *base + log_scale_;
}

// ---------------------------------------------------------------------------
// TestFunction

double TestFunction::operator()(VectorRef x) const {
  if (j < 0 || j >= x.size()) throw UsageError("test function: coordinate out of range");
  switch (kind) {
    case Kind::Coordinate:
      return x[j];
    case Kind::SquaredCoordinate:
      return x[j] * x[j];
    case Kind::Cosine:
      return std::cos(w * x[j] + b);
  }
  return 0.0;
}

Vector TestFunction::evaluate(const Points& xs) const {
  Vector out(xs.rows());
  for (long i = 0; i < xs.rows(); ++i) out[i] = (*this)(xs.row(i).transpose());
  return out;
}

std::string TestFunction::name() const {
  switch (kind) {
    case Kind::Coordinate:
      return "x" + std::to_string(j + 1);
    case Kind::SquaredCoordinate:
      return "x" + std::to_string(j + 1) + "^2";
    case Kind::Cosine:
      return "cos(w*x" + std::to_string(j + 1) + "+b)";
  }
  return {};
}

// ---------------------------------------------------------------------------
// GmmTarget

GmmTarget::GmmTarget(Vector weights, Matrix means, std::vector<Matrix> covariances)
    : weights_(std::move(weights)), means_(std::move(means)), covariances_(std::move(covariances)) {
  const long m = weights_.size();
  const long d = means_.cols();
  if (m == 0 || means_.rows() != m || static_cast<long>(covariances_.size()) != m || d == 0) {
    throw UsageError("gmm: weights, means and covariances disagree on the component count");
  }
  if ((weights_.array() < 0.0).any() || std::abs(weights_.sum() - 1.0) > 1e-12) {
    throw UsageError("gmm: weights must lie on the simplex");
  }
  log_const_.resize(m);
  for (long k = 0; k < m; ++k) {
    const Matrix& cov = covariances_[static_cast<std::size_t>(k)];
    if (cov.rows() != d || cov.cols() != d) throw UsageError("gmm: covariance has wrong shape");
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) throw UsageError("gmm: covariance is not SPD");
    Matrix lower = llt.matrixL();
    const double log_det = 2.0 * lower.diagonal().array().log().sum();
    chol_lower_.push_back(lower);
    precisions_.push_back(llt.solve(Matrix::Identity(d, d)));
    log_const_[k] = std::log(weights_[k]) - 0.5 * static_cast<double>(d) * kLogTwoPi - 0.5 * log_det;
  }
}

GmmTarget GmmTarget::isotropic(Vector weights, Matrix means, const Vector& sigmas) {
  if (sigmas.size() != weights.size()) throw UsageError("gmm: one sigma per component required");
  const long d = means.cols();
  std::vector<Matrix> covs;
  for (long k = 0; k < sigmas.size(); ++k) {
    covs.push_back(Matrix::Identity(d, d) * sigmas[k] * sigmas[k]);
  }
  return GmmTarget(std::move(weights), std::move(means), std::move(covs));
}

void GmmTarget::component_terms(VectorRef x, Vector& log_terms, Matrix* precision_times_diff) const {
  if (x.size() != dim()) throw UsageError("gmm: dimension mismatch");
  const long m = components();
  log_terms.resize(m);
  if (precision_times_diff) precision_times_diff->resize(dim(), m);
  for (long k = 0; k < m; ++k) {
    const Vector diff = x - means_.row(k).transpose();
    const Vector pd = precisions_[static_cast<std::size_t>(k)] * diff;
    log_terms[k] = log_const_[k] - 0.5 * diff.dot(pd);
    if (precision_times_diff) precision_times_diff->col(k) = pd;
  }
}

double GmmTarget::log_density(VectorRef x) const {
  Vector terms;
  component_terms(x, terms, nullptr);
  return log_sum_exp(terms);
}

Vector GmmTarget::score(VectorRef x) const {
  Vector terms;
  Matrix pd;
  component_terms(x, terms, &pd);
  const double lse = log_sum_exp(terms);
  const Vector resp = (terms.array() - lse).exp().matrix();
  return -(pd * resp);
}

double GmmTarget::exact_expectation(const TestFunction& f) const {
  if (f.j < 0 || f.j >= dim()) throw UsageError("gmm: test function coordinate out of range");
  double total = 0.0;
  for (long k = 0; k < components(); ++k) {
    const double mu = means_(k, f.j);
    const double var = covariances_[static_cast<std::size_t>(k)](f.j, f.j);
    double v = 0.0;
    switch (f.kind) {
      case TestFunction::Kind::Coordinate:
        v = mu;
        break;
      case TestFunction::Kind::SquaredCoordinate:
        v = var + mu * mu;
        break;
      case TestFunction::Kind::Cosine:
        v = std::exp(-0.5 * f.w * f.w * var) * std::cos(f.w * mu + f.b);
        break;
    }
    total += weights_[k] * v;
  }
  return total;
}

Points GmmTarget::sample(std::mt19937_64& rng, long n) const {
  std::discrete_distribution<long> pick(weights_.data(), weights_.data() + weights_.size());
  std::normal_distribution<double> normal(0.0, 1.0);
  Points out(n, dim());
  Vector z(dim());
  for (long i = 0; i < n; ++i) {
    const long k = pick(rng);
    for (long t = 0; t < dim(); ++t) z[t] = normal(rng);
    out.row(i) = (means_.row(k).transpose() + chol_lower_[static_cast<std::size_t>(k)] * z).transpose();
  }
  return out;
}

GmmTarget random_gmm(const RandomGmmOptions& o, std::uint64_t seed) {
  if (o.components < 1 || o.dim < 1) throw UsageError("random gmm: sizes must be positive");
  if (!(o.sigma_min > 0.0) || o.sigma_max < o.sigma_min) throw UsageError("random gmm: bad sigma range");
  if (!(o.weight_min > 0.0) || o.weight_max < o.weight_min) throw UsageError("random gmm: bad weight range");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mean_dist(-o.mean_half_width, o.mean_half_width);
  std::uniform_real_distribution<double> sigma_dist(o.sigma_min, o.sigma_max);
  std::uniform_real_distribution<double> weight_dist(o.weight_min, o.weight_max);

  Vector weights(o.components);
  Matrix means(o.components, o.dim);
  Vector sigmas(o.components);
  for (long k = 0; k < o.components; ++k) {
    weights[k] = weight_dist(rng);
    for (long t = 0; t < o.dim; ++t) means(k, t) = mean_dist(rng);
    sigmas[k] = sigma_dist(rng);
  }
  weights /= weights.sum();
  // Re-normalize so the simplex check holds to the last bit.
  weights[o.components - 1] = 1.0 - (weights.sum() - weights[o.components - 1]);
  return GmmTarget::isotropic(std::move(weights), std::move(means), sigmas);
}

// ---------------------------------------------------------------------------
// RbmTarget

RbmTarget::RbmTarget(Matrix coupling, Vector visible_bias, Vector hidden_bias)
    : coupling_(std::move(coupling)), b_(std::move(visible_bias)), c_(std::move(hidden_bias)) {
  if (coupling_.rows() == 0 || coupling_.cols() == 0) throw UsageError("rbm: empty coupling matrix");
  if (b_.size() != coupling_.rows() || c_.size() != coupling_.cols()) {
    throw UsageError("rbm: bias lengths must match the coupling matrix");
  }
}

double RbmTarget::log_unnormalized(VectorRef x) const {
  if (x.size() != dim()) throw UsageError("rbm: dimension mismatch");
  const Vector phi = coupling_.transpose() * x + c_;
  double s = b_.dot(x) - 0.5 * x.squaredNorm();
  for (long i = 0; i < phi.size(); ++i) s += log_two_cosh(phi[i]);
  return s;
}

Vector RbmTarget::score(VectorRef x) const {
  if (x.size() != dim()) throw UsageError("rbm: dimension mismatch");
  const Vector phi = coupling_.transpose() * x + c_;
  return b_ - x + coupling_ * phi.array().tanh().matrix();
}

std::optional<double> RbmTarget::exact_log_z() const {
  if (hidden() > kMaxEnumerableHidden) return std::nullopt;
  return exact_log_z_enumerated();
}

double RbmTarget::exact_log_z_enumerated() const {
  const long dh = hidden();
  if (dh > kMaxEnumerableHidden) {
    throw UsageError("rbm: exact log Z needs at most " + std::to_string(kMaxEnumerableHidden) +
                     " hidden units, got " + std::to_string(dh));
  }
  // Each h contributes the Gaussian integral exp(c'h + |b + Bh|^2 / 2) (2 pi)^{d/2}.
  // Walk the hypercube in Gray-code order so each step flips a single unit.
  Vector h = Vector::Constant(dh, -1.0);
  Vector v = b_ + coupling_ * h;
  double ch = c_.dot(h);
  const std::uint64_t count = std::uint64_t{1} << dh;

  // Streaming log-sum-exp.
  double running_max = -std::numeric_limits<double>::infinity();
  double running_sum = 0.0;
  auto accumulate = [&](double term) {
    if (term <= running_max) {
      running_sum += std::exp(term - running_max);
    } else {
      running_sum = running_sum * std::exp(running_max - term) + 1.0;
      running_max = term;
    }
  };

  accumulate(ch + 0.5 * v.squaredNorm());
  for (std::uint64_t g = 1; g < count; ++g) {
    const int bit = std::countr_zero(g);
    const double delta = -2.0 * h[bit];  // new value minus old value
    h[bit] += delta;
    v += delta * coupling_.col(bit);
    ch += delta * c_[bit];
    accumulate(ch + 0.5 * v.squaredNorm());
  }
  return 0.5 * static_cast<double>(dim()) * kLogTwoPi + running_max + std::log(running_sum);
}

RbmTarget random_rbm(long visible, long hidden, std::uint64_t seed) {
  if (visible < 1 || hidden < 1) throw UsageError("random rbm: sizes must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  Vector b(visible), c(hidden);
  for (long i = 0; i < visible; ++i) b[i] = normal(rng);
  for (long i = 0; i < hidden; ++i) c[i] = normal(rng);
  Matrix coupling(visible, hidden);
  for (long i = 0; i < visible; ++i) {
    for (long j = 0; j < hidden; ++j) coupling(i, j) = coin(rng) ? 0.5 : -0.5;
  }
  return RbmTarget(std::move(coupling), std::move(b), std::move(c));
}

RbmTarget load_rbm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("rbm: cannot open " + path);
  std::string header;
  if (!std::getline(in, header)) throw UsageError("rbm: missing header line in " + path);
  std::istringstream hs(header);
  long d = 0, dh = 0;
  if (!(hs >> d >> dh) || d < 1 || dh < 1) throw UsageError("rbm: header must be \"d d'\"");

  std::vector<double> values;
  double v = 0.0;
  while (in >> v) values.push_back(v);
  if (!in.eof()) throw UsageError("rbm: non-numeric entry in " + path);

  const auto need = static_cast<std::size_t>(d * dh);
  if (values.size() < need) throw UsageError("rbm: expected " + std::to_string(need) + " coupling values");
  Matrix coupling(d, dh);
  for (long i = 0; i < d; ++i) {
    for (long j = 0; j < dh; ++j) coupling(i, j) = values[static_cast<std::size_t>(i * dh + j)];
  }
  Vector b = Vector::Zero(d), c = Vector::Zero(dh);
  const std::size_t rest = values.size() - need;
  if (rest == static_cast<std::size_t>(d + dh)) {
    for (long i = 0; i < d; ++i) b[i] = values[need + static_cast<std::size_t>(i)];
    for (long j = 0; j < dh; ++j) c[j] = values[need + static_cast<std::size_t>(d + j)];
  } else if (rest != 0) {
    throw UsageError("rbm: trailing values must be exactly d + d' biases");
  }
  return RbmTarget(std::move(coupling), std::move(b), std::move(c));
}

// ---------------------------------------------------------------------------
// TransformedGmmTarget

Vector QuadraticWarp::forward(VectorRef z) const {
  Vector x(2);
  x[0] = a1 * z[0] + b1;
  x[1] = a2 * z[0] * z[0] + a3 * z[1] + b2;
  return x;
}

Vector QuadraticWarp::inverse(VectorRef x) const {
  Vector z(2);
  z[0] = (x[0] - b1) / a1;
  z[1] = (x[1] - a2 * z[0] * z[0] - b2) / a3;
  return z;
}

TransformedGmmTarget::TransformedGmmTarget(GmmTarget base, QuadraticWarp warp)
    : base_(std::move(base)), warp_(warp) {
  if (base_.dim() != 2) throw UsageError("transformed gmm: base mixture must be 2D");
  if (warp_.a1 == 0.0 || warp_.a3 == 0.0) throw UsageError("transformed gmm: a1 and a3 must be nonzero");
  log_abs_jacobian_ = std::log(std::abs(warp_.a1 * warp_.a3));
}

TransformedGmmTarget TransformedGmmTarget::default_instance() {
  Vector weights(3);
  weights << 0.3, 0.4, 0.3;
  Matrix means(3, 2);
  means << -1.5, 0.0, 0.0, 0.5, 1.5, 0.0;
  Vector sigmas = Vector::Constant(3, 0.6);
  QuadraticWarp warp{1.0, 0.4, 1.0, 0.0, -1.0};
  return TransformedGmmTarget(GmmTarget::isotropic(weights, means, sigmas), warp);
}

double TransformedGmmTarget::log_density(VectorRef x) const {
  if (x.size() != 2) throw UsageError("transformed gmm: dimension mismatch");
  return base_.log_density(warp_.inverse(x)) - log_abs_jacobian_;
}

Vector TransformedGmmTarget::score(VectorRef x) const {
  if (x.size() != 2) throw UsageError("transformed gmm: dimension mismatch");
  const Vector z = warp_.inverse(x);
  const Vector g = base_.score(z);
  // Chain rule through the inverse map: grad_x = (dz/dx)^T grad_z.
  Vector s(2);
  s[0] = g[0] / warp_.a1 - g[1] * 2.0 * warp_.a2 * z[0] / (warp_.a1 * warp_.a3);
  s[1] = g[1] / warp_.a3;
  return s;
}

}  // namespace steinis
