#include "steinis/baselines.hpp"

#include "steinis/numerics.hpp"

#include <cmath>

namespace steinis {

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over (seed, index).
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

PlainIsResult plain_is(const DiagonalGaussian& q0, const TargetModel& target, long n, std::uint64_t seed) {
  if (n < 1) throw UsageError("plain_is: sample size must be positive");
  if (q0.dim() != target.dim()) throw UsageError("plain_is: q0 and target dimensions differ");
  PlainIsResult out;
  out.sample.positions.resize(n, q0.dim());
  out.sample.log_weights.resize(n);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    std::mt19937_64 rng(stream_seed(seed, static_cast<std::uint64_t>(i)));
    const Points x = q0.sample(rng, 1);
    out.sample.positions.row(i) = x.row(0);
    out.sample.log_weights[i] =
        target.log_unnormalized(x.row(0).transpose()) - q0.log_density(x.row(0).transpose());
  }
  out.log_z = estimate_log_partition(out.sample);
  return out;
}

// ---------------------------------------------------------------------------

AnnealingPath::AnnealingPath(std::vector<double> betas) : betas_(std::move(betas)) {
  if (betas_.size() < 2) throw UsageError("annealing path: need at least one transition");
  if (betas_.front() != 0.0 || betas_.back() != 1.0) {
    throw UsageError("annealing path: betas must start at 0 and end at 1");
  }
  for (std::size_t k = 1; k < betas_.size(); ++k) {
    if (!(betas_[k] > betas_[k - 1])) throw UsageError("annealing path: betas must be strictly increasing");
  }
}

AnnealingPath AnnealingPath::linear(long n_transitions) {
  if (n_transitions < 1) throw UsageError("annealing path: need at least one transition");
  std::vector<double> betas(static_cast<std::size_t>(n_transitions) + 1);
  for (long k = 0; k <= n_transitions; ++k) {
    betas[static_cast<std::size_t>(k)] = static_cast<double>(k) / static_cast<double>(n_transitions);
  }
  betas.back() = 1.0;
  return AnnealingPath(std::move(betas));
}

double AnnealedDensity::log_density(VectorRef x) const {
  return (1.0 - beta_) * q0_.log_density(x) + beta_ * target_.log_unnormalized(x);
}

Vector AnnealedDensity::gradient(VectorRef x) const {
  return (1.0 - beta_) * q0_.score(x) + beta_ * target_.score(x);
}

double AnnealedDensity::log_ratio(VectorRef x) const {
  return target_.log_unnormalized(x) - q0_.log_density(x);
}

// ---------------------------------------------------------------------------

void leapfrog(Vector& x, Vector& p, const std::function<Vector(const Vector&)>& grad_log_density,
              double step_size, long n_steps, double mass) {
  p += 0.5 * step_size * grad_log_density(x);
  for (long l = 0; l < n_steps; ++l) {
    x += (step_size / mass) * p;
    const double w = l + 1 == n_steps ? 0.5 : 1.0;
    p += w * step_size * grad_log_density(x);
  }
}

bool mala_step(Vector& x, const AnnealedDensity& density, const LangevinTransition& t, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double tau = t.step;
  const Vector gx = density.gradient(x);
  Vector y(x.size());
  const double noise = std::sqrt(2.0 * tau);
  for (long k = 0; k < x.size(); ++k) y[k] = x[k] + tau * gx[k] + noise * normal(rng);
  if (!t.metropolis) {
    if (!y.allFinite()) return false;
    x = y;
    return true;
  }

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  const double log_py = density.log_density(y);
  if (!std::isfinite(log_py)) return false;
  const Vector gy = density.gradient(y);
  const double fwd = (y - x - tau * gx).squaredNorm() / (4.0 * tau);
  const double bwd = (x - y - tau * gy).squaredNorm() / (4.0 * tau);
  const double log_accept = log_py - density.log_density(x) - bwd + fwd;
  if (std::log(u) < log_accept) {
    x = y;
    return true;
  }
  return false;
}

bool hmc_step(Vector& x, Vector& p, const AnnealedDensity& density, const HmcParams& params,
              std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double rho = params.persistence;
  const double fresh = std::sqrt(1.0 - rho * rho) * std::sqrt(params.mass);
  for (long k = 0; k < p.size(); ++k) p[k] = rho * p[k] + fresh * normal(rng);

  const double h0 = -density.log_density(x) + 0.5 * p.squaredNorm() / params.mass;
  Vector xn = x;
  Vector pn = p;
  leapfrog(xn, pn, [&](const Vector& z) { return density.gradient(z); }, params.step_size, params.n_leapfrog,
           params.mass);
  const double h1 = -density.log_density(xn) + 0.5 * pn.squaredNorm() / params.mass;

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  if (std::isfinite(h1) && xn.allFinite() && pn.allFinite() && std::log(u) < h0 - h1) {
    x = std::move(xn);
    p = std::move(pn);
    return true;
  }
  p = -p;
  return false;
}

// ---------------------------------------------------------------------------

AisResult ais_run_chains(const DiagonalGaussian& q0, const TargetModel& target, const AnnealingPath& path,
                         const Transition& transition, const std::vector<std::uint64_t>& chain_seeds) {
  const long n = static_cast<long>(chain_seeds.size());
  if (n < 1) throw UsageError("ais: need at least one chain");
  if (q0.dim() != target.dim()) throw UsageError("ais: q0 and target dimensions differ");
  if (const auto* lt = std::get_if<LangevinTransition>(&transition); lt && !(lt->step > 0.0)) {
    throw UsageError("ais: langevin step must be positive");
  }
  if (const auto* ht = std::get_if<HmcTransition>(&transition)) {
    const HmcParams& hp = ht->params;
    if (!(hp.step_size > 0.0) || !(hp.mass > 0.0) || hp.n_leapfrog < 1 || hp.persistence < 0.0 ||
        hp.persistence >= 1.0) {
      throw UsageError("ais: invalid hmc parameters");
    }
  }
  const long d = q0.dim();
  const long K = path.n_transitions();
  const auto& betas = path.betas();

  AisResult out;
  out.log_weights.resize(n);
  out.final_positions.resize(n, d);
  std::vector<std::vector<char>> accepted(static_cast<std::size_t>(n));

#pragma omp parallel for schedule(static)
  for (long c = 0; c < n; ++c) {
    std::mt19937_64 rng(chain_seeds[static_cast<std::size_t>(c)]);
    Vector x = q0.sample(rng, 1).row(0).transpose();
    Vector p = Vector::Zero(d);
    if (const auto* hmc = std::get_if<HmcTransition>(&transition)) {
      std::normal_distribution<double> normal(0.0, 1.0);
      for (long k = 0; k < d; ++k) p[k] = std::sqrt(hmc->params.mass) * normal(rng);
    }
    auto& acc = accepted[static_cast<std::size_t>(c)];
    acc.assign(static_cast<std::size_t>(K), 0);

    double log_w = 0.0;
    for (long k = 1; k <= K; ++k) {
      const double b_prev = betas[static_cast<std::size_t>(k - 1)];
      const double b_cur = betas[static_cast<std::size_t>(k)];
      const AnnealedDensity density(q0, target, b_cur);
      log_w += (b_cur - b_prev) * density.log_ratio(x);

      bool moved = false;
      if (const auto* lt = std::get_if<LangevinTransition>(&transition)) {
        moved = mala_step(x, density, *lt, rng);
      } else if (const auto* ht = std::get_if<HmcTransition>(&transition)) {
        moved = hmc_step(x, p, density, ht->params, rng);
      }
      acc[static_cast<std::size_t>(k - 1)] = moved ? 1 : 0;
    }
    out.log_weights[c] = log_w;
    out.final_positions.row(c) = x.transpose();
  }

  out.acceptance_rate.assign(static_cast<std::size_t>(K), 0.0);
  for (long c = 0; c < n; ++c) {
    for (long k = 0; k < K; ++k) {
      out.acceptance_rate[static_cast<std::size_t>(k)] += accepted[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)];
    }
  }
  for (double& a : out.acceptance_rate) a /= static_cast<double>(n);
  out.log_z = estimate_log_partition(out.log_weights);
  return out;
}

AisResult ais_run(const DiagonalGaussian& q0, const TargetModel& target, const AnnealingPath& path,
                  const Transition& transition, long n_chains, std::uint64_t seed) {
  if (n_chains < 1) throw UsageError("ais: need at least one chain");
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(n_chains));
  for (long c = 0; c < n_chains; ++c) seeds[static_cast<std::size_t>(c)] = stream_seed(seed, static_cast<std::uint64_t>(c));
  return ais_run_chains(q0, target, path, transition, seeds);
}

Transition tune_transition(const DiagonalGaussian& q0, const TargetModel& target, Transition transition,
                           double low, double high, std::uint64_t seed, long pilot_transitions,
                           long pilot_chains, long max_rounds) {
  if (std::holds_alternative<NoTransition>(transition)) return transition;
  if (!(low < high)) throw UsageError("tune_transition: empty acceptance window");

  auto step_of = [](Transition& t) -> double& {
    if (auto* lt = std::get_if<LangevinTransition>(&t)) return lt->step;
    return std::get<HmcTransition>(t).params.step_size;
  };
  if (auto* lt = std::get_if<LangevinTransition>(&transition); lt && !lt->metropolis) return transition;

  const AnnealingPath path = AnnealingPath::linear(pilot_transitions);
  double lo = 0.0, hi = 0.0;  // bracketing steps, 0 = unknown
  for (long round = 0; round < max_rounds; ++round) {
    const AisResult pilot = ais_run(q0, target, path, transition, pilot_chains, stream_seed(seed, 7919));
    double mean = 0.0;
    for (double a : pilot.acceptance_rate) mean += a;
    mean /= static_cast<double>(pilot.acceptance_rate.size());
    double& step = step_of(transition);
    if (mean >= low && mean <= high) break;
    if (mean < low) {
      hi = step;
      step = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * step;
    } else {
      lo = step;
      step = hi > 0.0 ? std::sqrt(lo * hi) : 2.0 * step;
    }
  }
  return transition;
}

}  // namespace steinis
