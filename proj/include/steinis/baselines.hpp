#pragma once

#include "steinis/estimators.hpp"
#include "steinis/targets.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <variant>
#include <vector>

namespace steinis {

/// Seed of the i-th independent stream derived from a run seed. Plain IS and
/// AIS draw sample/chain i from this stream so the two agree draw for draw.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);

struct PlainIsResult {
  double log_z = 0.0;
  WeightedSample sample;
};

/// i.i.d. draws from q0 weighted by pbar / q0.
PlainIsResult plain_is(const DiagonalGaussian& q0, const TargetModel& target, long n, std::uint64_t seed);

/// Inverse temperatures 0 = beta_0 < ... < beta_K = 1 for the geometric path
/// log pi_beta = (1 - beta) log q0 + beta log pbar.
class AnnealingPath {
 public:
  explicit AnnealingPath(std::vector<double> betas);
  static AnnealingPath linear(long n_transitions);

  long n_transitions() const { return static_cast<long>(betas_.size()) - 1; }
  const std::vector<double>& betas() const { return betas_; }

 private:
  std::vector<double> betas_;
};

/// Intermediate density of the annealing path at a fixed beta.
class AnnealedDensity {
 public:
  AnnealedDensity(const DiagonalGaussian& q0, const TargetModel& target, double beta)
      : q0_(q0), target_(target), beta_(beta) {}

  double log_density(VectorRef x) const;
  Vector gradient(VectorRef x) const;
  /// log pbar(x) - log q0(x): the per-unit-beta weight increment.
  double log_ratio(VectorRef x) const;
  double beta() const { return beta_; }

 private:
  const DiagonalGaussian& q0_;
  const TargetModel& target_;
  double beta_;
};

struct HmcParams {
  long n_leapfrog = 1;
  double step_size = 0.1;
  double mass = 1.0;
  // Partial momentum refresh p <- rho p + sqrt(1 - rho^2) xi; 0 resamples fully.
  double persistence = 0.0;
};

struct LangevinTransition {
  double step = 0.05;       // x' = x + step * grad + sqrt(2 step) xi
  bool metropolis = true;   // false gives the unadjusted Langevin move
};

struct HmcTransition {
  HmcParams params;
};

/// No Markov move at all: AIS then collapses to importance sampling over the path.
struct NoTransition {};

using Transition = std::variant<LangevinTransition, HmcTransition, NoTransition>;

/// Leapfrog integration of L steps for potential -log pi. Positions and momenta are updated in place.
void leapfrog(Vector& x, Vector& p, const std::function<Vector(const Vector&)>& grad_log_density,
              double step_size, long n_steps, double mass);

/// One MALA step targeting `density`; returns whether the proposal was accepted.
bool mala_step(Vector& x, const AnnealedDensity& density, const LangevinTransition& t, std::mt19937_64& rng);

/// One HMC step with momentum carried in `p` (partially refreshed per params.persistence).
/// Proposals with a nonfinite energy are rejected. On rejection the momentum is negated.
bool hmc_step(Vector& x, Vector& p, const AnnealedDensity& density, const HmcParams& params,
              std::mt19937_64& rng);

struct AisResult {
  double log_z = 0.0;
  Vector log_weights;
  Points final_positions;
  std::vector<double> acceptance_rate;  // mean over chains, one entry per transition
};

AisResult ais_run(const DiagonalGaussian& q0, const TargetModel& target, const AnnealingPath& path,
                  const Transition& transition, long n_chains, std::uint64_t seed);

/// Chain c uses the stream seeded by chain_seeds[c] for its start and its moves.
AisResult ais_run_chains(const DiagonalGaussian& q0, const TargetModel& target, const AnnealingPath& path,
                         const Transition& transition, const std::vector<std::uint64_t>& chain_seeds);

/// Short pilot AIS runs that scale the transition step until the mean
/// acceptance lands in [low, high]. Returns the tuned transition.
Transition tune_transition(const DiagonalGaussian& q0, const TargetModel& target, Transition transition,
                           double low, double high, std::uint64_t seed, long pilot_transitions = 100,
                           long pilot_chains = 16, long max_rounds = 20);

}  // namespace steinis
