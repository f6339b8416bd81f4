#include "steinis/baselines.hpp"
#include "steinis/ensemble.hpp"
#include "steinis/numerics.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace steinis;

namespace {

double sample_variance(const Points& p) {
  const double m = p.col(0).mean();
  return (p.col(0).array() - m).square().sum() / static_cast<double>(p.rows() - 1);
}

}  // namespace

TEST(InitEnsemble, FollowerLogQIsGaussianDensity) {
  const DiagonalGaussian q0 = DiagonalGaussian::standard(3);
  const EnsembleState s = init_ensemble(q0, 5, 20, 7);
  for (long i = 0; i < 20; ++i) {
    const double expected = -1.5 * kLogTwoPi - 0.5 * s.followers.row(i).squaredNorm();
    EXPECT_NEAR(s.follower_log_q[i], expected, 1e-13);
  }
  EXPECT_EQ(s.iteration, 0);
}

TEST(InitEnsemble, SameSeedIsBitwiseIdentical) {
  const DiagonalGaussian q0 = DiagonalGaussian::standard(2);
  const EnsembleState a = init_ensemble(q0, 10, 30, 99), b = init_ensemble(q0, 10, 30, 99);
  EXPECT_EQ(a.leaders, b.leaders);
  EXPECT_EQ(a.followers, b.followers);
  EXPECT_EQ(a.follower_log_q, b.follower_log_q);
}

TEST(InitEnsemble, FollowerMean) {
  const EnsembleState s = init_ensemble(DiagonalGaussian::standard(1), 2, 100000, 3);
  EXPECT_LT(std::abs(s.followers.col(0).mean()), 0.02);
}

TEST(InitEnsemble, NeedsTwoLeaders) {
  EXPECT_THROW(init_ensemble(DiagonalGaussian::standard(1), 1, 10, 1), UsageError);
  EXPECT_THROW(init_ensemble(DiagonalGaussian::standard(1), 2, 0, 1), UsageError);
}

TEST(SteinIsIterate, LeaderAtOriginIsFixedPoint) {
  EnsembleState s;
  s.leaders = Points::Zero(1, 2);
  s.followers = (Points(3, 2) << 1.0, 0.5, -2.0, 0.1, 0.3, 0.3).finished();
  s.follower_log_q = Vector::Zero(3);
  const EnsembleState next = steinis_iterate(s, DiagonalGaussian::standard(2), KernelSpec::fixed(1.0),
                                             StepSchedule{0.3, 0.0}, DetMode::Exact);
  EXPECT_EQ(next.leaders, s.leaders);
  EXPECT_EQ(next.iteration, 1);
}

TEST(SteinIsIterate, ZeroStepChangesOnlyTheCounter) {
  const EnsembleState s = init_ensemble(DiagonalGaussian::standard(2), 10, 20, 4);
  const GmmTarget target = random_gmm({3, 2}, 1);
  for (DetMode mode : {DetMode::Exact, DetMode::Approx, DetMode::Auto}) {
    const EnsembleState next = steinis_iterate(s, target, KernelSpec::median(), StepSchedule{0.0, 0.0}, mode);
    EXPECT_EQ(next.leaders, s.leaders);
    EXPECT_EQ(next.followers, s.followers);
    EXPECT_EQ(next.follower_log_q, s.follower_log_q);
    EXPECT_EQ(next.iteration, 1);
  }
}

TEST(SteinIsIterate, LeadersIgnoreFollowers) {
  const DiagonalGaussian q0 = DiagonalGaussian::standard(2);
  const GmmTarget target = random_gmm({5, 2}, 2);
  EnsembleState a = init_ensemble(q0, 10, 5, 8);
  EnsembleState b = a;
  b.followers = Points::Constant(40, 2, 0.3);
  b.follower_log_q = Vector::Zero(40);
  for (int l = 0; l < 20; ++l) {
    advance(a, target, KernelSpec::median(), StepSchedule{0.2, 0.5}, DetMode::Auto);
    advance(b, target, KernelSpec::median(), StepSchedule{0.2, 0.5}, DetMode::Auto);
  }
  EXPECT_EQ(a.leaders, b.leaders);
}

TEST(SteinIsIterate, FollowersAreTransportedIndependently) {
  // A follower's trajectory does not depend on the other followers.
  const DiagonalGaussian q0 = DiagonalGaussian::standard(2);
  const GmmTarget target = random_gmm({5, 2}, 3);
  EnsembleState full = init_ensemble(q0, 10, 30, 5);
  EnsembleState single = full;
  single.followers = full.followers.topRows(1);
  single.follower_log_q = full.follower_log_q.head(1);
  for (int l = 0; l < 20; ++l) {
    advance(full, target, KernelSpec::median(), StepSchedule{0.3, 0.5}, DetMode::Exact);
    advance(single, target, KernelSpec::median(), StepSchedule{0.3, 0.5}, DetMode::Exact);
  }
  EXPECT_EQ(single.followers.row(0), full.followers.row(0));
  EXPECT_EQ(single.follower_log_q[0], full.follower_log_q[0]);
}

TEST(SteinIsIterate, SingularMapReportsIterationAndFollower) {
  // One leader at 0, h = 2: the Jacobian at 0 is 1, so a step of -1 collapses the map there.
  EnsembleState s;
  s.leaders = Points::Zero(1, 1);
  s.followers = (Points(3, 1) << 3.0, 0.0, 0.0).finished();
  s.follower_log_q = Vector::Zero(3);
  s.iteration = 4;
  try {
    advance(s, DiagonalGaussian::standard(1), KernelSpec::fixed(2.0), StepSchedule{-1.0, 0.0}, DetMode::Exact);
    FAIL() << "expected SingularMapError";
  } catch (const SingularMapError& e) {
    EXPECT_EQ(e.iteration(), 4);
    EXPECT_EQ(e.follower(), 1);
  }
}

TEST(SteinIsIterate, ConvergesToStandardNormal) {
  const DiagonalGaussian q0 = DiagonalGaussian::standard(1, 2.0);
  EnsembleState s = init_ensemble(q0, 100, 500, 11);
  const DiagonalGaussian target = DiagonalGaussian::standard(1);
  for (int l = 0; l < 500; ++l) advance(s, target, KernelSpec::median(), StepSchedule{0.5, 0.5}, DetMode::Auto);
  const double v = sample_variance(s.followers);
  EXPECT_GE(v, 0.8);
  EXPECT_LE(v, 1.25);
}

TEST(SteinIsIterate, DensityRecursionStaysNormalized) {
  // Push a fine grid through the maps; the tracked log q must integrate to one
  // over the transported grid.
  const DiagonalGaussian q0 = DiagonalGaussian::standard(1);
  const GmmTarget target = random_gmm({10, 1}, 4);
  EnsembleState s = init_ensemble(q0, 100, 1, 6);
  const long n = 20001;
  s.followers.resize(n, 1);
  s.follower_log_q.resize(n);
  for (long i = 0; i < n; ++i) {
    s.followers(i, 0) = -9.0 + 18.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    s.follower_log_q[i] = q0.log_density(s.followers.row(i).transpose());
  }
  for (int l = 0; l < 100; ++l) advance(s, target, KernelSpec::median(), StepSchedule{0.5, 0.5}, DetMode::Exact);
  double total = 0.0;
  for (long i = 1; i < n; ++i) {
    const double dy = s.followers(i, 0) - s.followers(i - 1, 0);
    ASSERT_GT(dy, 0.0) << "transport is not monotone at " << i;
    total += 0.5 * dy * (std::exp(s.follower_log_q[i]) + std::exp(s.follower_log_q[i - 1]));
  }
  EXPECT_NEAR(total, 1.0, 1e-3);
}

TEST(ComputeWeights, TargetEqualsProposal) {
  const auto q0 = std::make_shared<DiagonalGaussian>(DiagonalGaussian::standard(2));
  const EnsembleState s = init_ensemble(*q0, 4, 50, 1);
  const WeightedSample w = compute_weights(s, *q0);
  EXPECT_TRUE((w.log_weights.array() == 0.0).all());
  const ScaledTarget doubled(q0, std::log(2.0));
  const WeightedSample w2 = compute_weights(s, doubled);
  for (long i = 0; i < 50; ++i) EXPECT_NEAR(w2.log_weights[i], std::log(2.0), 1e-15);
}

TEST(ComputeWeights, GmmEffectiveSampleSize) {
  const DiagonalGaussian q0 = DiagonalGaussian::standard(1);
  const GmmTarget target = random_gmm({10, 1}, 1);
  const SteinIsOptions defaults;
  EnsembleState s = init_ensemble(q0, defaults.n_leaders, defaults.n_followers, 2);
  for (int l = 0; l < 200; ++l) advance(s, target, defaults.kernel, defaults.schedule, defaults.det_mode);
  EXPECT_GE(effective_sample_size(compute_weights(s, target)), 0.5 * static_cast<double>(defaults.n_followers));
}

TEST(RunSteinIs, ZeroIterationsIsPlainImportanceSampling) {
  const DiagonalGaussian q0 = DiagonalGaussian::standard(2);
  const GmmTarget target = random_gmm({4, 2}, 3);
  SteinIsOptions o;
  o.iterations = 0;
  o.n_leaders = 5;
  o.n_followers = 40;
  o.seed = 12;
  const SteinIsRun run = run_steinis(o, q0, target);
  const EnsembleState s = init_ensemble(q0, 5, 40, 12);
  Vector expected(40);
  for (long i = 0; i < 40; ++i) {
    const Vector x = s.followers.row(i).transpose();
    expected[i] = target.log_density(x) - q0.log_density(x);
  }
  EXPECT_EQ(run.sample.log_weights, expected);
  EXPECT_EQ(*run.result.log_z, estimate_log_partition(expected));
  EXPECT_TRUE(run.result.trace.empty());
}

TEST(RunSteinIs, DeterministicAndTraced) {
  const DiagonalGaussian q0 = DiagonalGaussian::standard(2);
  const GmmTarget target = random_gmm({4, 2}, 3);
  SteinIsOptions o;
  o.iterations = 30;
  o.n_leaders = 20;
  o.n_followers = 40;
  o.ksd_every = 10;
  o.test_functions = {TestFunction::coordinate(0)};
  const SteinIsRun a = run_steinis(o, q0, target), b = run_steinis(o, q0, target);
  EXPECT_EQ(*a.result.log_z, *b.result.log_z);
  EXPECT_EQ(a.sample.positions, b.sample.positions);
  ASSERT_EQ(a.result.trace.size(), 30u);
  EXPECT_EQ(a.result.trace[29].iteration, 30);
  EXPECT_TRUE(a.result.trace[9].ksd_squared.has_value());
  EXPECT_FALSE(a.result.trace[10].ksd_squared.has_value());
  EXPECT_EQ(a.result.estimates.size(), 1u);
}

TEST(RunSteinIs, EarlyStopOnEss) {
  const auto q0 = std::make_shared<DiagonalGaussian>(DiagonalGaussian::standard(1));
  SteinIsOptions o;
  o.iterations = 50;
  o.n_leaders = 10;
  o.n_followers = 20;
  // Finite-particle moves perturb the weights even when q0 is the target, so
  // the threshold sits below the first-step ESS rather than at |B|.
  o.early_stop_ess_fraction = 0.5;
  const SteinIsRun run = run_steinis(o, *q0, *q0);
  EXPECT_TRUE(run.result.stopped_early);
  EXPECT_EQ(run.result.iterations_run, 1);
}

TEST(RunSteinIs, RbmDefaultsLogPartitionOverSeeds) {
  const RbmTarget rbm = random_rbm(10, 10, 6);
  const DiagonalGaussian q0 = DiagonalGaussian::standard(10);
  double mean = 0.0;
  const int seeds = 100;
  for (int s = 0; s < seeds; ++s) {
    SteinIsOptions o;
    o.seed = stream_seed(400, static_cast<std::uint64_t>(s));
    o.trace_every = 0;
    mean += *run_steinis(o, q0, rbm).result.log_z / seeds;
  }
  EXPECT_NEAR(mean, rbm.exact_log_z_enumerated(), 0.2);
}
