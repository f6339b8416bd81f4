// Parallel kernels against their serial references.

#include "steinis/discrepancy.hpp"
#include "steinis/targets.hpp"
#include "steinis/transport.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace steinis;

struct Fixture {
  Points leaders;
  Points followers;
  Points scores;
  double h;

  Fixture(long n_leaders, long n_followers, long d) {
    const GmmTarget target = random_gmm({10, d}, 3);
    std::mt19937_64 rng(11);
    const DiagonalGaussian q0 = DiagonalGaussian::standard(d);
    leaders = q0.sample(rng, n_leaders);
    followers = q0.sample(rng, n_followers);
    scores = evaluate_scores(leaders, target);
    h = median_bandwidth(leaders, n_leaders).h;
  }
};

void BM_ApplyStep(benchmark::State& state) {
  const Fixture fx(state.range(0), state.range(1), 2);
  const VelocityField field(fx.leaders, fx.scores, fx.h);
  for (auto _ : state) benchmark::DoNotOptimize(apply_step(fx.followers, field, 0.1));
}

void BM_ApplyStepReference(benchmark::State& state) {
  const Fixture fx(state.range(0), state.range(1), 2);
  const VelocityField field(fx.leaders, fx.scores, fx.h);
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::apply_step(fx.followers, field, 0.1));
  }
}

void BM_Ksd(benchmark::State& state) {
  const Fixture fx(state.range(0), 1, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ksd_vstat(fx.leaders, fx.scores, fx.h));
}

void BM_KsdReference(benchmark::State& state) {
  const Fixture fx(state.range(0), 1, 2);
  for (auto _ : state) benchmark::DoNotOptimize(reference::ksd_vstat(fx.leaders, fx.scores, fx.h));
}

}  // namespace

BENCHMARK(BM_ApplyStep)->Args({100, 500})->Args({200, 2000});
BENCHMARK(BM_ApplyStepReference)->Args({100, 500})->Args({200, 2000});
BENCHMARK(BM_Ksd)->Arg(200)->Arg(1000);
BENCHMARK(BM_KsdReference)->Arg(200)->Arg(1000);

BENCHMARK_MAIN();
