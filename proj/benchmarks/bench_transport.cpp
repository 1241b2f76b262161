#include <benchmark/benchmark.h>

#include <random>

#include "ictx/fixtures.hpp"
#include "ictx/transport.hpp"

namespace {

using namespace ictx;

void WassersteinUniform(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  const ParticleMeasure mu = random_particle_measure(rng, n, 3, 1.0);
  const ParticleMeasure nu = random_particle_measure(rng, n, 3, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(wasserstein(mu, nu, 2));
  }
  state.SetComplexityN(n);
}
BENCHMARK(WassersteinUniform)->RangeMultiplier(2)->Range(16, 256)->Complexity();

void WassersteinWeighted(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(2);
  const ParticleMeasure mu = random_weighted_measure(rng, n, 3, 1.0);
  const ParticleMeasure nu = random_weighted_measure(rng, n, 3, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(wasserstein(mu, nu, 2));
  }
  state.SetComplexityN(n);
}
BENCHMARK(WassersteinWeighted)->RangeMultiplier(2)->Range(16, 256)->Complexity();

void WeakstarGap(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const int d = 4;
  const ParticleMeasure mu = random_weighted_measure(rng, 128, d, 1.0);
  const ParticleMeasure nu = random_weighted_measure(rng, 128, d, 1.0);
  const TestDictionary dict = default_dictionary(d);
  for (auto _ : state) {
    benchmark::DoNotOptimize(weakstar_gap(mu, nu, dict));
  }
}
BENCHMARK(WeakstarGap);

}  // namespace
