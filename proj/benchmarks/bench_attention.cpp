#include <benchmark/benchmark.h>

#include <random>

#include "ictx/fixtures.hpp"
#include "ictx/universality.hpp"

namespace {

using namespace ictx;

void GammaUnmasked(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  const int d = 8;
  const MultiHeadParams theta = random_attention(rng, d, 4, 4, 0.5);
  const ParticleMeasure mu = random_particle_measure(rng, n, d, 1.0);
  const Vec x = random_point(rng, d, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gamma_unmasked(theta, mu, x));
  }
  state.SetComplexityN(n);
}
BENCHMARK(GammaUnmasked)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void ComposeBatch(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(2);
  const int d = 6;
  const LayerStack stack = random_stack(rng, 3, d, 3, false, 0.5);
  const ParticleMeasure mu = random_particle_measure(rng, n, d, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(compose_unmasked_batch(stack, mu));
  }
  state.SetComplexityN(n);
}
BENCHMARK(ComposeBatch)->RangeMultiplier(2)->Range(16, 128)->Complexity();

void TokenAttention(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  const int d = 8;
  const MultiHeadParams theta = random_attention(rng, d, 4, 4, 0.5);
  const Mat X = Mat::Random(d, n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(matt_tokens(theta, X, true));
  }
  state.SetComplexityN(n);
}
BENCHMARK(TokenAttention)->RangeMultiplier(4)->Range(16, 1024)->Complexity();

void RealizedEval(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const int d = 2, dp = 2;
  AlgebraElement A;
  A.d = d;
  A.dprime = dp;
  A.terms = static_cast<int>(state.range(0));
  A.factors = 2;
  std::uniform_real_distribution<double> unif(-0.3, 0.3);
  for (int i = 0; i < dp * A.terms * A.factors; ++i)
    A.params.push_back({random_point(rng, d, 0.3), unif(rng), unif(rng), unif(rng)});
  const ProductMlp phi = build_product_mlp(dp, phi_radius_for(A, 1.8), 1e-3);
  const RealizedTransformer rt = realize(A, phi, false, 1.8);
  const ParticleMeasure mu = random_particle_measure(rng, 32, d, 1.0);
  const Vec x = random_point(rng, d, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(realized_eval(rt, mu, x));
  }
}
BENCHMARK(RealizedEval)->Arg(1)->Arg(4)->Arg(8);

}  // namespace
