#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ictx/fixtures.hpp"
#include "ictx/reference.hpp"
#include "ictx/universality.hpp"

using namespace ictx;

namespace {

Vec v1(double x) {
  Vec p(1);
  p << x;
  return p;
}

ElementaryParams lam1(double a, double b, double c, double v) {
  return ElementaryParams{v1(a), b, c, v};
}

}  // namespace

TEST_CASE("elementary map closed forms") {
  std::mt19937_64 rng(1);
  const ParticleMeasure mu = random_particle_measure(rng, 6, 2, 1.0);
  const Vec x = random_point(rng, 2, 1.0);

  // v = 0 leaves only the affine part
  ElementaryParams affine{random_point(rng, 2, 1.0), 0.3, 1.7, 0.0};
  CHECK(gamma_elementary(affine, mu, x) ==
        doctest::Approx(affine.a.dot(x) + affine.b).epsilon(1e-15));

  // single atom: softmax ratio is 1
  const Vec y = random_point(rng, 2, 1.0);
  ElementaryParams lam{random_point(rng, 2, 1.0), -0.2, 0.9, 0.7};
  const double u = lam.a.dot(x) + lam.b;
  CHECK(gamma_elementary(lam, from_tokens({y}), x) ==
        doctest::Approx(u + lam.v * (lam.a.dot(y) + lam.b)).epsilon(1e-14));

  // a = 0, b = v = 1 gives the constant 2 (affine 1 plus unit average)
  ElementaryParams constant{Vec::Zero(2), 1.0, 0.4, 1.0};
  CHECK(gamma_elementary(constant, mu, x) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("elementary map equals its attention composition") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + trial % 4;
    ElementaryParams lam{random_point(rng, d, 1.2),
                         std::uniform_real_distribution<double>(-1, 1)(rng),
                         std::uniform_real_distribution<double>(-1.5, 1.5)(rng),
                         std::uniform_real_distribution<double>(-1, 1)(rng)};
    const auto fixtures = random_pairs(rng, 4, 16, d, 1.0);
    const MatchReport report = equals_attention_form(lam, fixtures);
    CHECK(report.fixture_count == 4);
    CHECK(report.max_deviation <= 1e-12);
  }

  // c = 0: both routes give the plain average of affine values
  std::mt19937_64 rng2(3);
  const ParticleMeasure mu = random_weighted_measure(rng2, 5, 3, 1.0);
  const Vec x = random_point(rng2, 3, 1.0);
  ElementaryParams lam{random_point(rng2, 3, 1.0), 0.25, 0.0, 0.6};
  double mean = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    mean += mu.weight(i) * (lam.a.dot(mu.point(i)) + lam.b);
  const double expected = lam.a.dot(x) + lam.b + lam.v * mean;
  CHECK(gamma_elementary(lam, mu, x) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(equals_attention_form(lam, {{mu, x}}).max_deviation <= 1e-12);
}

TEST_CASE("algebra evaluation and closure") {
  std::mt19937_64 rng(4);
  const int d = 2;
  const ParticleMeasure mu = random_particle_measure(rng, 8, d, 1.0);
  const Vec x = random_point(rng, d, 1.0);

  // N = T = 1: the vector of elementary values
  AlgebraElement single;
  single.d = d;
  single.dprime = 3;
  single.terms = 1;
  single.factors = 1;
  for (int h = 0; h < 3; ++h)
    single.params.push_back(ElementaryParams{random_point(rng, d, 1.0), 0.1 * h,
                                             0.5, 0.3});
  const Vec vals = eval_algebra(single, mu, x);
  for (int h = 0; h < 3; ++h)
    CHECK(vals(h) ==
          doctest::Approx(gamma_elementary(single.at(h, 0, 0), mu, x)).epsilon(1e-15));

  // T = 2 with a constant second factor scales the first
  AlgebraElement scaled;
  scaled.d = d;
  scaled.dprime = 1;
  scaled.terms = 1;
  scaled.factors = 2;
  ElementaryParams base{random_point(rng, d, 1.0), 0.2, 0.7, 0.4};
  ElementaryParams constant{Vec::Zero(d), 1.0, 0.0, 1.0};  // value 2
  scaled.params = {base, constant};
  CHECK(eval_algebra(scaled, mu, x)(0) ==
        doctest::Approx(2.0 * gamma_elementary(base, mu, x)).epsilon(1e-14));

  // d' = 1, N = 2: sums of scalar products
  AlgebraElement sum2;
  sum2.d = d;
  sum2.dprime = 1;
  sum2.terms = 2;
  sum2.factors = 1;
  ElementaryParams g1{random_point(rng, d, 1.0), 0.0, 0.3, 1.0};
  ElementaryParams g2{random_point(rng, d, 1.0), -0.4, -0.8, 0.5};
  sum2.params = {g1, g2};
  CHECK(eval_algebra(sum2, mu, x)(0) ==
        doctest::Approx(gamma_elementary(g1, mu, x) + gamma_elementary(g2, mu, x))
            .epsilon(1e-14));

  // closure: sum and product agree with pointwise arithmetic
  const AlgebraElement s = algebra_sum(single, single);
  const Vec sv = eval_algebra(s, mu, x);
  for (int h = 0; h < 3; ++h)
    CHECK(sv(h) == doctest::Approx(2 * vals(h)).epsilon(1e-13));
  const AlgebraElement p = algebra_product(single, single);
  const Vec pv = eval_algebra(p, mu, x);
  for (int h = 0; h < 3; ++h)
    CHECK(pv(h) == doctest::Approx(vals(h) * vals(h)).epsilon(1e-12));
}

TEST_CASE("laplace transform values") {
  // single atom: the projection itself
  const Vec y = v1(0.7);
  CHECK(laplace(from_tokens({y}), v1(2.0), 1.3) ==
        doctest::Approx(1.4).epsilon(1e-14));

  // two-atom closed form: L(1/2 d0 + 1/2 d1)(1, c) = e^c / (1 + e^c)
  const ParticleMeasure half = from_tokens({v1(0), v1(1)});
  for (double c : {-2.0, -0.5, 0.0, 1.0, 3.0})
    CHECK(laplace(half, v1(1.0), c) ==
          doctest::Approx(std::exp(c) / (1 + std::exp(c))).epsilon(1e-14));

  // c = 0: the mean projection
  std::mt19937_64 rng(5);
  const ParticleMeasure mu = random_weighted_measure(rng, 7, 3, 1.0);
  const Vec a = random_point(rng, 3, 1.0);
  double mean = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    mean += mu.weight(i) * a.dot(mu.point(i));
  CHECK(laplace(mu, a, 0.0) == doctest::Approx(mean).epsilon(1e-13));
}

TEST_CASE("tilted moments and the derivative recursion") {
  const ParticleMeasure atom = from_tokens({v1(0.8)});
  for (int k = 1; k <= 4; ++k)
    CHECK(laplace_k(atom, 1.1, k) ==
          doctest::Approx(std::pow(0.8, k)).epsilon(1e-13));

  std::mt19937_64 rng(6);
  const ParticleMeasure mu = random_weighted_measure(rng, 9, 1, 1.0);
  CHECK(laplace_k(mu, 0.7, 1) == doctest::Approx(laplace(mu, v1(1.0), 0.7)).epsilon(1e-14));

  for (int k = 1; k <= 4; ++k)
    for (double c : {-1.5, 0.0, 2.0}) {
      const double fd = central_difference(
          [&](double cc) { return laplace_k(mu, cc, k); }, c, 1e-5);
      const double identity =
          laplace_k(mu, c, k + 1) - laplace_k(mu, c, k) * laplace_k(mu, c, 1);
      CHECK(std::abs(fd - identity) <= 1e-6);
    }

  CHECK_THROWS_AS(laplace_k(from_tokens({Vec::Zero(2)}), 0.0, 1),
                  std::invalid_argument);
}

TEST_CASE("separation probe witnesses distinctness") {
  const ParticleMeasure d0 = from_tokens({v1(0)});
  const ParticleMeasure d1 = from_tokens({v1(1)});
  CHECK(separation_probe(d0, d1, 32, 7) >= 1.0 - 1e-12);

  const ParticleMeasure copy({v1(0)}, {1.0});
  CHECK(separation_probe(d0, copy, 32, 7) == 0.0);

  // equal means, different second moments
  const ParticleMeasure spread = from_tokens({v1(-1), v1(1)});
  CHECK(separation_probe(spread, d0, 64, 7) > 1e-6);
}

TEST_CASE("vector lift reproduces the per-coordinate elementary values") {
  std::mt19937_64 rng(8);
  const int d = 3, dp = 3;
  AlgebraElement A;
  A.d = d;
  A.dprime = dp;
  A.terms = 2;
  A.factors = 2;
  for (int i = 0; i < dp * 2 * 2; ++i) {
    A.params.push_back(ElementaryParams{
        random_point(rng, d, 0.8),
        std::uniform_real_distribution<double>(-0.8, 0.8)(rng),
        std::uniform_real_distribution<double>(-1.0, 1.0)(rng),
        std::uniform_real_distribution<double>(-0.8, 0.8)(rng)});
  }
  const std::vector<LiftedFactor> lifted = lift_to_vector(A);
  REQUIRE(lifted.size() == 4);
  for (const LiftedFactor& f : lifted) {
    CHECK(f.attention.d_in == dp);
    CHECK(f.attention.d_head == 1);
    CHECK(f.attention.k == 1);
    CHECK(f.attention.num_heads() == dp);
    const auto fixtures = random_pairs(rng, 3, 10, d, 1.0);
    for (const auto& [mu, x] : fixtures) {
      const Vec lhs = lifted_factor_value(f, mu, x);
      for (int h = 0; h < dp; ++h)
        CHECK(std::abs(lhs(h) -
                       gamma_elementary(A.at(h, f.term, f.factor), mu, x)) <=
              1e-12);
    }
  }

  // d' = 1 reduces to the scalar elementary map
  AlgebraElement one;
  one.d = 2;
  one.dprime = 1;
  one.terms = 1;
  one.factors = 1;
  one.params = {ElementaryParams{random_point(rng, 2, 1.0), 0.3, 0.9, -0.5}};
  const LiftedFactor f = lift_to_vector(one).front();
  const auto fixtures = random_pairs(rng, 3, 8, 2, 1.0);
  for (const auto& [mu, x] : fixtures)
    CHECK(std::abs(lifted_factor_value(f, mu, x)(0) -
                   gamma_elementary(one.params[0], mu, x)) <= 1e-12);
}

TEST_CASE("product mlp meets its certificate") {
  const ProductMlp phi = build_product_mlp(1, 2.0, 1e-3);
  CHECK(phi.eps <= 1e-3);
  CHECK(phi.certified_max <= phi.eps);

  // product with zero and with ones
  CHECK(product_mlp_eval(phi, v1(1.2), v1(0.0)).lpNorm<Eigen::Infinity>() <= 1e-3);
  CHECK(std::abs(product_mlp_eval(phi, v1(0.9), v1(1.0))(0) - 0.9) <= 1e-3);

  // a specific product inside the ball
  CHECK(std::abs(product_mlp_eval(phi, v1(1.5), v1(-1.2))(0) - (-1.8)) <= 1e-3);

  // an unreachable accuracy hits the segment budget
  CHECK_THROWS_AS(build_product_mlp(1, 50.0, 1e-14), std::runtime_error);
  CHECK_THROWS_AS(build_product_mlp(1, -1.0, 1e-3), std::invalid_argument);
}

TEST_CASE("realize wires the algebra into a deep transformer") {
  std::mt19937_64 rng(9);
  const int d = 2, dp = 2;
  AlgebraElement A;
  A.d = d;
  A.dprime = dp;
  A.terms = 1;
  A.factors = 1;
  for (int h = 0; h < dp; ++h) {
    ElementaryParams lam{Vec::Zero(d), 0.1 + 0.2 * h, 0.8, 0.5};
    lam.a(h) = 0.7;
    A.params.push_back(lam);
  }
  const double c_omega = 1.8;
  const ProductMlp phi = build_product_mlp(dp, phi_radius_for(A, c_omega), 1e-4);
  const RealizedTransformer rt = realize(A, phi, false, c_omega);

  CHECK(rt.stack.attention_count() == 1 * 1 + 2);
  check_size_contract(rt);

  const auto fixtures = random_pairs(rng, 25, 8, d, 1.0);
  for (const auto& [mu, x] : fixtures) {
    const Vec ref = eval_algebra(A, mu, x);
    const ExactEval exact = realized_eval_exact(rt, mu, x);
    CHECK((exact.value - ref).lpNorm<Eigen::Infinity>() <= 1e-10);
    CHECK(exact.max_pair_norm <= rt.radius);
    CHECK((realized_eval(rt, mu, x) - ref).norm() <=
          rt.phi_eps * rt.propagation_factor);
  }

  // dimension mismatch between Phi and the algebra
  const ProductMlp wrong = build_product_mlp(dp + 1, 2.0, 1e-2);
  CHECK_THROWS_AS(realize(A, wrong), std::invalid_argument);
}

TEST_CASE("masked realization is causal and matches the reduced algebra") {
  std::mt19937_64 rng(10);
  const int d = 2, dp = 2;
  AlgebraElement A;
  A.d = d;
  A.dprime = dp;
  A.terms = 1;
  A.factors = 1;
  for (int h = 0; h < dp; ++h) {
    ElementaryParams lam{Vec::Zero(d), 0.0, 1.0, 1.0};
    lam.a(h) = 1.0;
    A.params.push_back(lam);
  }
  const double c_omega = 2.5;
  const ProductMlp phi = build_product_mlp(dp, phi_radius_for(A, c_omega), 1e-5);
  const RealizedTransformer rt = realize(A, phi, true, c_omega);
  CHECK(rt.masked);
  CHECK(rt.stack.masked());

  const auto fixtures = lip_causal_fixtures(11, 6, d);
  for (const CausalFixture& f : fixtures) {
    // stack evaluation vs the reduced exact route
    const Vec via_stack = realized_eval_masked(rt, f.mu, f.x, f.t);
    const ExactEval reduced = realized_eval_exact_masked(rt, f.mu, f.x, f.t);
    CHECK((via_stack - reduced.value).norm() <=
          rt.phi_eps * rt.propagation_factor + 1e-10);
    // causality
    const Vec windowed = realized_eval_masked(rt, mask(f.mu, f.t), f.x, f.t);
    CHECK((via_stack - windowed).lpNorm<Eigen::Infinity>() <= 1e-10);
  }
}

TEST_CASE("fit recovers targets representable in the pool") {
  std::mt19937_64 rng(12);
  const int d = 2;
  const auto train = random_pairs(rng, 120, 10, d, 1.0);
  const auto holdout = random_pairs(rng, 30, 10, d, 1.0);

  FitConfig cfg;
  cfg.terms = 2;
  cfg.factors = 1;
  cfg.pool_size = 128;

  // a known elementary target picked from the designed pool head
  ElementaryParams known{Vec::Zero(d), 0.0, 1.0, 1.0};
  known.a(0) = 1.0;
  const InContextTarget elem = [&known](const ParticleMeasure& mu, const Vec& x) {
    return Vec(Vec::Constant(1, gamma_elementary(known, mu, x)));
  };
  const FitResult res = fit(elem, d, 1, cfg, train, holdout, 99);
  CHECK(res.train_max_error <= 1e-8);

  // identity needs only the affine part
  const InContextTarget identity = [](const ParticleMeasure&, const Vec& x) {
    return x;
  };
  CHECK(fit(identity, d, d, cfg, train, holdout, 99).holdout_max_error <= 1e-8);

  // x + mean(mu): the c = 0 feature computes the mean exactly
  const InContextTarget mean_shift = [](const ParticleMeasure& mu, const Vec& x) {
    Vec m = Vec::Zero(x.size());
    for (std::size_t i = 0; i < mu.size(); ++i) m += mu.weight(i) * mu.point(i);
    return Vec(x + m);
  };
  CHECK(fit(mean_shift, d, d, cfg, train, holdout, 99).holdout_max_error <= 1e-8);

  // a single term with the c = 0 feature already suffices
  FitConfig one = cfg;
  one.terms = 1;
  CHECK(fit(mean_shift, d, d, one, train, holdout, 99).holdout_max_error <= 1e-8);

  FitConfig bad = cfg;
  bad.terms = 0;
  CHECK_THROWS_AS(fit(identity, d, d, bad, train, holdout, 99),
                  std::invalid_argument);
}

TEST_CASE("algebra serialization round-trips") {
  std::mt19937_64 rng(13);
  AlgebraElement A;
  A.d = 3;
  A.dprime = 2;
  A.terms = 2;
  A.factors = 2;
  for (int i = 0; i < 8; ++i)
    A.params.push_back(ElementaryParams{
        random_point(rng, 3, 1.0),
        std::uniform_real_distribution<double>(-1, 1)(rng),
        std::uniform_real_distribution<double>(-1, 1)(rng),
        std::uniform_real_distribution<double>(-1, 1)(rng)});
  std::ostringstream os;
  write_algebra(os, A);
  std::istringstream is(os.str());
  const AlgebraElement back = read_algebra(is);
  CHECK(back.d == A.d);
  CHECK(back.dprime == A.dprime);
  for (int h = 0; h < A.dprime; ++h)
    for (int n = 0; n < A.terms; ++n)
      for (int t = 0; t < A.factors; ++t) {
        CHECK(back.at(h, n, t).a == A.at(h, n, t).a);  // bitwise
        CHECK(back.at(h, n, t).b == A.at(h, n, t).b);
        CHECK(back.at(h, n, t).c == A.at(h, n, t).c);
        CHECK(back.at(h, n, t).v == A.at(h, n, t).v);
      }

  std::istringstream bad("algebra d=2 dprime=1 terms=1 factors=1\nlambda t=5 n=0 h=0 b=0 c=0 v=0 a=0 0\n");
  CHECK_THROWS_AS(read_algebra(bad), std::runtime_error);
}
