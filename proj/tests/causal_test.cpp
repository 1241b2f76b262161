#include <doctest.h>

#include <cmath>
#include <random>

#include "ictx/fixtures.hpp"

using namespace ictx;

namespace {

InContextMapHandle time_reader(int d) {
  InContextMapHandle h;
  h.d = d;
  h.dprime = d;
  h.name = "time-reader";
  h.eval = [](const SpaceTimeMeasure&, const Vec& x, double t) {
    return Vec(x + t * Vec::Ones(x.size()));
  };
  return h;
}

}  // namespace

TEST_CASE("reduced evaluation collapses to the support end point") {
  std::mt19937_64 rng(1);
  const int d = 2;
  const MultiHeadParams theta = random_attention(rng, d, 2, 1, 0.6);
  LayerStack stack;
  stack.layers.emplace_back(AttentionLayer{theta, true});
  const InContextMapHandle handle = handle_from_stack(stack, "masked-layer");

  for (const CausalFixture& f : lip_causal_fixtures(2, 8, d)) {
    // reduced form of the masked measure equals the full evaluation
    const Vec lhs = reduced_eval(handle, mask(f.mu, f.t), f.x);
    const Vec rhs = gamma_masked(theta, f.mu, f.x, f.t);
    CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() <= 1e-12);

    // causal identifiable maps also equal the evaluation at t = 1
    const Vec at_one = handle.eval(mask(f.mu, f.t), f.x, 1.0);
    CHECK((lhs - at_one).lpNorm<Eigen::Infinity>() <= 1e-12);
  }

  // measure concentrated at a single time evaluates there
  const SpaceTimeMeasure at_tau({Vec::Ones(d), Vec::Zero(d)}, {0.4, 0.4},
                                {0.5, 0.5});
  const Vec q = random_point(rng, d, 1.0);
  CHECK((reduced_eval(handle, at_tau, q) - handle.eval(at_tau, q, 0.4))
            .lpNorm<Eigen::Infinity>() <= 1e-13);
}

TEST_CASE("causality residuals separate masked from unmasked maps") {
  std::mt19937_64 rng(3);
  const int d = 3;
  const auto fixtures = lip_causal_fixtures(4, 16, d);

  const LayerStack deep = random_stack(rng, 3, d, 3, true, 0.5);
  const CausalityReport masked_report =
      check_causal(handle_from_stack(deep, "deep"), fixtures);
  CHECK(masked_report.fixture_count == 16);
  CHECK(masked_report.causality_residual <= 1e-10);

  // context-free maps have zero residual exactly
  InContextMapHandle ctx_free;
  ctx_free.d = d;
  ctx_free.dprime = d;
  ctx_free.name = "context-free";
  ctx_free.eval = [](const SpaceTimeMeasure&, const Vec& x, double) {
    return Vec(2.0 * x);
  };
  CHECK(check_causal(ctx_free, fixtures).causality_residual == 0.0);

  // unmasked attention sees future tokens
  const MultiHeadParams theta = random_attention(rng, d, 2, 2, 0.5);
  InContextMapHandle wrapped;
  wrapped.d = d;
  wrapped.dprime = d;
  wrapped.name = "unmasked";
  wrapped.eval = [theta](const SpaceTimeMeasure& mu, const Vec& x, double) {
    return gamma_unmasked(theta, mu.space_marginal(), x);
  };
  const CausalityReport bad =
      check_causal(wrapped, {future_outlier_fixture(5, d)});
  CHECK(bad.causality_residual >= 1e-3);
  CHECK(bad.worst_causality_fixture == "future-outlier");
}

TEST_CASE("identifiability residuals catch hidden clock dependence") {
  std::mt19937_64 rng(6);
  const int d = 2;
  const auto pairs = lip_ident_fixtures(7, 10, d);

  const LayerStack deep = random_stack(rng, 3, d, 2, true, 0.5);
  CHECK(check_identifiable(handle_from_stack(deep, "deep"), pairs)
            .identifiability_residual <= 1e-10);

  const CausalityReport reader = check_identifiable(time_reader(d), pairs);
  CHECK(reader.identifiability_residual > 1e-3);

  // no eligible pairs: vacuous pass
  const CausalityReport vacuous = check_identifiable(time_reader(d), {});
  CHECK(vacuous.fixture_count == 0);
  CHECK(vacuous.identifiability_residual == 0.0);
}

TEST_CASE("masked limit probe behavior") {
  // fully concentrated at time zero: all gaps vanish
  const SpaceTimeMeasure at_zero({Vec::Zero(2), Vec::Ones(2)}, {0.0, 0.0},
                                 {0.5, 0.5});
  for (double gap : masked_limit_probe(at_zero, {0.5, 0.25, 0.125}))
    CHECK(gap == 0.0);

  // geometric fixture: gaps shrink and obey the conditional-mean bound
  const SpaceTimeMeasure mu = geometric_time_fixture(10, 0.3);
  std::vector<double> ts;
  for (int k = 1; k <= 10; ++k) ts.push_back(std::pow(2.0, -k));
  const std::vector<double> gaps = masked_limit_probe(mu, ts);
  for (std::size_t i = 0; i + 1 < gaps.size(); ++i)
    CHECK(gaps[i + 1] <= gaps[i] + 1e-15);

  // proof-side bound: sup over retained times of |F(s) - F(0)| per function
  const TestDictionary dict = default_dictionary(mu.dim() + 1);
  const Disintegration parts = disintegrate(mu);
  const ParticleMeasure zero_group = parts.groups.front().conditional;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    double bound = 0.0;
    for (const TestFunction& tf : dict) {
      auto lifted_mean = [&](const ParticleMeasure& group, double s) {
        double val = 0.0;
        for (std::size_t i = 0; i < group.size(); ++i) {
          Vec z(mu.dim() + 1);
          z.head(mu.dim()) = group.point(i);
          z(mu.dim()) = s;
          val += group.weight(i) * tf.f(z);
        }
        return val;
      };
      const double f0 = lifted_mean(zero_group, 0.0);
      for (const TimeGroup& g : parts.groups)
        if (g.time <= ts[k])
          bound = std::max(bound, std::abs(lifted_mean(g.conditional, g.time) - f0));
    }
    CHECK(gaps[k] <= bound + 1e-12);
  }

  // a dead interval below the first positive atom freezes the window
  const SpaceTimeMeasure gap_fixture(
      {Vec::Zero(2), Vec::Ones(2)}, {0.0, 0.5}, {0.4, 0.6});
  const std::vector<double> frozen =
      masked_limit_probe(gap_fixture, {0.4, 0.2, 0.1});
  for (double g : frozen) CHECK(g == 0.0);

  const SpaceTimeMeasure no_atom({Vec::Zero(2), Vec::Ones(2)}, {0.3, 0.5},
                                 {0.4, 0.6});
  CHECK_THROWS_AS(masked_limit_probe(no_atom, {0.4}), std::invalid_argument);
}

TEST_CASE("identifiability stability probe") {
  std::mt19937_64 rng(9);
  const int d = 2;
  const auto gap_fixtures_all = lip_causal_fixtures(10, 12, d);
  const auto pairs = lip_ident_fixtures(11, 8, d);

  const LayerStack stack = random_stack(rng, 2, d, 2, true, 0.5);
  const InContextMapHandle limit = handle_from_stack(stack, "limit");
  const std::vector<InContextMapHandle> constant_sequence = {limit, limit, limit};
  const StabilityReport ok =
      identifiability_stability_probe(constant_sequence, limit, gap_fixtures_all, pairs);
  CHECK(ok.within_bound);
  CHECK(ok.limit_residual <= 1e-10);
  for (double g : ok.uniform_gaps) CHECK(g <= 1e-12);

  // adversarial limit: hidden clock step invisible to the gap fixtures
  std::vector<CausalFixture> early;
  for (CausalFixture f : gap_fixtures_all) {
    f.t = std::min(f.t, 0.4);
    early.push_back(std::move(f));
  }
  InContextMapHandle adversarial = limit;
  adversarial.name = "adversarial";
  adversarial.eval = [base = limit.eval](const SpaceTimeMeasure& mu, const Vec& x,
                                         double t) {
    Vec out = base(mu, x, t);
    if (t > 0.5) out += 10.0 * Vec::Ones(out.size());
    return out;
  };
  const StabilityReport flagged = identifiability_stability_probe(
      constant_sequence, adversarial, early, pairs);
  CHECK_FALSE(flagged.within_bound);
}

TEST_CASE("fit_masked recovers causal targets and rejects non-causal ones") {
  const int d = 2;
  const auto train = lip_causal_fixtures(20, 80, d);
  const auto holdout = lip_causal_fixtures(21, 20, d);
  const auto pairs = lip_ident_fixtures(22, 8, d);

  MaskedFitConfig cfg;
  cfg.fit.terms = 2;
  cfg.fit.factors = 1;
  cfg.fit.pool_size = 96;

  // a single masked attention layer built from a known elementary form
  MultiHeadParams theta;
  theta.d_in = d;
  theta.d_head = 1;
  theta.k = 1;
  for (int h = 0; h < d; ++h) {
    MultiHeadParams::Head head;
    head.W = Mat::Zero(d, 1);
    head.W(h, 0) = 1.0;
    head.params.K = Mat::Zero(1, d);
    head.params.K(0, h) = 1.0;
    head.params.Q = Mat::Zero(1, d);
    head.params.Q(0, h) = 1.0;  // c = 1
    head.params.V = Mat::Zero(1, d);
    head.params.V(0, h) = 1.0;  // v = 1
    theta.heads.push_back(std::move(head));
  }
  LayerStack single;
  single.layers.emplace_back(AttentionLayer{theta, true});
  const MaskedFitResult res = fit_masked(handle_from_stack(single, "target"), cfg,
                                         train, holdout, pairs, 7);
  CHECK(res.precheck.causality_residual <= 1e-10);
  CHECK(res.holdout_max_error <= 1e-6);
  CHECK(res.transformer.masked);
  check_size_contract(res.transformer);

  // causal running mean
  InContextMapHandle running_mean;
  running_mean.d = d;
  running_mean.dprime = d;
  running_mean.name = "running-mean";
  running_mean.eval = [](const SpaceTimeMeasure& mu, const Vec& x, double t) {
    const ParticleMeasure window = mask(mu, t).space_marginal();
    Vec m = Vec::Zero(x.size());
    for (std::size_t i = 0; i < window.size(); ++i)
      m += window.weight(i) * window.point(i);
    return Vec(x + m);
  };
  CHECK(fit_masked(running_mean, cfg, train, holdout, pairs, 7)
            .holdout_max_error <= 1e-6);

  // the unmasked mean is not causal and must be rejected with the residual
  InContextMapHandle full_mean;
  full_mean.d = d;
  full_mean.dprime = d;
  full_mean.name = "unmasked-mean";
  full_mean.eval = [](const SpaceTimeMeasure& mu, const Vec& x, double) {
    Vec m = Vec::Zero(x.size());
    for (std::size_t i = 0; i < mu.size(); ++i) m += mu.weight(i) * mu.point(i);
    return Vec(x + m);
  };
  CHECK_THROWS_WITH_AS(
      fit_masked(full_mean, cfg, train, holdout, pairs, 7),
      doctest::Contains("not causal"), std::runtime_error);
}

TEST_CASE("masked measure convergence fixtures are well formed") {
  for (int which = 1; which <= 3; ++which) {
    const ConvergencePoint cp = convergence_fixture(which, 64);
    CHECK(cp.mu_n.size() == cp.mu_limit.size());
    CHECK(std::abs(1.0 - [&] {
            double s = 0;
            for (double w : cp.mu_n.weights()) s += w;
            return s;
          }()) <= 1e-12);
    if (which == 1) CHECK(cp.t_limit > 0.0);
    if (which >= 2) CHECK(cp.t_limit == 0.0);
    // masked distance shrinks with n
    const double d64 = spacetime_wasserstein(mask(cp.mu_n, cp.t_n),
                                             mask(cp.mu_limit, cp.t_limit), 2);
    const ConvergencePoint finer = convergence_fixture(which, 256);
    const double d256 = spacetime_wasserstein(
        mask(finer.mu_n, finer.t_n), mask(finer.mu_limit, finer.t_limit), 2);
    CHECK(d256 <= d64 + 1e-15);
    CHECK(d256 <= 1e-2);
  }
  CHECK_THROWS_AS(convergence_fixture(4, 16), std::invalid_argument);
}
