#include "ictx/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "ictx/causal.hpp"
#include "ictx/fixtures.hpp"
#include "ictx/reference.hpp"
#include "ictx/transport.hpp"
#include "ictx/universality.hpp"

namespace ictx {

CheckResult make_check(std::string name, double residual, double threshold,
                       std::string note) {
  CheckResult r;
  r.name = std::move(name);
  r.residual = residual;
  r.threshold = threshold;
  r.pass = residual <= threshold;
  r.note = std::move(note);
  return r;
}

namespace {

double deficit(double observed, double must_exceed) {
  return std::max(0.0, must_exceed - observed);
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

Mat tokens_as_matrix(const ParticleMeasure& mu) {
  Mat X(mu.dim(), static_cast<Eigen::Index>(mu.size()));
  for (std::size_t i = 0; i < mu.size(); ++i)
    X.col(static_cast<Eigen::Index>(i)) = mu.point(i);
  return X;
}

ElementaryParams random_lambda(std::mt19937_64& rng, int d, double scale) {
  std::uniform_real_distribution<double> unif(-scale, scale);
  ElementaryParams lam;
  lam.a = Vec::NullaryExpr(d, [&](Eigen::Index) { return unif(rng); });
  lam.b = unif(rng);
  lam.c = unif(rng);
  lam.v = unif(rng);
  return lam;
}

AlgebraElement random_algebra(std::mt19937_64& rng, int d, int dprime, int terms,
                              int factors, double scale) {
  AlgebraElement A;
  A.d = d;
  A.dprime = dprime;
  A.terms = terms;
  A.factors = factors;
  for (int i = 0; i < dprime * terms * factors; ++i)
    A.params.push_back(random_lambda(rng, d, scale));
  return A;
}

}  // namespace

namespace checks {

CheckResult unmasked_discrete_equivalence(std::uint64_t seed, int stack_count) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> ldist(1, 3), ddist(2, 8), hdist(1, 4),
      ndist(1, 64);
  double worst = 0.0;
  for (int s = 0; s < stack_count; ++s) {
    const int d = ddist(rng), n = ndist(rng), L = ldist(rng);
    std::mt19937_64 stack_rng(rng());
    LayerStack stack = random_stack(stack_rng, L, d, hdist(rng), false, 0.5);
    const ParticleMeasure mu = random_particle_measure(rng, n, d, 1.0);
    const Mat X = tokens_as_matrix(mu);
    const Mat oracle = token_stack_eval(stack, X, false);
    const UnmaskedBatch batch = compose_unmasked_batch(stack, mu);
    for (std::size_t i = 0; i < batch.outputs.size(); ++i)
      worst = std::max(
          worst, (batch.outputs[i] - oracle.col(static_cast<Eigen::Index>(i)))
                     .lpNorm<Eigen::Infinity>());
  }
  return make_check("unmasked_discrete_equivalence", worst, 1e-10,
                    std::to_string(stack_count) + " random stacks");
}

CheckResult masked_discrete_equivalence(std::uint64_t seed, int stack_count) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> ldist(1, 3), ddist(2, 8), hdist(1, 4),
      ndist(1, 64);
  double worst = 0.0;
  for (int s = 0; s < stack_count; ++s) {
    const int d = ddist(rng), n = ndist(rng), L = ldist(rng);
    std::mt19937_64 stack_rng(rng());
    LayerStack stack = random_stack(stack_rng, L, d, hdist(rng), true, 0.5);
    const ParticleMeasure space = random_particle_measure(rng, n, d, 1.0);
    std::vector<double> times;
    for (int i = 1; i <= n; ++i)
      times.push_back(static_cast<double>(i) / static_cast<double>(n));
    const SpaceTimeMeasure mu(space.points(), times, space.weights());
    const Mat X = tokens_as_matrix(space);
    const Mat oracle = token_stack_eval(stack, X, true);
    const MaskedBatch batch = compose_masked_batch(stack, mu);
    for (std::size_t i = 0; i < batch.outputs.size(); ++i)
      worst = std::max(
          worst, (batch.outputs[i] - oracle.col(static_cast<Eigen::Index>(i)))
                     .lpNorm<Eigen::Infinity>());
  }
  return make_check("masked_discrete_equivalence", worst, 1e-10,
                    std::to_string(stack_count) + " random masked stacks");
}

CheckResult permutation_equivariance(std::uint64_t seed, int fixture_count) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> ddist(2, 6), hdist(1, 3), ndist(2, 24),
      ldist(1, 2);
  double worst = 0.0;
  for (int f = 0; f < fixture_count; ++f) {
    const int d = ddist(rng), n = ndist(rng);
    std::mt19937_64 stack_rng(rng());
    LayerStack stack = random_stack(stack_rng, ldist(rng), d, hdist(rng), false, 0.5);
    const ParticleMeasure mu = random_particle_measure(rng, n, d, 1.0);
    std::vector<std::size_t> perm(mu.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Vec> permuted(mu.size());
    for (std::size_t i = 0; i < perm.size(); ++i) permuted[perm[i]] = mu.point(i);
    const ParticleMeasure mu_p = from_tokens(permuted);

    const UnmaskedBatch base = compose_unmasked_batch(stack, mu);
    const UnmaskedBatch shuffled = compose_unmasked_batch(stack, mu_p);
    for (std::size_t i = 0; i < perm.size(); ++i) {
      const double diff =
          (base.outputs[i] - shuffled.outputs[perm[i]]).lpNorm<Eigen::Infinity>();
      worst = std::max(worst, diff);
    }
    // token route as well
    const Mat X = tokens_as_matrix(mu), Xp = tokens_as_matrix(mu_p);
    const Mat base_tok = token_stack_eval(stack, X, false);
    const Mat perm_tok = token_stack_eval(stack, Xp, false);
    for (std::size_t i = 0; i < perm.size(); ++i)
      worst = std::max(worst, (base_tok.col(static_cast<Eigen::Index>(i)) -
                               perm_tok.col(static_cast<Eigen::Index>(perm[i])))
                                  .lpNorm<Eigen::Infinity>());
  }
  return make_check("permutation_equivariance_bitwise", worst, 0.0,
                    "exact equality required");
}

std::vector<CheckResult> causality_identifiability(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int d = 3;
  const std::vector<CausalFixture> fixtures = lip_causal_fixtures(seed + 1, 24, d);
  const std::vector<IdentFixture> pairs = lip_ident_fixtures(seed + 2, 16, d);

  LayerStack single;
  single.layers.emplace_back(AttentionLayer{random_attention(rng, d, 2, 2, 0.5), true});
  LayerStack deep = random_stack(rng, 3, d, 3, true, 0.5);

  std::vector<CheckResult> out;
  out.push_back(make_check(
      "causality_single_layer",
      check_causal(handle_from_stack(single, "single"), fixtures).causality_residual,
      1e-10));
  out.push_back(make_check(
      "causality_depth3_stack",
      check_causal(handle_from_stack(deep, "deep"), fixtures).causality_residual,
      1e-10));
  out.push_back(make_check(
      "identifiability_depth3_stack",
      check_identifiable(handle_from_stack(deep, "deep"), pairs)
          .identifiability_residual,
      1e-10));

  // Unmasked attention wrapped as a space-time map must violate causality.
  const MultiHeadParams theta = random_attention(rng, d, 2, 2, 0.5);
  InContextMapHandle wrapped;
  wrapped.d = d;
  wrapped.dprime = d;
  wrapped.name = "unmasked-wrapped";
  wrapped.eval = [theta](const SpaceTimeMeasure& mu, const Vec& x, double) {
    return gamma_unmasked(theta, mu.space_marginal(), x);
  };
  const CausalFixture outlier = future_outlier_fixture(seed + 3, d);
  const double observed =
      check_causal(wrapped, {outlier}).causality_residual;
  out.push_back(make_check("noncausal_counterexample_margin",
                           deficit(observed, 1e-3), 0.0,
                           "observed residual " + fmt(observed)));
  return out;
}

CheckResult elementary_identity(std::uint64_t seed, int fixture_count) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> ddist(1, 4), ndist(1, 16);
  double worst = 0.0;
  for (int f = 0; f < fixture_count; ++f) {
    const int d = ddist(rng);
    const ElementaryParams lam = random_lambda(rng, d, 1.2);
    const auto fixtures = random_pairs(rng, 1, ndist(rng), d, 1.0);
    worst = std::max(worst, equals_attention_form(lam, fixtures).max_deviation);
  }
  return make_check("elementary_attention_identity", worst, 1e-12,
                    std::to_string(fixture_count) + " random (lambda, mu, x)");
}

CheckResult vector_lift_identity(std::uint64_t seed, int fixture_count) {
  std::mt19937_64 rng(seed);
  const int dprimes[] = {1, 2, 4};
  std::uniform_int_distribution<int> ddist(1, 4), ndist(1, 12);
  double worst = 0.0;
  for (int f = 0; f < fixture_count; ++f) {
    const int d = ddist(rng);
    const int dp = dprimes[f % 3];
    const AlgebraElement A = random_algebra(rng, d, dp, 2, 2, 0.8);
    const auto fixtures = random_pairs(rng, 2, ndist(rng), d, 1.0);
    for (const LiftedFactor& factor : lift_to_vector(A)) {
      for (const auto& [mu, x] : fixtures) {
        const Vec lifted = lifted_factor_value(factor, mu, x);
        Vec direct(dp);
        for (int h = 0; h < dp; ++h)
          direct(h) = gamma_elementary(A.at(h, factor.term, factor.factor), mu, x);
        worst = std::max(worst, (lifted - direct).lpNorm<Eigen::Infinity>());
      }
    }
  }
  return make_check("vector_lift_identity", worst, 1e-12,
                    "d' in {1,2,4}, " + std::to_string(fixture_count) + " fixtures");
}

CheckResult laplace_recursion(std::uint64_t seed, int measure_count) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> ndist(2, 12);
  double worst = 0.0;
  for (int m = 0; m < measure_count; ++m) {
    const ParticleMeasure mu = random_weighted_measure(rng, ndist(rng), 1, 1.0);
    for (int k = 1; k <= 4; ++k)
      for (double c = -3.0; c <= 3.0 + 1e-9; c += 0.5) {
        const double fd = central_difference(
            [&](double cc) { return laplace_k(mu, cc, k); }, c, 1e-5);
        const double identity =
            laplace_k(mu, c, k + 1) - laplace_k(mu, c, k) * laplace_k(mu, c, 1);
        worst = std::max(worst, std::abs(fd - identity));
      }
  }
  return make_check("laplace_derivative_recursion", worst, 1e-6,
                    "k <= 4, c grid [-3,3], step 1e-5");
}

std::vector<CheckResult> separation_witness(std::uint64_t seed) {
  auto dirac = [](std::initializer_list<double> coords) {
    Vec p(static_cast<Eigen::Index>(coords.size()));
    Eigen::Index i = 0;
    for (double c : coords) p(i++) = c;
    return from_tokens({p});
  };
  auto atoms1d = [](std::vector<double> xs, std::vector<double> ws) {
    std::vector<Vec> pts;
    for (double x : xs) {
      Vec p(1);
      p << x;
      pts.push_back(std::move(p));
    }
    return ParticleMeasure(std::move(pts), std::move(ws));
  };
  auto uniform1d = [&](std::vector<double> xs) {
    std::vector<double> ws(xs.size(), 1.0 / static_cast<double>(xs.size()));
    return atoms1d(std::move(xs), std::move(ws));
  };
  auto corners = [](std::vector<std::pair<double, double>> pts) {
    std::vector<Vec> out;
    for (auto [x, y] : pts) {
      Vec p(2);
      p << x, y;
      out.push_back(std::move(p));
    }
    return from_tokens(out);
  };

  std::mt19937_64 rng(seed);
  std::vector<std::pair<ParticleMeasure, ParticleMeasure>> designed;
  designed.emplace_back(dirac({0.0}), dirac({1.0}));
  designed.emplace_back(uniform1d({-1.0, 1.0}), dirac({0.0}));  // same mean
  designed.emplace_back(uniform1d({0.0, 1.0 / 3, 2.0 / 3, 1.0}),
                        uniform1d({0.0, 1.0}));
  designed.emplace_back(atoms1d({-1.0, 0.5}, {1.0 / 3, 2.0 / 3}),
                        atoms1d({-0.5, 1.0}, {2.0 / 3, 1.0 / 3}));  // same mean+var
  designed.emplace_back(corners({{0, 0}, {1, 1}}), corners({{0, 1}, {1, 0}}));
  designed.emplace_back(dirac({0.0, 0.0}), dirac({1e-3, 0.0}));
  designed.emplace_back(uniform1d({0.1, 0.4, 0.7}), uniform1d({0.1, 0.4, 0.8}));
  designed.emplace_back(atoms1d({0.0, 1.0}, {0.5, 0.5}),
                        atoms1d({0.0, 1.0}, {0.4, 0.6}));
  designed.emplace_back(random_particle_measure(rng, 6, 3, 1.0),
                        random_particle_measure(rng, 6, 3, 1.0));
  designed.emplace_back(random_weighted_measure(rng, 8, 2, 1.0),
                        random_weighted_measure(rng, 8, 2, 1.0));

  double worst_deficit = 0.0;
  double smallest = 1e300;
  for (std::size_t i = 0; i < designed.size(); ++i) {
    const double probe =
        separation_probe(designed[i].first, designed[i].second, 64, seed + i);
    smallest = std::min(smallest, probe);
    worst_deficit = std::max(worst_deficit, deficit(probe, 1e-6));
  }
  double identical = 0.0;
  for (std::size_t i = 0; i < designed.size(); ++i) {
    const ParticleMeasure copy(designed[i].first.points(),
                               designed[i].first.weights());
    identical = std::max(
        identical, separation_probe(designed[i].first, copy, 64, seed + 100 + i));
  }
  std::vector<CheckResult> out;
  out.push_back(make_check("separation_distinct_pairs_margin", worst_deficit, 0.0,
                           "smallest witness " + fmt(smallest)));
  out.push_back(make_check("separation_identical_pairs_zero", identical, 0.0));
  return out;
}

std::vector<CheckResult> product_mlp_realize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CheckResult> out;

  const ProductMlp phi = build_product_mlp(2, 4.0, 1e-3);
  out.push_back(make_check("product_mlp_certificate", phi.certified_max, 1e-3,
                           "advertised bound " + fmt(phi.eps)));

  const AlgebraElement A = random_algebra(rng, 2, 2, 2, 2, 0.25);
  const auto fixtures = random_pairs(rng, 50, 10, 2, 1.0);
  double c_omega = 0.0;
  for (const auto& [mu, x] : fixtures) {
    for (const Vec& p : mu.points()) c_omega = std::max(c_omega, p.norm());
    c_omega = std::max(c_omega, x.norm());
  }
  const RealizedTransformer rt = realize(A, phi, false, c_omega);

  double exact_gap = 0.0, phi_gap = 0.0, max_pair = 0.0;
  for (const auto& [mu, x] : fixtures) {
    const Vec algebra_value = eval_algebra(A, mu, x);
    const ExactEval exact = realized_eval_exact(rt, mu, x);
    exact_gap = std::max(exact_gap, (exact.value - algebra_value).norm());
    max_pair = std::max(max_pair, exact.max_pair_norm);
    phi_gap = std::max(phi_gap, (realized_eval(rt, mu, x) - algebra_value).norm());
  }
  out.push_back(make_check("realize_exact_mode_matches_algebra", exact_gap, 1e-10,
                           "max product pair norm " + fmt(max_pair) + " <= radius " +
                               fmt(rt.radius)));
  out.push_back(make_check("realize_phi_gap_within_bound", phi_gap,
                           rt.phi_eps * rt.propagation_factor,
                           "propagation factor " + fmt(rt.propagation_factor)));
  return out;
}

CheckResult size_contract_structural(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  int violations = 0;
  std::string note;
  for (const int dp : {1, 2, 4}) {
    for (const bool masked : {false, true}) {
      const int d = 1 + dp % 3;
      const AlgebraElement A = random_algebra(rng, d, dp, 2, 2, 0.3);
      const ProductMlp phi = build_product_mlp(dp, 4.0, 1e-2);
      const RealizedTransformer rt = realize(A, phi, masked, 1.5);
      try {
        check_size_contract(rt);
      } catch (const std::exception& e) {
        ++violations;
        note = e.what();
      }
      const std::size_t expected =
          static_cast<std::size_t>(A.terms * A.factors) + 2;
      if (rt.stack.attention_count() != expected) {
        ++violations;
        note = "attention layer count != N*T+2";
      }
    }
  }
  return make_check("realized_size_contract", static_cast<double>(violations), 0.0,
                    note.empty() ? "d_in <= d+3d', d_head=k=1, H <= d', N*T+2 layers"
                                 : note);
}

namespace {

struct SweepResult {
  std::vector<double> errors;  // held-out sup error per N
  double final_error = 0.0;
  double monotonicity_deficit = 0.0;
};

SweepResult sweep_fit(const InContextTarget& target, int d, int dprime,
                      FitConfig cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto train = random_pairs(rng, 160, 12, d, 1.0);
  const auto holdout = random_pairs(rng, 40, 12, d, 1.0);
  SweepResult sweep;
  for (const int n : {1, 2, 4, 8}) {
    cfg.terms = n;
    const FitResult res = fit(target, d, dprime, cfg, train, holdout, seed);
    sweep.errors.push_back(res.holdout_max_error);
  }
  sweep.final_error = sweep.errors.back();
  for (std::size_t i = 0; i + 1 < sweep.errors.size(); ++i)
    sweep.monotonicity_deficit = std::max(
        sweep.monotonicity_deficit, sweep.errors[i + 1] - sweep.errors[i]);
  sweep.monotonicity_deficit = std::max(0.0, sweep.monotonicity_deficit);
  return sweep;
}

std::string errors_note(const std::vector<double>& errors) {
  std::string note = "errors over N in {1,2,4,8}:";
  for (double e : errors) note += " " + fmt(e);
  return note;
}

}  // namespace

std::vector<CheckResult> universality_demonstration(std::uint64_t seed) {
  std::vector<CheckResult> out;
  const int d = 2;

  const InContextTarget identity = [](const ParticleMeasure&, const Vec& x) {
    return x;
  };
  const InContextTarget mean_shift = [](const ParticleMeasure& mu, const Vec& x) {
    Vec m = Vec::Zero(x.size());
    for (std::size_t i = 0; i < mu.size(); ++i) m += mu.weight(i) * mu.point(i);
    return Vec(x + m);
  };
  // coordinatewise softmax-weighted mean at temperature 2
  const InContextTarget softmax_mean = [](const ParticleMeasure& mu, const Vec& x) {
    Vec out(x.size());
    for (Eigen::Index h = 0; h < x.size(); ++h) {
      double m = -1e300;
      for (std::size_t i = 0; i < mu.size(); ++i)
        m = std::max(m, 2.0 * x(h) * mu.point(i)(h));
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < mu.size(); ++i) {
        const double e = mu.weight(i) * std::exp(2.0 * x(h) * mu.point(i)(h) - m);
        num += e * mu.point(i)(h);
        den += e;
      }
      out(h) = num / den;
    }
    return out;
  };

  FitConfig cfg;
  cfg.factors = 1;
  cfg.pool_size = 192;

  struct Named {
    const char* name;
    const InContextTarget& target;
    double tol;
  };
  const Named targets[] = {{"identity", identity, 1e-6},
                           {"mean_shift", mean_shift, 1e-6},
                           {"softmax_mean_temp2", softmax_mean, 1e-6}};
  for (const Named& t : targets) {
    const SweepResult sweep = sweep_fit(t.target, d, d, cfg, seed);
    out.push_back(make_check(std::string("universality_") + t.name + "_error",
                             sweep.final_error, t.tol, errors_note(sweep.errors)));
    out.push_back(make_check(std::string("universality_") + t.name + "_monotone",
                             sweep.monotonicity_deficit, 1e-8,
                             "max held-out error increase across N"));
  }

  // causal running mean, fitted through the masked reduction
  InContextMapHandle causal_mean;
  causal_mean.d = d;
  causal_mean.dprime = d;
  causal_mean.name = "causal-running-mean";
  causal_mean.eval = [](const SpaceTimeMeasure& mu, const Vec& x, double t) {
    const ParticleMeasure window = mask(mu, t).space_marginal();
    Vec m = Vec::Zero(x.size());
    for (std::size_t i = 0; i < window.size(); ++i)
      m += window.weight(i) * window.point(i);
    return Vec(x + m);
  };

  const std::vector<CausalFixture> train = lip_causal_fixtures(seed + 11, 120, d);
  const std::vector<CausalFixture> holdout = lip_causal_fixtures(seed + 12, 40, d);
  const std::vector<IdentFixture> ident = lip_ident_fixtures(seed + 13, 12, d);
  MaskedFitConfig mcfg;
  mcfg.fit = cfg;
  std::vector<double> errors;
  for (const int n : {1, 2, 4, 8}) {
    mcfg.fit.terms = n;
    const MaskedFitResult res =
        fit_masked(causal_mean, mcfg, train, holdout, ident, seed);
    errors.push_back(res.holdout_max_error);
  }
  double deficit_mono = 0.0;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i)
    deficit_mono = std::max(deficit_mono, errors[i + 1] - errors[i]);
  out.push_back(make_check("universality_causal_mean_error", errors.back(), 1e-6,
                           errors_note(errors)));
  out.push_back(make_check("universality_causal_mean_monotone",
                           std::max(0.0, deficit_mono), 1e-8,
                           "max held-out error increase across N"));
  return out;
}

std::vector<CheckResult> masked_continuity(std::uint64_t) {
  const SpaceTimeMeasure mu = geometric_time_fixture(12, 0.3);
  std::vector<double> ts;
  for (int k = 1; k <= 12; ++k) ts.push_back(std::pow(2.0, -k));
  const std::vector<double> gaps = masked_limit_probe(mu, ts);
  double increase = 0.0;
  for (std::size_t i = 0; i + 1 < gaps.size(); ++i)
    increase = std::max(increase, gaps[i + 1] - gaps[i]);
  std::vector<CheckResult> out;
  out.push_back(make_check("masked_continuity_final_gap", gaps.back(), 1e-8,
                           "gap at t = 2^-12, starts at " + fmt(gaps.front())));
  out.push_back(make_check("masked_continuity_nonincreasing",
                           std::max(0.0, increase), 0.0));
  return out;
}

std::vector<CheckResult> masked_convergence(std::uint64_t) {
  std::vector<CheckResult> out;
  for (int which = 1; which <= 3; ++which) {
    std::vector<double> dists;
    for (const int n : {16, 64, 256}) {
      const ConvergencePoint cp = convergence_fixture(which, n);
      dists.push_back(spacetime_wasserstein(mask(cp.mu_n, cp.t_n),
                                            mask(cp.mu_limit, cp.t_limit), 2));
    }
    double increase = 0.0;
    for (std::size_t i = 0; i + 1 < dists.size(); ++i)
      increase = std::max(increase, dists[i + 1] - dists[i]);
    const std::string tag = "masked_convergence_case" + std::to_string(which);
    out.push_back(make_check(tag + "_final", dists.back(), 1e-2,
                             "W2 over n in {16,64,256}: " + fmt(dists[0]) + " " +
                                 fmt(dists[1]) + " " + fmt(dists[2])));
    out.push_back(make_check(tag + "_decreasing", std::max(0.0, increase), 0.0));
  }
  return out;
}

CheckResult wasserstein_oracle_agreement(std::uint64_t seed, int pair_count) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> ndist(1, 32);
  double worst = 0.0;
  for (int i = 0; i < pair_count; ++i) {
    const int n = ndist(rng);
    // half the pairs share the size to exercise the assignment route
    const int m = (i % 2 == 0) ? n : ndist(rng);
    const ParticleMeasure mu = random_particle_measure(rng, n, 1, 1.0);
    const ParticleMeasure nu = random_particle_measure(rng, m, 1, 1.0);
    for (const int p : {1, 2}) {
      const double lp = wasserstein(mu, nu, p).value;
      const double oracle = wasserstein_1d(mu, nu, p);
      worst = std::max(worst, std::abs(lp - oracle));
    }
  }
  return make_check("wasserstein_1d_oracle_agreement", worst, 1e-9,
                    std::to_string(pair_count) + " uniform 1-D pairs, p in {1,2}");
}

std::vector<CheckResult> measure_invariants(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CheckResult> out;

  // push-forward duality over the default dictionary
  double duality = 0.0;
  for (int i = 0; i < 10; ++i) {
    const int d = 1 + i % 3;
    const ParticleMeasure mu = random_weighted_measure(rng, 2 + i, d, 1.0);
    Mat T = Mat::NullaryExpr(d, d, [&](Eigen::Index, Eigen::Index) {
      return std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    });
    auto map = [&T](const Vec& y) { return Vec(T * y); };
    const ParticleMeasure pushed = pushforward(mu, map);
    for (const TestFunction& f : default_dictionary(d)) {
      const double lhs = integrate(pushed, f.f);
      const double rhs =
          integrate(mu, [&](const Vec& y) { return f.f(map(y)); });
      duality = std::max(duality, std::abs(lhs - rhs));
    }
  }
  out.push_back(make_check("pushforward_duality", duality, 1e-12));

  // masking invariants on Lipschitz fixtures
  double idem = 0.0, monotone = 0.0, endpoint_noop = 0.0;
  for (const CausalFixture& f : lip_causal_fixtures(seed + 5, 10, 2)) {
    const SpaceTimeMeasure once = mask(f.mu, f.t);
    const SpaceTimeMeasure twice = mask(once, f.t);
    for (std::size_t i = 0; i < once.size(); ++i) {
      idem = std::max(idem, (once.point(i) - twice.point(i)).lpNorm<Eigen::Infinity>());
      idem = std::max(idem, std::abs(once.time(i) - twice.time(i)));
      idem = std::max(idem, std::abs(once.weight(i) - twice.weight(i)));
    }
    const double s = f.t * 0.6;
    if (time_marginal(f.mu).mass_up_to(s) > 0.0) {
      const SpaceTimeMeasure nested = mask(mask(f.mu, f.t), s);
      const SpaceTimeMeasure direct = mask(f.mu, s);
      for (std::size_t i = 0; i < direct.size(); ++i)
        monotone =
            std::max(monotone, std::abs(nested.weight(i) - direct.weight(i)));
    }
    const double e = end_point(time_marginal(once));
    const SpaceTimeMeasure again = mask(f.mu, e);
    for (std::size_t i = 0; i < once.size(); ++i)
      endpoint_noop =
          std::max(endpoint_noop, std::abs(once.weight(i) - again.weight(i)));
  }
  out.push_back(make_check("mask_idempotence", idem, 1e-12));
  out.push_back(make_check("mask_monotone_consistency", monotone, 1e-12));
  out.push_back(make_check("mask_endpoint_noop", endpoint_noop, 1e-12));

  // disintegration round trip
  double roundtrip = 0.0;
  for (int i = 0; i < 8; ++i) {
    const CausalFixture f = lip_causal_fixtures(seed + 6 + i, 1, 3).front();
    const SpaceTimeMeasure re = recombine(disintegrate(f.mu));
    // both sides are time-sorted with stable inner order
    std::vector<std::size_t> order(f.mu.size());
    for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return f.mu.time(a) < f.mu.time(b);
    });
    for (std::size_t j = 0; j < order.size(); ++j) {
      roundtrip = std::max(roundtrip, (f.mu.point(order[j]) - re.point(j))
                                          .lpNorm<Eigen::Infinity>());
      roundtrip = std::max(roundtrip, std::abs(f.mu.weight(order[j]) - re.weight(j)));
    }
  }
  out.push_back(make_check("disintegration_roundtrip", roundtrip, 1e-12));
  return out;
}

std::vector<CheckResult> metric_invariants(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CheckResult> out;
  double symmetry = 0.0, triangle = 0.0, jensen = 0.0, feasibility = 0.0,
         lifted = 0.0, dual = 0.0;
  for (int i = 0; i < 12; ++i) {
    const int d = 1 + i % 3;
    const ParticleMeasure a = random_weighted_measure(rng, 3 + i % 6, d, 1.0);
    const ParticleMeasure b = random_weighted_measure(rng, 2 + i % 5, d, 1.0);
    const ParticleMeasure c = random_weighted_measure(rng, 2 + i % 4, d, 1.0);
    for (const int p : {1, 2}) {
      const WassersteinResult ab = wasserstein(a, b, p);
      const WassersteinResult ba = wasserstein(b, a, p);
      symmetry = std::max(symmetry, std::abs(ab.value - ba.value));
      const double ac = wasserstein(a, c, p).value;
      const double cb = wasserstein(c, b, p).value;
      triangle = std::max(triangle, ab.value - (ac + cb));
      feasibility = std::max(feasibility, plan_feasibility_error(ab.plan, a, b));
    }
    jensen = std::max(jensen, wasserstein(a, b, 1).value - wasserstein(a, b, 2).value);

    // constant-time lift agrees with the flat metric
    std::vector<double> zeros_a(a.size(), 0.25), zeros_b(b.size(), 0.25);
    const SpaceTimeMeasure sa(a.points(), zeros_a, a.weights());
    const SpaceTimeMeasure sb(b.points(), zeros_b, b.weights());
    lifted = std::max(lifted, std::abs(spacetime_wasserstein(sa, sb, 2) -
                                       wasserstein(a, b, 2).value));

    // dual bound for 1-Lipschitz test functions (coordinates)
    TestDictionary coords;
    for (int k = 0; k < d; ++k)
      coords.push_back({"x" + std::to_string(k),
                        [k](const Vec& x) { return x(k); }});
    dual = std::max(dual, weakstar_gap(a, b, coords) - wasserstein(a, b, 1).value);
  }
  out.push_back(make_check("wasserstein_symmetry", symmetry, 1e-9));
  out.push_back(make_check("wasserstein_triangle", std::max(0.0, triangle), 1e-9));
  out.push_back(make_check("w1_le_w2", std::max(0.0, jensen), 1e-9));
  out.push_back(make_check("transport_plan_feasibility", feasibility, 1e-9));
  out.push_back(make_check("spacetime_flat_consistency", lifted, 1e-12));
  out.push_back(make_check("weakstar_dual_bound", std::max(0.0, dual), 1e-9));
  return out;
}

std::vector<CheckResult> attention_invariants(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CheckResult> out;

  double weight_sum = 0.0, weight_neg = 0.0;
  double single_atom = 0.0, masked_window = 0.0, commutation = 0.0;
  double smooth_ratio = 0.0;
  for (int i = 0; i < 10; ++i) {
    const int d = 2 + i % 3;
    const MultiHeadParams theta = random_attention(rng, d, 1 + i % 3, 2, 0.5);
    const ParticleMeasure mu = random_weighted_measure(rng, 4 + i, d, 1.0);
    const Vec x = random_point(rng, d, 1.0);

    const std::vector<double> w =
        attention_weights(theta.heads[0].params, theta.k, mu, x);
    double sum = 0.0;
    for (double wi : w) {
      sum += wi;
      weight_neg = std::max(weight_neg, -wi);
    }
    weight_sum = std::max(weight_sum, std::abs(sum - 1.0));

    // single atom: gamma = x + sum_h W V y
    const ParticleMeasure atom = from_tokens({mu.point(0)});
    Vec expect = x;
    for (const auto& h : theta.heads)
      expect += h.W * (h.params.V * mu.point(0));
    single_atom = std::max(
        single_atom,
        (gamma_unmasked(theta, atom, x) - expect).lpNorm<Eigen::Infinity>());

    // gamma_masked equals itself on the masked window
    const CausalFixture f = lip_causal_fixtures(seed + 40 + i, 1, d).front();
    masked_window = std::max(
        masked_window,
        (gamma_masked(theta, f.mu, x, f.t) -
         gamma_masked(theta, mask(f.mu, f.t), x, f.t))
            .lpNorm<Eigen::Infinity>());

    // mask / push-forward commutation on the space push of gamma
    auto push_map = [&theta, &f](const SpaceTimeMeasure& ctx) {
      return pushforward_space(ctx, [&](const Vec& y, double s) {
        return gamma_masked(theta, ctx, y, s);
      });
    };
    const SpaceTimeMeasure lhs = mask(push_map(f.mu), f.t);
    const SpaceTimeMeasure rhs = push_map(mask(f.mu, f.t));
    for (std::size_t j = 0; j < lhs.size(); ++j) {
      commutation = std::max(
          commutation, (lhs.point(j) - rhs.point(j)).lpNorm<Eigen::Infinity>());
      commutation = std::max(commutation, std::abs(lhs.weight(j) - rhs.weight(j)));
      commutation = std::max(commutation, std::abs(lhs.time(j) - rhs.time(j)));
    }

    // smoothness probe: one-particle perturbation of size 1e-3
    std::vector<Vec> bumped = mu.points();
    bumped[0] = bumped[0] + Vec::Constant(d, 1e-3 / std::sqrt(double(d)));
    const ParticleMeasure mu_bumped(bumped, mu.weights());
    const double delta =
        (gamma_unmasked(theta, mu_bumped, x) - gamma_unmasked(theta, mu, x)).norm();
    smooth_ratio = std::max(smooth_ratio, delta / 1e-3);
  }
  out.push_back(make_check("softmax_weights_normalized", weight_sum, 1e-12));
  out.push_back(make_check("softmax_weights_nonnegative", weight_neg, 0.0));
  out.push_back(make_check("gamma_single_atom_closed_form", single_atom, 1e-12));
  out.push_back(make_check("gamma_masked_window_restriction", masked_window, 1e-10));
  out.push_back(make_check("mask_pushforward_commutation", commutation, 1e-10));
  const bool finite = std::isfinite(smooth_ratio);
  out.push_back(make_check("gamma_smoothness_probe_finite", finite ? 0.0 : 1.0, 0.0,
                           "local ratio estimate " + fmt(smooth_ratio)));
  return out;
}

}  // namespace checks

std::vector<CheckResult> run_verify_suite(std::uint64_t seed) {
  std::vector<CheckResult> all;
  auto add = [&all](const std::vector<CheckResult>& batch) {
    all.insert(all.end(), batch.begin(), batch.end());
  };
  all.push_back(checks::unmasked_discrete_equivalence(seed, 100));
  all.push_back(checks::masked_discrete_equivalence(seed + 1, 100));
  all.push_back(checks::permutation_equivariance(seed + 2, 50));
  add(checks::causality_identifiability(seed + 3));
  all.push_back(checks::elementary_identity(seed + 4, 200));
  all.push_back(checks::vector_lift_identity(seed + 5, 100));
  all.push_back(checks::laplace_recursion(seed + 6, 20));
  add(checks::separation_witness(seed + 7));
  add(checks::product_mlp_realize(seed + 8));
  all.push_back(checks::size_contract_structural(seed + 9));
  add(checks::universality_demonstration(seed + 10));
  add(checks::masked_continuity(seed + 11));
  add(checks::masked_convergence(seed + 12));
  all.push_back(checks::wasserstein_oracle_agreement(seed + 13, 50));
  add(checks::measure_invariants(seed + 14));
  add(checks::metric_invariants(seed + 15));
  add(checks::attention_invariants(seed + 16));
  return all;
}

}  // namespace ictx
