#include "ictx/causal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ictx {

std::string causality_report_json(const CausalityReport& report) {
  auto escape = [](const std::string& s) {
    std::string out;
    for (char ch : s)
      if (ch == '"' || ch == '\\') {
        out += '\\';
        out += ch;
      } else {
        out += ch;
      }
    return out;
  };
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "{\"causality_residual\": %.17g, "
                "\"identifiability_residual\": %.17g, "
                "\"fixture_count\": %d, "
                "\"worst_causality_fixture\": \"%s\", "
                "\"worst_identifiability_fixture\": \"%s\"}",
                report.causality_residual, report.identifiability_residual,
                report.fixture_count,
                escape(report.worst_causality_fixture).c_str(),
                escape(report.worst_identifiability_fixture).c_str());
  return buf;
}

InContextMapHandle handle_from_stack(const LayerStack& stack, std::string name) {
  stack.validate();
  InContextMapHandle handle;
  handle.d = stack.input_dim();
  handle.dprime = stack.output_dim();
  handle.name = std::move(name);
  handle.eval = [stack](const SpaceTimeMeasure& mu, const Vec& x, double t) {
    return compose_masked(stack, mu, x, t);
  };
  return handle;
}

Vec reduced_eval(const InContextMapHandle& map, const SpaceTimeMeasure& mu,
                 const Vec& x) {
  return map.eval(mu, x, end_point(time_marginal(mu)));
}

CausalityReport check_causal(const InContextMapHandle& map,
                             const std::vector<CausalFixture>& fixtures) {
  CausalityReport report;
  for (const CausalFixture& f : fixtures) {
    const Vec full = map.eval(f.mu, f.x, f.t);
    const Vec windowed = map.eval(mask(f.mu, f.t), f.x, f.t);
    const double res = (full - windowed).norm();
    if (res > report.causality_residual) {
      report.causality_residual = res;
      report.worst_causality_fixture = f.id;
    }
    ++report.fixture_count;
  }
  return report;
}

CausalityReport check_identifiable(const InContextMapHandle& map,
                                   const std::vector<IdentFixture>& fixtures) {
  CausalityReport report;
  for (const IdentFixture& f : fixtures) {
    const SpaceTimeMeasure at_t = mask(f.mu, f.t);
    const SpaceTimeMeasure at_tp = mask(f.mu, f.t_prime);
    const double res =
        (map.eval(at_t, f.x, f.t) - map.eval(at_tp, f.x, f.t_prime)).norm();
    if (res > report.identifiability_residual) {
      report.identifiability_residual = res;
      report.worst_identifiability_fixture = f.id;
    }
    ++report.fixture_count;
  }
  return report;
}

std::vector<double> masked_limit_probe(const SpaceTimeMeasure& mu,
                                       const std::vector<double>& t_sequence) {
  if (sigma_mass(mu) <= 0.0)
    throw std::invalid_argument("masked_limit_probe: no time-0 atom");
  const ParticleMeasure at_zero = mask(mu, 0.0).as_particles();
  const TestDictionary dict = default_dictionary(mu.dim() + 1);
  std::vector<double> gaps;
  gaps.reserve(t_sequence.size());
  for (double t : t_sequence)
    gaps.push_back(weakstar_gap(mask(mu, t).as_particles(), at_zero, dict));
  return gaps;
}

StabilityReport identifiability_stability_probe(
    const std::vector<InContextMapHandle>& sequence,
    const InContextMapHandle& limit,
    const std::vector<CausalFixture>& gap_fixtures,
    const std::vector<IdentFixture>& ident_fixtures) {
  StabilityReport report;
  double best_gap = std::numeric_limits<double>::infinity();
  for (const InContextMapHandle& approx : sequence) {
    double gap = 0.0;
    for (const CausalFixture& f : gap_fixtures)
      gap = std::max(gap,
                     (approx.eval(f.mu, f.x, f.t) - limit.eval(f.mu, f.x, f.t)).norm());
    report.uniform_gaps.push_back(gap);
    best_gap = std::min(best_gap, gap);
  }
  report.limit_residual =
      check_identifiable(limit, ident_fixtures).identifiability_residual;
  report.bound = 2.0 * best_gap;
  report.within_bound = report.limit_residual <= report.bound + 1e-12;
  return report;
}

MaskedFitResult fit_masked(const InContextMapHandle& target,
                           const MaskedFitConfig& config,
                           const std::vector<CausalFixture>& train,
                           const std::vector<CausalFixture>& holdout,
                           const std::vector<IdentFixture>& ident_fixtures,
                           std::uint64_t seed) {
  if (train.empty()) throw std::invalid_argument("fit_masked: empty training set");

  MaskedFitResult result;
  result.precheck = check_causal(target, train);
  const CausalityReport ident = check_identifiable(target, ident_fixtures);
  result.precheck.identifiability_residual = ident.identifiability_residual;
  result.precheck.worst_identifiability_fixture = ident.worst_identifiability_fixture;
  if (result.precheck.causality_residual > config.precheck_tol)
    throw std::runtime_error(
        "fit_masked: target is not causal (residual " +
        std::to_string(result.precheck.causality_residual) +
        "); this hypothesis is sharp and cannot be weakened");
  if (result.precheck.identifiability_residual > config.precheck_tol)
    throw std::runtime_error(
        "fit_masked: target is not identifiable (residual " +
        std::to_string(result.precheck.identifiability_residual) +
        "); this hypothesis is sharp and cannot be weakened");

  // Reduce: the fit happens on (space marginal of mu_t, x) pairs.
  std::vector<std::pair<ParticleMeasure, Vec>> train_pairs, holdout_pairs;
  std::vector<Vec> train_targets, holdout_targets;
  double c_omega = 0.0;
  for (const CausalFixture& f : train) {
    ParticleMeasure reduced = mask(f.mu, f.t).space_marginal();
    for (const Vec& p : reduced.points()) c_omega = std::max(c_omega, p.norm());
    c_omega = std::max(c_omega, f.x.norm());
    train_targets.push_back(target.eval(f.mu, f.x, f.t));
    train_pairs.emplace_back(std::move(reduced), f.x);
  }
  for (const CausalFixture& f : holdout) {
    holdout_targets.push_back(target.eval(f.mu, f.x, f.t));
    holdout_pairs.emplace_back(mask(f.mu, f.t).space_marginal(), f.x);
  }

  FitResult fitres =
      fit_values(target.d, target.dprime, config.fit, train_pairs, train_targets,
                 holdout_pairs, holdout_targets, seed);

  const double radius = phi_radius_for(fitres.algebra, c_omega);
  const ProductMlp phi =
      build_product_mlp(target.dprime, radius, config.phi_eps);
  result.transformer = realize(fitres.algebra, phi, /*masked=*/true, c_omega);
  result.train_max_error = fitres.train_max_error;
  result.holdout_max_error = fitres.holdout_max_error;
  return result;
}

}  // namespace ictx
