// Causality and identifiability machinery for space-time in-context maps:
// reduced mappings, residual checks against masked restriction, the
// masked-measure limit probe, identifiability stability, and the masked
// fitting wrapper that works on the reduced space (mu_t, x).

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ictx/transport.hpp"
#include "ictx/universality.hpp"

namespace ictx {

/// An evaluable space-time in-context map (mu, x, t) -> R^{d'}.
struct InContextMapHandle {
  std::function<Vec(const SpaceTimeMeasure&, const Vec&, double)> eval;
  int d = 0;
  int dprime = 0;
  std::string name;
};

/// Wraps a masked layer stack as a space-time map.
InContextMapHandle handle_from_stack(const LayerStack& stack, std::string name);

struct CausalityReport {
  double causality_residual = 0.0;
  double identifiability_residual = 0.0;
  int fixture_count = 0;
  std::string worst_causality_fixture;
  std::string worst_identifiability_fixture;
};

/// JSON-syntax text form with fixture identifiers for reproduction.
std::string causality_report_json(const CausalityReport& report);

struct CausalFixture {
  SpaceTimeMeasure mu;
  Vec x;
  double t = 1.0;
  std::string id;
};

/// A pair (t, t') with no marginal mass in (t, t'], so mu_t = mu_{t'}.
struct IdentFixture {
  SpaceTimeMeasure mu;
  Vec x;
  double t = 0.0;
  double t_prime = 0.0;
  std::string id;
};

/// Evaluation at the end point of the context's time support.
Vec reduced_eval(const InContextMapHandle& map, const SpaceTimeMeasure& mu,
                 const Vec& x);

/// max over fixtures of |map(mu,x,t) - map(mask(mu,t),x,t)|.
CausalityReport check_causal(const InContextMapHandle& map,
                             const std::vector<CausalFixture>& fixtures);

/// max over pairs of |map(mu_t,x,t) - map(mu_t',x,t')|; vacuous (count 0)
/// when no pairs are given.
CausalityReport check_identifiable(const InContextMapHandle& map,
                                   const std::vector<IdentFixture>& fixtures);

/// Weak* gaps between mask(mu, t_k) and mask(mu, 0) over the default
/// dictionary on the space-time lift. Requires a time-0 atom.
std::vector<double> masked_limit_probe(const SpaceTimeMeasure& mu,
                                       const std::vector<double>& t_sequence);

struct StabilityReport {
  std::vector<double> uniform_gaps;  // sup |map_n - limit| per sequence entry
  double limit_residual = 0.0;       // identifiability residual of the limit
  double bound = 0.0;                // 2 * smallest uniform gap
  bool within_bound = false;
};

/// Checks the stability chain: the limit map's identifiability residual
/// must not exceed twice the observed uniform gap.
StabilityReport identifiability_stability_probe(
    const std::vector<InContextMapHandle>& sequence,
    const InContextMapHandle& limit,
    const std::vector<CausalFixture>& gap_fixtures,
    const std::vector<IdentFixture>& ident_fixtures);

struct MaskedFitConfig {
  FitConfig fit;
  double phi_eps = 1e-4;
  double precheck_tol = 1e-8;
};

struct MaskedFitResult {
  RealizedTransformer transformer;  // masked stack, Theorem-2 size contract
  double train_max_error = 0.0;
  double holdout_max_error = 0.0;   // exact-product route on held-out triples
  CausalityReport precheck;
};

/// Fits the target on the reduced space: training pairs are
/// (mask(mu,t) space marginal, x) with targets map(mu,x,t). The target
/// must pass the causality and identifiability prechecks; this hypothesis
/// is sharp, so failure is an error carrying the residual.
MaskedFitResult fit_masked(const InContextMapHandle& target,
                           const MaskedFitConfig& config,
                           const std::vector<CausalFixture>& train,
                           const std::vector<CausalFixture>& holdout,
                           const std::vector<IdentFixture>& ident_fixtures,
                           std::uint64_t seed);

}  // namespace ictx
