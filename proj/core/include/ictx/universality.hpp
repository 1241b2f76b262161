// The constructive universal-approximation pipeline: scalar elementary
// in-context maps, the cylindrical algebra they span, Laplace-transform
// separation probes, the vector lift to d'-head attention layers, a
// certified product MLP, the exact deep-transformer realization of the
// algebra, and a random-feature fitter.

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ictx/attention.hpp"
#include "ictx/measure.hpp"

namespace ictx {

/// Parameters (a, b, c, v) of one scalar elementary in-context map.
struct ElementaryParams {
  Vec a;
  double b = 0.0;
  double c = 0.0;
  double v = 0.0;
};

/// A cylindrical function: for each output coordinate h, a sum over N
/// terms of products over T factors of elementary maps.
struct AlgebraElement {
  int d = 0;       // input token dimension
  int dprime = 0;  // output dimension
  int terms = 0;   // N
  int factors = 0; // T
  // Flattened grid, indexed [h][n][t].
  std::vector<ElementaryParams> params;

  const ElementaryParams& at(int h, int n, int t) const {
    return params[static_cast<std::size_t>((h * terms + n) * factors + t)];
  }
  ElementaryParams& at(int h, int n, int t) {
    return params[static_cast<std::size_t>((h * terms + n) * factors + t)];
  }
  void validate() const;
};

/// Feed-forward approximation of the coordinatewise product on the ball
/// of radius `radius` in R^{2d'}. `eps` is the advertised sup error
/// (a rigorous interpolation bound); `certified_max` is the worst error
/// seen by the sampling certificate.
struct ProductMlp {
  MlpParams mlp;
  int dprime = 0;
  double radius = 0.0;
  double eps = 0.0;
  double certified_max = 0.0;
};

/// A deep transformer realizing an algebra element on the state space
/// R^{d+3d'} with blocks (x, u, p, w).
struct RealizedTransformer {
  LayerStack stack;
  AlgebraElement algebra;  // kept for the exact-product evaluation route
  int d = 0;
  int dprime = 0;
  bool masked = false;
  double phi_eps = 0.0;             // certified Phi error
  double gamma_bound = 0.0;         // bound on factor magnitudes (C_Gamma)
  double propagation_factor = 0.0;  // output gap <= phi_eps * this factor
  double radius = 0.0;              // Phi validity radius used
};

// --- elementary maps and the algebra ------------------------------------

/// Scalar elementary map value: affine part plus a tilted context average.
double gamma_elementary(const ElementaryParams& lambda, const ParticleMeasure& mu,
                        const Vec& x);

/// The same map assembled as affine-then-1D-single-head-attention; used to
/// confirm the two routes coincide.
LayerStack elementary_as_stack(const ElementaryParams& lambda);

struct MatchReport {
  double max_deviation = 0.0;
  int fixture_count = 0;
};

/// Evaluates gamma_elementary against its attention-composition form on
/// the given fixtures.
MatchReport equals_attention_form(
    const ElementaryParams& lambda,
    const std::vector<std::pair<ParticleMeasure, Vec>>& fixtures);

/// Vector value of an algebra element: sums of coordinatewise products.
Vec eval_algebra(const AlgebraElement& A, const ParticleMeasure& mu, const Vec& x);

/// Sum and coordinatewise product in the algebra (N adds, T concatenates).
AlgebraElement algebra_sum(const AlgebraElement& A, const AlgebraElement& B);
AlgebraElement algebra_product(const AlgebraElement& A, const AlgebraElement& B);

// --- Laplace-transform separation ----------------------------------------

/// Generalized Laplace-like transform L(mu)(a, c).
double laplace(const ParticleMeasure& mu, const Vec& a, double c);

/// k-th tilted moment ratio L_k(mu)(c) for 1-D measures.
double laplace_k(const ParticleMeasure& mu, double c, int k);

/// Max over sampled (a, c) of |L(mu) - L(nu)|; a numerical separation
/// witness, zero for identical measures.
double separation_probe(const ParticleMeasure& mu, const ParticleMeasure& nu,
                        int samples, std::uint64_t seed);

// --- vector lift ----------------------------------------------------------

/// One lifted factor: a d'-head attention on R^{d'} plus the affine map
/// R^d -> R^{d'} it composes with.
struct LiftedFactor {
  MultiHeadParams attention;
  MlpParams affine;
  int term = 0;    // n index
  int factor = 0;  // t index
};

/// Builds the (t, n)-indexed attention/affine pairs whose composition
/// reproduces the per-coordinate elementary values of A.
std::vector<LiftedFactor> lift_to_vector(const AlgebraElement& A);

/// Value of one lifted factor via the composition rule (for checks).
Vec lifted_factor_value(const LiftedFactor& f, const ParticleMeasure& mu,
                        const Vec& x);

// --- product MLP ----------------------------------------------------------

/// Coordinatewise product via polarization with piecewise-linear squares.
/// Throws when the segment budget cannot reach eps.
ProductMlp build_product_mlp(int dprime, double radius, double eps);

/// Exact product map evaluated through the MLP (first d' inputs times the
/// last d').
Vec product_mlp_eval(const ProductMlp& phi, const Vec& x, const Vec& y);

// --- realization -----------------------------------------------------------

/// Assembles the full deep transformer for A with Phi as the product
/// surrogate. When `masked` is set, attention layers carry causal
/// semantics (the construction is otherwise identical). `c_omega` is the
/// domain bound sup|x| used for the reported propagation bound; when 0,
/// the Phi radius stands in as a conservative surrogate.
RealizedTransformer realize(const AlgebraElement& A, const ProductMlp& phi,
                            bool masked = false, double c_omega = 0.0);

/// Evaluation through the realized layer stack.
Vec realized_eval(const RealizedTransformer& rt, const ParticleMeasure& mu,
                  const Vec& x);
Vec realized_eval_masked(const RealizedTransformer& rt, const SpaceTimeMeasure& mu,
                         const Vec& x, double t);

/// Wiring-exact evaluation: same attention layers and block schedule, but
/// coordinatewise products computed exactly instead of through Phi.
/// `max_pair_norm` is the largest |(u, p)| pair fed to a product, for
/// radius accounting; it is reported, never clipped.
struct ExactEval {
  Vec value;
  double max_pair_norm = 0.0;
};
ExactEval realized_eval_exact(const RealizedTransformer& rt,
                              const ParticleMeasure& mu, const Vec& x);
ExactEval realized_eval_exact_masked(const RealizedTransformer& rt,
                                     const SpaceTimeMeasure& mu, const Vec& x,
                                     double t);

/// Size contract of the main theorems: every attention layer satisfies
/// d_in <= d+3d', d_head = k = 1, H <= d'. Throws on violation.
void check_size_contract(const RealizedTransformer& rt);

/// Bound C_Gamma on the magnitude of lifted factor values over contexts
/// with points bounded by c_omega.
double gamma_magnitude_bound(const AlgebraElement& A, double c_omega);

/// Default Phi radius: the pair-magnitude bound implied by C_Gamma with
/// 10% headroom.
double phi_radius_for(const AlgebraElement& A, double c_omega);

// --- fitting ----------------------------------------------------------------

/// Unmasked fitting target: a map (mu, x) -> R^{d'}.
using InContextTarget = std::function<Vec(const ParticleMeasure&, const Vec&)>;

struct FitConfig {
  int terms = 4;    // N
  int factors = 1;  // T
  int pool_size = 256;
  std::vector<double> a_norms = {0.5, 1.0, 2.0};
  std::vector<double> b_grid = {0.0, 0.5, -0.5, 1.0};
  std::vector<double> c_grid = {0.0, 1.0, -1.0, 2.0, -2.0};
  std::vector<double> v_grid = {0.0, 1.0};
  double ridge = 1e-10;
};

struct FitResult {
  AlgebraElement algebra;
  double train_max_error = 0.0;    // sup error over training pairs
  double holdout_max_error = 0.0;  // sup error over held-out pairs
};

/// Ridge-regularized greedy random-feature fit of the target on the given
/// training pairs; deterministic given the seed. Throws on singular
/// normal equations with a hint to raise the ridge weight.
FitResult fit(const InContextTarget& target, int d, int dprime,
              const FitConfig& config,
              const std::vector<std::pair<ParticleMeasure, Vec>>& train,
              const std::vector<std::pair<ParticleMeasure, Vec>>& holdout,
              std::uint64_t seed);

/// Same fit with target values supplied directly (one per pair).
FitResult fit_values(int d, int dprime, const FitConfig& config,
                     const std::vector<std::pair<ParticleMeasure, Vec>>& train,
                     const std::vector<Vec>& train_values,
                     const std::vector<std::pair<ParticleMeasure, Vec>>& holdout,
                     const std::vector<Vec>& holdout_values, std::uint64_t seed);

// --- serialization -----------------------------------------------------------

/// One lambda per line with (t, n, h) indices.
void write_algebra(std::ostream& os, const AlgebraElement& A);
AlgebraElement read_algebra(std::istream& is);
void save_algebra(const std::string& path, const AlgebraElement& A);
AlgebraElement load_algebra(const std::string& path);

}  // namespace ictx
