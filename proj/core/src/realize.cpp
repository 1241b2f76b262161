#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "ictx/universality.hpp"

namespace ictx {

namespace {

// Attention layer acting as the identity (zero heads' V and W, residual
// passes the state through).
MultiHeadParams identity_attention(int d_in) {
  MultiHeadParams att;
  att.d_in = d_in;
  att.d_head = 1;
  att.k = 1;
  MultiHeadParams::Head head;
  head.W = Mat::Zero(d_in, 1);
  head.params.K = Mat::Zero(1, d_in);
  head.params.Q = Mat::Zero(1, d_in);
  head.params.V = Mat::Zero(1, d_in);
  att.heads.push_back(std::move(head));
  return att;
}

// The (t, n) attention on the state space (x, u, p, w): every head reads
// and writes only its own u coordinate.
MultiHeadParams block_attention(const AlgebraElement& A, int n, int t) {
  const int d = A.d, dp = A.dprime;
  const int D = d + 3 * dp;
  MultiHeadParams att;
  att.d_in = D;
  att.d_head = 1;
  att.k = 1;
  for (int h = 0; h < dp; ++h) {
    const ElementaryParams& lam = A.at(h, n, t);
    MultiHeadParams::Head head;
    head.W = Mat::Zero(D, 1);
    head.W(d + h, 0) = 1.0;
    head.params.K = Mat::Zero(1, D);
    head.params.K(0, d + h) = 1.0;
    head.params.Q = Mat::Zero(1, D);
    head.params.Q(0, d + h) = lam.c;
    head.params.V = Mat::Zero(1, D);
    head.params.V(0, d + h) = lam.v;
    att.heads.push_back(std::move(head));
  }
  return att;
}

// Affine (A_{t,n}, b_{t,n}) of the lifted factor (t, n).
void factor_affine(const AlgebraElement& A, int n, int t, Mat& Aff, Vec& bff) {
  Aff = Mat::Zero(A.dprime, A.d);
  bff = Vec::Zero(A.dprime);
  for (int h = 0; h < A.dprime; ++h) {
    Aff.row(h) = A.at(h, n, t).a.transpose();
    bff(h) = A.at(h, n, t).b;
  }
}

// Context-free block update as a two-layer MLP. ReLU cannot pass a value
// through unchanged, so x and w travel as (relu(x), relu(-x)) pairs and
// are recombined in the output layer; Phi's hidden layer sits beside them
// acting on (u, p).
//
//   step B (t < T):  (x, u, p, w) -> (x, F_{t+1,n}(x), Phi(u,p), w)
//   step C (t = T):  (x, u, p, w) -> (x, F_{1,n+1}(x), 1,  w + Phi(u,p))
//                    and F := 0, 1 := 0 for the last term.
MlpParams block_update(const AlgebraElement& A, const ProductMlp& phi, int n,
                       int t) {
  const int d = A.d, dp = A.dprime;
  const int D = d + 3 * dp;
  const bool roll = (t == A.factors - 1);   // step C
  const bool last = (n == A.terms - 1);

  const Mat& phiW1 = phi.mlp.layers[0].W;
  const Vec& phib1 = phi.mlp.layers[0].b;
  const Mat& phiW2 = phi.mlp.layers[1].W;
  const Vec& phib2 = phi.mlp.layers[1].b;
  const int hphi = static_cast<int>(phiW1.rows());
  const int hidden = 2 * d + hphi + 2 * dp;

  Mat W1 = Mat::Zero(hidden, D);
  Vec b1 = Vec::Zero(hidden);
  W1.block(0, 0, d, d) = Mat::Identity(d, d);
  W1.block(d, 0, d, d) = -Mat::Identity(d, d);
  W1.block(2 * d, d, hphi, 2 * dp) = phiW1;  // Phi reads (u, p)
  b1.segment(2 * d, hphi) = phib1;
  W1.block(2 * d + hphi, d + 2 * dp, dp, dp) = Mat::Identity(dp, dp);
  W1.block(2 * d + hphi + dp, d + 2 * dp, dp, dp) = -Mat::Identity(dp, dp);

  Mat W2 = Mat::Zero(D, hidden);
  Vec b2 = Vec::Zero(D);
  W2.block(0, 0, d, d) = Mat::Identity(d, d);
  W2.block(0, d, d, d) = -Mat::Identity(d, d);

  // u <- next factor's affine, evaluated on the recombined x
  const bool has_next = !roll || !last;
  if (has_next) {
    Mat Aff;
    Vec bff;
    if (!roll)
      factor_affine(A, n, t + 1, Aff, bff);
    else
      factor_affine(A, n + 1, 0, Aff, bff);
    W2.block(d, 0, dp, d) = Aff;
    W2.block(d, d, dp, d) = -Aff;
    b2.segment(d, dp) = bff;
  }

  if (!roll) {
    // p <- Phi(u, p), w unchanged
    W2.block(d + dp, 2 * d, dp, hphi) = phiW2;
    b2.segment(d + dp, dp) = phib2;
    W2.block(d + 2 * dp, 2 * d + hphi, dp, dp) = Mat::Identity(dp, dp);
    W2.block(d + 2 * dp, 2 * d + hphi + dp, dp, dp) = -Mat::Identity(dp, dp);
  } else {
    // p reseeds to ones (zero for the last term), w accumulates Phi(u, p)
    if (!last) b2.segment(d + dp, dp) = Vec::Ones(dp);
    W2.block(d + 2 * dp, 2 * d, dp, hphi) = phiW2;
    b2.segment(d + 2 * dp, dp) = phib2;
    W2.block(d + 2 * dp, 2 * d + hphi, dp, dp) = Mat::Identity(dp, dp);
    W2.block(d + 2 * dp, 2 * d + hphi + dp, dp, dp) = -Mat::Identity(dp, dp);
  }

  MlpParams mlp;
  mlp.in_dim = D;
  mlp.out_dim = D;
  mlp.layers.push_back({std::move(W1), std::move(b1), Activation::relu});
  mlp.layers.push_back({std::move(W2), std::move(b2), Activation::identity});
  mlp.validate();
  return mlp;
}

}  // namespace

double gamma_magnitude_bound(const AlgebraElement& A, double c_omega) {
  double worst = 0.0;
  for (int n = 0; n < A.terms; ++n)
    for (int t = 0; t < A.factors; ++t) {
      Mat Aff;
      Vec bff;
      factor_affine(A, n, t, Aff, bff);
      double vsum = 0.0;
      for (int h = 0; h < A.dprime; ++h) vsum += std::abs(A.at(h, n, t).v);
      const double affine_bound =
          Aff.operatorNorm() * c_omega + bff.norm();
      worst = std::max(worst, affine_bound * (1.0 + vsum));
    }
  return worst;
}

double phi_radius_for(const AlgebraElement& A, double c_omega) {
  const double c = gamma_magnitude_bound(A, c_omega);
  const double cp = std::pow(std::max(1.0, c), A.factors - 1);
  return 1.1 * std::sqrt(static_cast<double>(A.dprime) * (c * c + cp * cp));
}

RealizedTransformer realize(const AlgebraElement& A, const ProductMlp& phi,
                            bool masked, double c_omega) {
  A.validate();
  if (phi.dprime != A.dprime)
    throw std::invalid_argument("realize: Phi dimension mismatch");
  if (phi.mlp.layers.size() != 2 || phi.mlp.layers[0].act != Activation::relu ||
      phi.mlp.layers[1].act != Activation::identity)
    throw std::invalid_argument("realize: Phi must be relu-hidden + affine-out");

  const int d = A.d, dp = A.dprime;
  const int D = d + 3 * dp;

  LayerStack stack;
  // entry: identity attention on R^d, then seed (x, F_{1,1}(x), 1, 0)
  stack.layers.emplace_back(AttentionLayer{identity_attention(d), masked});
  {
    Mat W = Mat::Zero(D, d);
    Vec b = Vec::Zero(D);
    W.block(0, 0, d, d) = Mat::Identity(d, d);
    Mat Aff;
    Vec bff;
    factor_affine(A, 0, 0, Aff, bff);
    W.block(d, 0, dp, d) = Aff;
    b.segment(d, dp) = bff;
    b.segment(d + dp, dp) = Vec::Ones(dp);
    stack.layers.emplace_back(MlpParams::affine(std::move(W), std::move(b)));
  }
  for (int n = 0; n < A.terms; ++n)
    for (int t = 0; t < A.factors; ++t) {
      stack.layers.emplace_back(AttentionLayer{block_attention(A, n, t), masked});
      stack.layers.emplace_back(block_update(A, phi, n, t));
    }
  // exit: identity attention, then read out the accumulator block
  stack.layers.emplace_back(AttentionLayer{identity_attention(D), masked});
  {
    Mat W = Mat::Zero(dp, D);
    W.block(0, d + 2 * dp, dp, dp) = Mat::Identity(dp, dp);
    stack.layers.emplace_back(MlpParams::affine(std::move(W), Vec::Zero(dp)));
  }
  stack.validate();

  RealizedTransformer rt;
  rt.stack = std::move(stack);
  rt.algebra = A;
  rt.d = d;
  rt.dprime = dp;
  rt.masked = masked;
  rt.phi_eps = phi.eps;
  rt.radius = phi.radius;
  // With no domain bound given, fall back on the Phi radius: factor values
  // feeding an in-radius product are themselves bounded by the radius.
  rt.gamma_bound = c_omega > 0.0 ? gamma_magnitude_bound(A, c_omega) : phi.radius;
  double factor_sum = 0.0;
  double power = 1.0;
  for (int j = 0; j < A.factors; ++j) {
    factor_sum += power;
    power *= std::max(1.0, rt.gamma_bound);
  }
  rt.propagation_factor = static_cast<double>(A.terms) * factor_sum;
  check_size_contract(rt);
  return rt;
}

Vec realized_eval(const RealizedTransformer& rt, const ParticleMeasure& mu,
                  const Vec& x) {
  if (rt.masked) throw std::invalid_argument("realized_eval: masked transformer");
  return compose_unmasked(rt.stack, mu, x);
}

Vec realized_eval_masked(const RealizedTransformer& rt, const SpaceTimeMeasure& mu,
                         const Vec& x, double t) {
  if (!rt.masked) throw std::invalid_argument("realized_eval_masked: unmasked transformer");
  return compose_masked(rt.stack, mu, x, t);
}

namespace {

ExactEval exact_walk(const AlgebraElement& A, const ParticleMeasure& context,
                     const Vec& x) {
  const std::vector<LiftedFactor> lifted = lift_to_vector(A);
  auto lifted_at = [&](int n, int t) -> const LiftedFactor& {
    return lifted[static_cast<std::size_t>(n * A.factors + t)];
  };
  auto affine_of = [&](int n, int t, const Vec& q) {
    return context_free(lifted_at(n, t).affine, q);
  };

  ExactEval result;
  Vec u = affine_of(0, 0, x);
  Vec p = Vec::Ones(A.dprime);
  Vec w = Vec::Zero(A.dprime);
  for (int n = 0; n < A.terms; ++n)
    for (int t = 0; t < A.factors; ++t) {
      const LiftedFactor& f = lifted_at(n, t);
      const ParticleMeasure nu =
          pushforward(context, [&](const Vec& y) { return context_free(f.affine, y); });
      u = gamma_unmasked(f.attention, nu, u);
      result.max_pair_norm = std::max(
          result.max_pair_norm, std::sqrt(u.squaredNorm() + p.squaredNorm()));
      if (t + 1 < A.factors) {
        p = u.cwiseProduct(p);
        u = affine_of(n, t + 1, x);
      } else {
        w += u.cwiseProduct(p);
        if (n + 1 < A.terms) {
          p = Vec::Ones(A.dprime);
          u = affine_of(n + 1, 0, x);
        }
      }
    }
  result.value = std::move(w);
  return result;
}

}  // namespace

ExactEval realized_eval_exact(const RealizedTransformer& rt,
                              const ParticleMeasure& mu, const Vec& x) {
  return exact_walk(rt.algebra, mu, x);
}

ExactEval realized_eval_exact_masked(const RealizedTransformer& rt,
                                     const SpaceTimeMeasure& mu, const Vec& x,
                                     double t) {
  // Reduced route: masked attention at time t sees the renormalized
  // window, and its kernel reads space coordinates only.
  return exact_walk(rt.algebra, mask(mu, t).space_marginal(), x);
}

void check_size_contract(const RealizedTransformer& rt) {
  const int budget = rt.d + 3 * rt.dprime;
  for (const Layer& layer : rt.stack.layers) {
    const auto* att = std::get_if<AttentionLayer>(&layer);
    if (!att) continue;
    const MultiHeadParams& p = att->params;
    if (p.d_in > budget)
      throw std::runtime_error("size contract: d_in exceeds d + 3d'");
    if (p.d_head != 1 || p.k != 1)
      throw std::runtime_error("size contract: d_head and k must be 1");
    if (p.num_heads() > rt.dprime)
      throw std::runtime_error("size contract: more than d' heads");
  }
}

}  // namespace ictx
