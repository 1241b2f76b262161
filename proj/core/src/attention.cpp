#include "ictx/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ictx {

namespace {

bool lex_less(const Vec& a, const Vec& b) {
  for (Eigen::Index c = 0; c < a.size(); ++c) {
    if (a(c) < b(c)) return true;
    if (a(c) > b(c)) return false;
  }
  return false;
}

// Content-based summation order: lexicographic by point, then weight,
// then time. Particles with identical content contribute identical
// summands, so any order among them yields the same partial sums.
std::vector<std::size_t> canonical_order(const std::vector<Vec>& points,
                                         const std::vector<double>& weights,
                                         const std::vector<double>* times) {
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (lex_less(points[a], points[b])) return true;
    if (lex_less(points[b], points[a])) return false;
    if (weights[a] != weights[b]) return weights[a] < weights[b];
    if (times) return (*times)[a] < (*times)[b];
    return false;
  });
  return order;
}

std::vector<std::size_t> canonical_cols(const Mat& X) {
  std::vector<std::size_t> order(static_cast<std::size_t>(X.cols()));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return lex_less(X.col(static_cast<Eigen::Index>(a)),
                    X.col(static_cast<Eigen::Index>(b)));
  });
  return order;
}

// Softmax-weighted average of value vectors, stabilized by max
// subtraction, accumulated in the given index order.
Vec softmax_average(const std::vector<double>& scores,
                    const std::vector<Vec>& values,
                    const std::vector<double>& weights,
                    const std::vector<std::size_t>& order) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i : order) m = std::max(m, scores[i]);
  double denom = 0.0;
  Vec num = Vec::Zero(values[order.front()].size());
  for (std::size_t i : order) {
    const double e = weights[i] * std::exp(scores[i] - m);
    denom += e;
    num += e * values[i];
  }
  return num / denom;
}

Vec apply_activation(Activation act, Vec v) {
  if (act == Activation::relu)
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = std::max(v(i), 0.0);
  return v;
}

}  // namespace

void MultiHeadParams::validate() const {
  if (heads.empty()) throw std::invalid_argument("attention layer has no heads");
  for (const Head& h : heads) {
    if (h.params.K.rows() != k || h.params.K.cols() != d_in ||
        h.params.Q.rows() != k || h.params.Q.cols() != d_in ||
        h.params.V.rows() != d_head || h.params.V.cols() != d_in ||
        h.W.rows() != d_in || h.W.cols() != d_head)
      throw std::invalid_argument("attention head dimensions inconsistent");
    if (!h.W.allFinite() || !h.params.K.allFinite() || !h.params.Q.allFinite() ||
        !h.params.V.allFinite())
      throw std::invalid_argument("attention parameters not finite");
  }
}

void MlpParams::validate() const {
  int cur = in_dim;
  for (const Layer& l : layers) {
    if (l.W.cols() != cur || l.b.size() != l.W.rows())
      throw std::invalid_argument("mlp layer dimensions inconsistent");
    cur = static_cast<int>(l.W.rows());
  }
  if (cur != out_dim) throw std::invalid_argument("mlp output dimension mismatch");
}

MlpParams MlpParams::affine(Mat W, Vec b) {
  MlpParams mlp;
  mlp.in_dim = static_cast<int>(W.cols());
  mlp.out_dim = static_cast<int>(W.rows());
  mlp.layers.push_back({std::move(W), std::move(b), Activation::identity});
  return mlp;
}

bool LayerStack::masked() const {
  for (const Layer& l : layers)
    if (const auto* att = std::get_if<AttentionLayer>(&l)) return att->masked;
  return false;
}

int LayerStack::input_dim() const {
  for (const Layer& l : layers) {
    if (const auto* att = std::get_if<AttentionLayer>(&l)) return att->params.d_in;
    return std::get<MlpParams>(l).in_dim;
  }
  return 0;
}

int LayerStack::output_dim() const {
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    if (const auto* att = std::get_if<AttentionLayer>(&*it)) return att->params.d_in;
    return std::get<MlpParams>(*it).out_dim;
  }
  return 0;
}

std::size_t LayerStack::attention_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers)
    if (std::holds_alternative<AttentionLayer>(l)) ++n;
  return n;
}

void LayerStack::validate() const {
  int cur = -1;
  int masked_flag = -1;
  for (const Layer& l : layers) {
    if (const auto* att = std::get_if<AttentionLayer>(&l)) {
      att->params.validate();
      if (cur >= 0 && cur != att->params.d_in)
        throw std::invalid_argument("stack dimension mismatch at attention layer");
      cur = att->params.d_in;  // residual keeps the dimension
      const int flag = att->masked ? 1 : 0;
      if (masked_flag >= 0 && masked_flag != flag)
        throw std::invalid_argument("stack mixes masked and unmasked attention");
      masked_flag = flag;
    } else {
      const MlpParams& mlp = std::get<MlpParams>(l);
      mlp.validate();
      if (cur >= 0 && cur != mlp.in_dim)
        throw std::invalid_argument("stack dimension mismatch at context-free layer");
      cur = mlp.out_dim;
    }
  }
}

Mat att_tokens(const HeadParams& theta, const Mat& X, bool masked, int k_dim) {
  if (theta.K.cols() != X.rows())
    throw std::invalid_argument("att_tokens: token dimension mismatch");
  if (X.cols() < 1) throw std::invalid_argument("att_tokens: empty token matrix");
  const Eigen::Index n = X.cols();
  const double scale = 1.0 / std::sqrt(static_cast<double>(k_dim));
  const Mat KX = theta.K * X;  // k x n
  const Mat QX = theta.Q * X;  // k x n
  const Mat VX = theta.V * X;  // d_head x n

  const std::vector<std::size_t> order = canonical_cols(X);

  Mat out(theta.V.rows(), n);
  std::vector<double> scores(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (masked && j > i) continue;
      scores[static_cast<std::size_t>(j)] = scale * QX.col(i).dot(KX.col(j));
      m = std::max(m, scores[static_cast<std::size_t>(j)]);
    }
    double denom = 0.0;
    Vec num = Vec::Zero(theta.V.rows());
    for (std::size_t idx : order) {
      const auto j = static_cast<Eigen::Index>(idx);
      if (masked && j > i) continue;
      const double e = std::exp(scores[idx] - m);
      denom += e;
      num += e * VX.col(j);
    }
    out.col(i) = num / denom;
  }
  return out;
}

Mat matt_tokens(const MultiHeadParams& theta, const Mat& X, bool masked) {
  theta.validate();
  if (X.rows() != theta.d_in)
    throw std::invalid_argument("matt_tokens: token dimension mismatch");
  Mat out = X;
  for (const MultiHeadParams::Head& h : theta.heads)
    out += h.W * att_tokens(h.params, X, masked, theta.k);
  return out;
}

Vec gamma_unmasked(const MultiHeadParams& theta, const ParticleMeasure& mu,
                   const Vec& x) {
  if (x.size() != theta.d_in)
    throw std::invalid_argument("gamma_unmasked: query dimension mismatch");
  const double scale = 1.0 / std::sqrt(static_cast<double>(theta.k));
  const std::vector<std::size_t> order =
      canonical_order(mu.points(), mu.weights(), nullptr);

  Vec out = x;
  std::vector<double> scores(mu.size());
  std::vector<Vec> values(mu.size());
  for (const MultiHeadParams::Head& h : theta.heads) {
    const Vec qx = h.params.Q * x;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      scores[i] = scale * qx.dot(h.params.K * mu.point(i));
      values[i] = h.params.V * mu.point(i);
    }
    out += h.W * softmax_average(scores, values, mu.weights(), order);
  }
  return out;
}

Vec gamma_masked(const MultiHeadParams& theta, const SpaceTimeMeasure& mu,
                 const Vec& x, double t) {
  if (x.size() != theta.d_in)
    throw std::invalid_argument("gamma_masked: query dimension mismatch");
  if (!(t >= 0.0)) throw std::invalid_argument("gamma_masked: negative time");
  // Same window semantics as mask(): t = 0 means the time-0 atom.
  const double cutoff = (t == 0.0) ? kTimeEqTol : t;
  std::vector<std::size_t> window;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.time(i) <= cutoff) window.push_back(i);
  if (window.empty()) throw std::invalid_argument("causal window empty");

  std::vector<Vec> pts;
  std::vector<double> ws;
  pts.reserve(window.size());
  for (std::size_t i : window) {
    pts.push_back(mu.point(i));
    ws.push_back(mu.weight(i));
  }
  // The indicator restricts both integrals to the window; the common
  // normalization cancels, so raw weights are used directly.
  const std::vector<std::size_t> order = canonical_order(pts, ws, nullptr);

  const double scale = 1.0 / std::sqrt(static_cast<double>(theta.k));
  Vec out = x;
  std::vector<double> scores(pts.size());
  std::vector<Vec> values(pts.size());
  for (const MultiHeadParams::Head& h : theta.heads) {
    const Vec qx = h.params.Q * x;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      scores[i] = scale * qx.dot(h.params.K * pts[i]);
      values[i] = h.params.V * pts[i];
    }
    out += h.W * softmax_average(scores, values, ws, order);
  }
  return out;
}

Vec context_free(const MlpParams& xi, const Vec& x) {
  if (x.size() != xi.in_dim)
    throw std::invalid_argument("context_free: input dimension mismatch");
  Vec cur = x;
  for (const MlpParams::Layer& l : xi.layers)
    cur = apply_activation(l.act, l.W * cur + l.b);
  return cur;
}

namespace {

// One composition step: advance the query and push the context forward
// through the layer's own in-context map.
void step_unmasked(const Layer& layer, ParticleMeasure& mu, Vec& x) {
  if (const auto* att = std::get_if<AttentionLayer>(&layer)) {
    if (att->masked)
      throw std::invalid_argument("compose_unmasked: masked layer in stack");
    const ParticleMeasure before = mu;
    x = gamma_unmasked(att->params, before, x);
    mu = pushforward(before, [&](const Vec& y) {
      return gamma_unmasked(att->params, before, y);
    });
  } else {
    const MlpParams& mlp = std::get<MlpParams>(layer);
    x = context_free(mlp, x);
    mu = pushforward(mu, [&](const Vec& y) { return context_free(mlp, y); });
  }
}

void step_masked(const Layer& layer, SpaceTimeMeasure& mu, Vec& x, double t) {
  if (const auto* att = std::get_if<AttentionLayer>(&layer)) {
    if (!att->masked)
      throw std::invalid_argument("compose_masked: unmasked layer in stack");
    const SpaceTimeMeasure before = mu;
    x = gamma_masked(att->params, before, x, t);
    mu = pushforward_space(before, [&](const Vec& y, double s) {
      return gamma_masked(att->params, before, y, s);
    });
  } else {
    const MlpParams& mlp = std::get<MlpParams>(layer);
    x = context_free(mlp, x);
    mu = pushforward_space(
        mu, [&](const Vec& y, double) { return context_free(mlp, y); });
  }
}

}  // namespace

Vec compose_unmasked(const LayerStack& stack, const ParticleMeasure& mu,
                     const Vec& x) {
  ParticleMeasure cur_mu = mu;
  Vec cur_x = x;
  for (const Layer& layer : stack.layers) step_unmasked(layer, cur_mu, cur_x);
  return cur_x;
}

Vec compose_masked(const LayerStack& stack, const SpaceTimeMeasure& mu,
                   const Vec& x, double t) {
  SpaceTimeMeasure cur_mu = mu;
  Vec cur_x = x;
  for (const Layer& layer : stack.layers) step_masked(layer, cur_mu, cur_x, t);
  return cur_x;
}

UnmaskedBatch compose_unmasked_batch(const LayerStack& stack,
                                     const ParticleMeasure& mu) {
  ParticleMeasure cur = mu;
  std::vector<Vec> outputs = cur.points();
  for (const Layer& layer : stack.layers) {
    if (const auto* att = std::get_if<AttentionLayer>(&layer)) {
      if (att->masked)
        throw std::invalid_argument("compose_unmasked_batch: masked layer");
      for (Vec& y : outputs) y = gamma_unmasked(att->params, cur, y);
    } else {
      const MlpParams& mlp = std::get<MlpParams>(layer);
      for (Vec& y : outputs) y = context_free(mlp, y);
    }
    cur = ParticleMeasure(outputs, cur.weights());
  }
  return {std::move(outputs), std::move(cur)};
}

MaskedBatch compose_masked_batch(const LayerStack& stack,
                                 const SpaceTimeMeasure& mu) {
  SpaceTimeMeasure cur = mu;
  std::vector<Vec> outputs = cur.points();
  for (const Layer& layer : stack.layers) {
    if (const auto* att = std::get_if<AttentionLayer>(&layer)) {
      if (!att->masked)
        throw std::invalid_argument("compose_masked_batch: unmasked layer");
      std::vector<Vec> next(outputs.size());
      for (std::size_t i = 0; i < outputs.size(); ++i)
        next[i] = gamma_masked(att->params, cur, outputs[i], cur.time(i));
      outputs = std::move(next);
    } else {
      const MlpParams& mlp = std::get<MlpParams>(layer);
      for (Vec& y : outputs) y = context_free(mlp, y);
    }
    cur = SpaceTimeMeasure(outputs, cur.times(), cur.weights());
  }
  return {std::move(outputs), std::move(cur)};
}

std::vector<double> attention_weights(const HeadParams& theta, int k_dim,
                                      const ParticleMeasure& mu, const Vec& x) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(k_dim));
  const std::vector<std::size_t> order =
      canonical_order(mu.points(), mu.weights(), nullptr);
  const Vec qx = theta.Q * x;
  std::vector<double> scores(mu.size());
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mu.size(); ++i) {
    scores[i] = scale * qx.dot(theta.K * mu.point(i));
    m = std::max(m, scores[i]);
  }
  double denom = 0.0;
  std::vector<double> w(mu.size());
  for (std::size_t i : order) {
    w[i] = mu.weight(i) * std::exp(scores[i] - m);
    denom += w[i];
  }
  for (double& wi : w) wi /= denom;
  return w;
}

}  // namespace ictx
