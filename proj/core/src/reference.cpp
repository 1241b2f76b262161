#include "ictx/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ictx {

double wasserstein_1d(const ParticleMeasure& mu, const ParticleMeasure& nu, int p) {
  if (mu.dim() != 1 || nu.dim() != 1)
    throw std::invalid_argument("wasserstein_1d: 1-D measures only");

  auto sorted = [](const ParticleMeasure& m) {
    std::vector<std::pair<double, double>> atoms;  // (position, mass)
    atoms.reserve(m.size());
    for (std::size_t i = 0; i < m.size(); ++i)
      atoms.emplace_back(m.point(i)(0), m.weight(i));
    std::sort(atoms.begin(), atoms.end());
    return atoms;
  };
  std::vector<std::pair<double, double>> a = sorted(mu), b = sorted(nu);

  // Pair off quantile segments of the two CDFs.
  double cost = 0.0;
  std::size_t i = 0, j = 0;
  double ra = a[0].second, rb = b[0].second;
  while (i < a.size() && j < b.size()) {
    const double m = std::min(ra, rb);
    const double diff = std::abs(a[i].first - b[j].first);
    cost += m * (p == 1 ? diff : diff * diff);
    ra -= m;
    rb -= m;
    if (ra <= 1e-17 && i + 1 < a.size()) ra = a[++i].second;
    else if (ra <= 1e-17) ++i;
    if (rb <= 1e-17 && j + 1 < b.size()) rb = b[++j].second;
    else if (rb <= 1e-17) ++j;
  }
  return p == 1 ? cost : std::sqrt(std::max(cost, 0.0));
}

Mat token_stack_eval(const LayerStack& stack, const Mat& X, bool masked) {
  Mat cur = X;
  for (const Layer& layer : stack.layers) {
    if (const auto* att = std::get_if<AttentionLayer>(&layer)) {
      cur = matt_tokens(att->params, cur, masked);
    } else {
      const MlpParams& mlp = std::get<MlpParams>(layer);
      Mat next(mlp.out_dim, cur.cols());
      for (Eigen::Index c = 0; c < cur.cols(); ++c)
        next.col(c) = context_free(mlp, cur.col(c));
      cur = std::move(next);
    }
  }
  return cur;
}

double central_difference(const std::function<double(double)>& f, double x,
                          double step) {
  return (f(x + step) - f(x - step)) / (2.0 * step);
}

}  // namespace ictx
