// Independent reference routes used by the verification suite. These are
// deliberately simple alternative computations (quantile formulas, token
// matrices, finite differences) kept apart from the implementation paths
// they cross-check.

#pragma once

#include <functional>

#include "ictx/attention.hpp"
#include "ictx/measure.hpp"

namespace ictx {

/// Exact 1-D W_p by the quantile-coupling formula (CDF merge); handles
/// arbitrary weights.
double wasserstein_1d(const ParticleMeasure& mu, const ParticleMeasure& nu, int p);

/// Classical transformer evaluation on a token matrix: alternating
/// residual multi-head attention and per-column MLPs.
Mat token_stack_eval(const LayerStack& stack, const Mat& X, bool masked);

/// Central finite difference of a scalar function.
double central_difference(const std::function<double(double)>& f, double x,
                          double step);

}  // namespace ictx
