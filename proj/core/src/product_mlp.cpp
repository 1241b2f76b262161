#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "ictx/universality.hpp"

namespace ictx {

namespace {

// Hard cap on piecewise-linear segments per squared scalar.
constexpr int kMaxSegments = 200000;

}  // namespace

// Coordinatewise product via polarization, x.y = ((x+y)^2 - (x-y)^2)/4,
// with each square replaced by its piecewise-linear interpolant on
// [-2R, 2R]. The interpolation error of s^2 with knot spacing h is h^2/4,
// so the per-coordinate product error is at most h^2/8 and the Euclidean
// error at most sqrt(d') h^2/8; that bound is what gets advertised, and a
// dense sample certifies it.
ProductMlp build_product_mlp(int dprime, double radius, double eps) {
  if (dprime < 1) throw std::invalid_argument("build_product_mlp: dprime < 1");
  if (!(radius > 0.0) || !(eps > 0.0))
    throw std::invalid_argument("build_product_mlp: radius and eps must be > 0");

  const double per_coord = 0.81 * eps / std::sqrt(static_cast<double>(dprime));
  const double h_target = std::sqrt(8.0 * per_coord);
  const int segments = std::max(2, static_cast<int>(std::ceil(4.0 * radius / h_target)));
  if (segments > kMaxSegments) {
    const double h_best = 4.0 * radius / kMaxSegments;
    const double achieved =
        std::sqrt(static_cast<double>(dprime)) * h_best * h_best / 8.0;
    throw std::runtime_error(
        "build_product_mlp: cannot meet eps=" + std::to_string(eps) +
        " within segment budget; achievable sup error ~" + std::to_string(achieved));
  }
  const double h = 4.0 * radius / segments;
  const double lo = -2.0 * radius;
  const double advertised =
      std::sqrt(static_cast<double>(dprime)) * h * h / 8.0;

  // Hidden layer: for each scalar s in {x_i+y_i, x_i-y_i}, units
  // relu(s), relu(-s) and relu(s - k_j) at the interior knots.
  const int per_scalar = 2 + (segments - 1);
  const int hidden = 2 * dprime * per_scalar;
  Mat W1 = Mat::Zero(hidden, 2 * dprime);
  Vec b1 = Vec::Zero(hidden);
  Mat W2 = Mat::Zero(dprime, hidden);
  Vec b2 = Vec::Zero(dprime);

  // first-segment slope of s^2; the constant terms of the two squares
  // cancel in the polarization difference, so b2 stays zero
  const double slope0 = 2.0 * lo + h;

  int row = 0;
  for (int i = 0; i < dprime; ++i) {
    for (int sgn = 0; sgn < 2; ++sgn) {
      // s = x_i + y_i for sgn 0, x_i - y_i for sgn 1
      const double ysign = sgn == 0 ? 1.0 : -1.0;
      const double out_sign = (sgn == 0 ? 1.0 : -1.0) / 4.0;
      // linear part through the +/- pair
      W1(row, i) = 1.0;
      W1(row, dprime + i) = ysign;
      W2(i, row) = out_sign * slope0;
      ++row;
      W1(row, i) = -1.0;
      W1(row, dprime + i) = -ysign;
      W2(i, row) = -out_sign * slope0;
      ++row;
      for (int j = 1; j < segments; ++j) {
        const double knot = lo + j * h;
        W1(row, i) = 1.0;
        W1(row, dprime + i) = ysign;
        b1(row) = -knot;
        W2(i, row) = out_sign * 2.0 * h;  // slope change of s^2 at each knot
        ++row;
      }
    }
  }

  ProductMlp phi;
  phi.dprime = dprime;
  phi.radius = radius;
  phi.eps = advertised;
  phi.mlp.in_dim = 2 * dprime;
  phi.mlp.out_dim = dprime;
  phi.mlp.layers.push_back({std::move(W1), std::move(b1), Activation::relu});
  phi.mlp.layers.push_back({std::move(W2), std::move(b2), Activation::identity});
  phi.mlp.validate();

  // Sampling certificate: grid plus random points in the ball, >= 1e4.
  const int want = 12000;
  const int dims = 2 * dprime;
  int per_dim = std::max(2, static_cast<int>(std::floor(
                                std::pow(static_cast<double>(want),
                                         1.0 / static_cast<double>(dims)))));
  long grid_count = 1;
  for (int k = 0; k < dims; ++k) grid_count *= per_dim;

  double worst = 0.0;
  auto check_point = [&](Vec z) {
    const double norm = z.norm();
    if (norm > radius) z *= radius / norm;
    const Vec x = z.head(dprime);
    const Vec y = z.tail(dprime);
    const Vec exact = x.cwiseProduct(y);
    const Vec approx = product_mlp_eval(phi, x, y);
    worst = std::max(worst, (exact - approx).norm());
  };

  for (long g = 0; g < grid_count; ++g) {
    Vec z(dims);
    long rem = g;
    for (int k = 0; k < dims; ++k) {
      const int idx = static_cast<int>(rem % per_dim);
      rem /= per_dim;
      z(k) = -radius + 2.0 * radius * idx / (per_dim - 1);
    }
    check_point(std::move(z));
  }
  std::mt19937_64 rng(0x1cfull);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (long r = grid_count; r < want; ++r) {
    Vec dir = Vec::NullaryExpr(dims, [&](Eigen::Index) { return gauss(rng); });
    const double len = dir.norm();
    if (len < 1e-12) continue;
    const double rad =
        radius * std::pow(unif(rng), 1.0 / static_cast<double>(dims));
    check_point(dir * (rad / len));
  }

  phi.certified_max = worst;
  if (worst > advertised + 1e-12)
    throw std::runtime_error("build_product_mlp: certificate exceeded the bound");
  if (advertised > eps)
    throw std::runtime_error(
        "build_product_mlp: advertised error above requested eps");
  return phi;
}

Vec product_mlp_eval(const ProductMlp& phi, const Vec& x, const Vec& y) {
  if (x.size() != phi.dprime || y.size() != phi.dprime)
    throw std::invalid_argument("product_mlp_eval: dimension mismatch");
  Vec z(2 * phi.dprime);
  z.head(phi.dprime) = x;
  z.tail(phi.dprime) = y;
  return context_free(phi.mlp, z);
}

}  // namespace ictx
