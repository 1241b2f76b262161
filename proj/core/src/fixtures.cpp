#include "ictx/fixtures.hpp"

#include <cmath>
#include <numeric>

namespace ictx {

Vec random_point(std::mt19937_64& rng, int d, double scale) {
  std::uniform_real_distribution<double> unif(-scale, scale);
  return Vec::NullaryExpr(d, [&](Eigen::Index) { return unif(rng); });
}

ParticleMeasure random_particle_measure(std::mt19937_64& rng, int n, int d,
                                        double scale) {
  std::vector<Vec> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pts.push_back(random_point(rng, d, scale));
  return from_tokens(pts);
}

ParticleMeasure random_weighted_measure(std::mt19937_64& rng, int n, int d,
                                        double scale) {
  std::vector<Vec> pts;
  std::vector<double> ws;
  std::uniform_real_distribution<double> wdist(0.1, 1.0);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    pts.push_back(random_point(rng, d, scale));
    ws.push_back(wdist(rng));
    total += ws.back();
  }
  for (double& w : ws) w /= total;
  return ParticleMeasure(std::move(pts), std::move(ws));
}

namespace {

Mat random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                  double scale) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  return Mat::NullaryExpr(rows, cols, [&](Eigen::Index, Eigen::Index) {
    return scale * gauss(rng);
  });
}

}  // namespace

MultiHeadParams random_attention(std::mt19937_64& rng, int d, int heads,
                                 int k_dim, double scale) {
  MultiHeadParams att;
  att.d_in = d;
  att.d_head = d;
  att.k = k_dim;
  const double s = scale / std::sqrt(static_cast<double>(d));
  for (int h = 0; h < heads; ++h) {
    MultiHeadParams::Head head;
    head.params.K = random_matrix(rng, k_dim, d, s);
    head.params.Q = random_matrix(rng, k_dim, d, s);
    head.params.V = random_matrix(rng, d, d, s);
    head.W = random_matrix(rng, d, d, s);
    att.heads.push_back(std::move(head));
  }
  return att;
}

MlpParams random_mlp(std::mt19937_64& rng, int d, int hidden, double scale) {
  const double s = scale / std::sqrt(static_cast<double>(d));
  MlpParams mlp;
  mlp.in_dim = d;
  mlp.out_dim = d;
  mlp.layers.push_back({random_matrix(rng, hidden, d, s),
                        random_matrix(rng, hidden, 1, s).col(0), Activation::relu});
  mlp.layers.push_back({random_matrix(rng, d, hidden, s),
                        random_matrix(rng, d, 1, s).col(0), Activation::identity});
  return mlp;
}

LayerStack random_stack(std::mt19937_64& rng, int depth, int d, int max_heads,
                        bool masked, double scale) {
  std::uniform_int_distribution<int> hdist(1, max_heads);
  std::uniform_int_distribution<int> kdist(1, d);
  LayerStack stack;
  for (int l = 0; l < depth; ++l) {
    stack.layers.emplace_back(
        AttentionLayer{random_attention(rng, d, hdist(rng), kdist(rng), scale), masked});
    stack.layers.emplace_back(random_mlp(rng, d, 2 * d, scale));
  }
  stack.validate();
  return stack;
}

std::vector<std::pair<ParticleMeasure, Vec>> random_pairs(std::mt19937_64& rng,
                                                          int count, int n, int d,
                                                          double scale) {
  std::vector<std::pair<ParticleMeasure, Vec>> out;
  std::uniform_int_distribution<int> ndist(1, n);
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    out.emplace_back(random_particle_measure(rng, ndist(rng), d, scale),
                     random_point(rng, d, scale));
  return out;
}

SpaceTimeMeasure lip_path_fixture(std::mt19937_64& rng,
                                  const LipFamilyParams& params) {
  const Vec x0 = random_point(rng, params.d, 0.5);
  Vec dir = random_point(rng, params.d, 1.0);
  if (dir.norm() < 1e-9) dir = Vec::Unit(params.d, 0);
  dir.normalize();

  std::vector<Vec> points;
  std::vector<double> times, weights;
  for (int a = 0; a < params.atom_points; ++a) {
    Vec p = x0 + params.atom_spread * random_point(rng, params.d, 1.0);
    points.push_back(std::move(p));
    times.push_back(0.0);
    weights.push_back(params.sigma / params.atom_points);
  }
  for (int j = 1; j <= params.path_points; ++j) {
    const double s = static_cast<double>(j) / params.path_points;
    points.push_back(x0 + params.lipschitz * s * dir);
    times.push_back(s);
    weights.push_back((1.0 - params.sigma) / params.path_points);
  }
  return SpaceTimeMeasure(std::move(points), std::move(times), std::move(weights));
}

std::vector<CausalFixture> lip_causal_fixtures(std::uint64_t seed, int count, int d) {
  std::mt19937_64 rng(seed);
  const double sigmas[] = {0.1, 0.3};
  const double lips[] = {1.0, 10.0};
  std::vector<CausalFixture> out;
  std::uniform_real_distribution<double> tdist(0.0, 1.0);
  for (int i = 0; i < count; ++i) {
    LipFamilyParams p;
    p.d = d;
    p.sigma = sigmas[i % 2];
    p.lipschitz = lips[(i / 2) % 2];
    p.path_points = 8 + (i % 3) * 4;
    CausalFixture f;
    f.mu = lip_path_fixture(rng, p);
    f.x = random_point(rng, d, 1.0);
    // keep the window nonempty: anywhere in [0,1] works thanks to the atom
    f.t = tdist(rng);
    f.id = "lip[" + std::to_string(i) + "] sigma=" + std::to_string(p.sigma) +
           " C=" + std::to_string(p.lipschitz);
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<IdentFixture> lip_ident_fixtures(std::uint64_t seed, int count, int d) {
  std::mt19937_64 rng(seed);
  std::vector<IdentFixture> out;
  for (int i = 0; i < count; ++i) {
    // Path over [0, 0.4] and [0.7, 1.0]; (0.4, 0.7] carries no mass.
    const Vec x0 = random_point(rng, d, 0.5);
    Vec dir = random_point(rng, d, 1.0);
    if (dir.norm() < 1e-9) dir = Vec::Unit(d, 0);
    dir.normalize();
    std::vector<Vec> points;
    std::vector<double> times, weights;
    const double sigma = 0.2;
    points.push_back(x0);
    times.push_back(0.0);
    weights.push_back(sigma);
    const std::vector<double> grid = {0.1, 0.2, 0.3, 0.4, 0.7, 0.8, 0.9, 1.0};
    for (double s : grid) {
      points.push_back(x0 + s * dir);
      times.push_back(s);
      weights.push_back((1.0 - sigma) / grid.size());
    }
    IdentFixture f;
    f.mu = SpaceTimeMeasure(std::move(points), std::move(times), std::move(weights));
    f.x = random_point(rng, d, 1.0);
    f.t = (i % 2 == 0) ? 0.45 : 0.4;
    f.t_prime = (i % 2 == 0) ? 0.65 : 0.69;
    f.id = "ident[" + std::to_string(i) + "]";
    out.push_back(std::move(f));
  }
  return out;
}

CausalFixture future_outlier_fixture(std::uint64_t seed, int d) {
  std::mt19937_64 rng(seed);
  LipFamilyParams p;
  p.d = d;
  CausalFixture f;
  SpaceTimeMeasure base = lip_path_fixture(rng, p);
  std::vector<Vec> points = base.points();
  std::vector<double> times = base.times();
  std::vector<double> weights = base.weights();
  // Rescale and add a heavy far-away particle strictly after t = 0.5.
  for (double& w : weights) w *= 0.7;
  points.push_back(Vec::Constant(d, 25.0));
  times.push_back(0.9);
  weights.push_back(0.3);
  f.mu = SpaceTimeMeasure(std::move(points), std::move(times), std::move(weights));
  f.x = random_point(rng, d, 1.0);
  f.t = 0.5;
  f.id = "future-outlier";
  return f;
}

SpaceTimeMeasure geometric_time_fixture(int levels, double sigma) {
  std::vector<Vec> points;
  std::vector<double> times, weights;
  const Vec x0 = Vec::Zero(2);
  points.push_back(x0);
  times.push_back(0.0);
  weights.push_back(sigma);
  // weights ~ 16^-j so the tail mass decays much faster than the window
  double total = 0.0;
  std::vector<double> raw;
  for (int j = 1; j <= levels; ++j) {
    raw.push_back(std::pow(16.0, -j));
    total += raw.back();
  }
  for (int j = 1; j <= levels; ++j) {
    const double s = std::pow(2.0, -j);
    Vec p(2);
    p << s, 0.0;  // unit-Lipschitz path phi(s) = (s, 0)
    points.push_back(std::move(p));
    times.push_back(s);
    weights.push_back((1.0 - sigma) * raw[static_cast<std::size_t>(j - 1)] / total);
  }
  return SpaceTimeMeasure(std::move(points), std::move(times), std::move(weights));
}

ConvergencePoint convergence_fixture(int which_case, int n) {
  const int d = 2;
  const double sigma = 0.25;
  const Vec x0 = Vec::Zero(d);
  Vec dir(d);
  dir << 1.0, 0.5;
  dir.normalize();

  auto build = [&](double wiggle, bool geometric) {
    std::vector<Vec> points;
    std::vector<double> times, weights;
    points.push_back(x0 + wiggle * Vec::Unit(d, 1));
    times.push_back(0.0);
    weights.push_back(sigma);
    if (!geometric) {
      const int grid = 16;
      for (int j = 1; j <= grid; ++j) {
        const double s = static_cast<double>(j) / grid;
        Vec p = x0 + s * dir;
        p(1) += wiggle * std::cos(2.0 * M_PI * s);
        points.push_back(std::move(p));
        times.push_back(s);
        weights.push_back((1.0 - sigma) / grid);
      }
    } else {
      const int levels = 10;
      double total = 0.0;
      std::vector<double> raw;
      for (int j = 1; j <= levels; ++j) {
        raw.push_back(std::pow(4.0, -j));
        total += raw.back();
      }
      for (int j = 1; j <= levels; ++j) {
        const double s = std::pow(2.0, -j);
        Vec p = x0 + s * dir;
        p(1) += wiggle * std::cos(2.0 * M_PI * s);
        points.push_back(std::move(p));
        times.push_back(s);
        weights.push_back((1.0 - sigma) * raw[static_cast<std::size_t>(j - 1)] / total);
      }
    }
    return SpaceTimeMeasure(std::move(points), std::move(times), std::move(weights));
  };

  ConvergencePoint cp;
  const double wiggle = 0.5 / n;
  switch (which_case) {
    case 1:  // t_n in (0,1], t in (0,1]
      cp.mu_n = build(wiggle, false);
      cp.mu_limit = build(0.0, false);
      cp.t_limit = 0.5;
      cp.t_n = 0.5 + 0.25 / n;  // below the next atom at 0.5625 for n >= 16
      break;
    case 2:  // t_n in (0,1], t = 0
      cp.mu_n = build(wiggle, true);
      cp.mu_limit = build(0.0, true);
      cp.t_limit = 0.0;
      cp.t_n = 0.5 / n;
      break;
    case 3:  // t_n = t = 0
      cp.mu_n = build(wiggle, true);
      cp.mu_limit = build(0.0, true);
      cp.t_limit = 0.0;
      cp.t_n = 0.0;
      break;
    default:
      throw std::invalid_argument("convergence_fixture: case must be 1, 2 or 3");
  }
  return cp;
}

}  // namespace ictx
