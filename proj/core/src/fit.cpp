#include <Eigen/Cholesky>
#include <cmath>
#include <random>
#include <stdexcept>

#include "ictx/universality.hpp"

namespace ictx {

namespace {

// Deterministic candidate pool: coordinate-axis probes over the c and v
// grids first (these carry the exactly-recoverable targets), then seeded
// random directions with log-scaled norms and grid-sampled (b, c, v).
std::vector<ElementaryParams> make_pool(int d, const FitConfig& cfg,
                                        std::uint64_t seed) {
  std::vector<ElementaryParams> pool;
  for (int i = 0; i < d && static_cast<int>(pool.size()) < cfg.pool_size; ++i)
    for (double sign : {1.0, -1.0})
      for (double c : cfg.c_grid)
        for (double v : cfg.v_grid) {
          Vec a = Vec::Zero(d);
          a(i) = sign;
          pool.push_back({std::move(a), 0.0, c, v});
        }

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> bpick(0, cfg.b_grid.size() - 1);
  std::uniform_int_distribution<std::size_t> cpick(0, cfg.c_grid.size() - 1);
  std::uniform_int_distribution<std::size_t> vpick(0, cfg.v_grid.size() - 1);
  std::size_t norm_idx = 0;
  while (static_cast<int>(pool.size()) < cfg.pool_size) {
    Vec a = Vec::NullaryExpr(d, [&](Eigen::Index) { return gauss(rng); });
    const double len = a.norm();
    if (len < 1e-12) continue;
    a *= cfg.a_norms[norm_idx % cfg.a_norms.size()] / len;
    ++norm_idx;
    pool.push_back({std::move(a), cfg.b_grid[bpick(rng)], cfg.c_grid[cpick(rng)],
                    cfg.v_grid[vpick(rng)]});
  }
  if (static_cast<int>(pool.size()) > cfg.pool_size) pool.resize(cfg.pool_size);
  return pool;
}

// Least-squares error reduction of adding feature f against residual r.
double score_feature(const Eigen::VectorXd& r, const Eigen::VectorXd& f) {
  const double ff = f.squaredNorm();
  if (ff < 1e-30) return -1.0;
  const double rf = r.dot(f);
  return rf * rf / ff;
}

ElementaryParams zero_factor(int d) {
  return ElementaryParams{Vec::Zero(d), 0.0, 0.0, 0.0};
}

// Scale a factor by beta without changing its value profile:
// (a, b, c, v) -> (beta a, beta b, c / beta^2, v) multiplies the whole
// elementary map by beta (the softmax weights are invariant).
ElementaryParams fold_coefficient(const ElementaryParams& p, double beta) {
  ElementaryParams out = p;
  out.a *= beta;
  out.b *= beta;
  out.c /= beta * beta;
  return out;
}

}  // namespace

FitResult fit(const InContextTarget& target, int d, int dprime,
              const FitConfig& config,
              const std::vector<std::pair<ParticleMeasure, Vec>>& train,
              const std::vector<std::pair<ParticleMeasure, Vec>>& holdout,
              std::uint64_t seed) {
  std::vector<Vec> train_values, holdout_values;
  train_values.reserve(train.size());
  for (const auto& [mu, x] : train) train_values.push_back(target(mu, x));
  holdout_values.reserve(holdout.size());
  for (const auto& [mu, x] : holdout) holdout_values.push_back(target(mu, x));
  return fit_values(d, dprime, config, train, train_values, holdout,
                    holdout_values, seed);
}

FitResult fit_values(int d, int dprime, const FitConfig& config,
                     const std::vector<std::pair<ParticleMeasure, Vec>>& train,
                     const std::vector<Vec>& train_values,
                     const std::vector<std::pair<ParticleMeasure, Vec>>& holdout,
                     const std::vector<Vec>& holdout_values, std::uint64_t seed) {
  if (train.empty()) throw std::invalid_argument("fit: empty training set");
  if (train.size() != train_values.size() || holdout.size() != holdout_values.size())
    throw std::invalid_argument("fit: pair/value count mismatch");
  if (config.terms < 1 || config.factors < 1 || config.pool_size < 1)
    throw std::invalid_argument("fit: bad config");
  const int P = static_cast<int>(train.size());

  const std::vector<ElementaryParams> pool = make_pool(d, config, seed);
  const int C = static_cast<int>(pool.size());

  // Candidate values on the training pairs, computed once.
  Eigen::MatrixXd cand(P, C);
  for (int c = 0; c < C; ++c)
    for (int j = 0; j < P; ++j)
      cand(j, c) = gamma_elementary(pool[c], train[j].first, train[j].second);

  Eigen::MatrixXd targets(P, dprime);
  for (int j = 0; j < P; ++j) targets.row(j) = train_values[static_cast<std::size_t>(j)].transpose();

  AlgebraElement A;
  A.d = d;
  A.dprime = dprime;
  A.terms = config.terms;
  A.factors = config.factors;
  A.params.resize(static_cast<std::size_t>(dprime * A.terms * A.factors),
                  zero_factor(d));

  const auto solve_ridge = [&](const Eigen::MatrixXd& F, const Eigen::VectorXd& y,
                               Eigen::VectorXd& beta) {
    Eigen::MatrixXd G = F.transpose() * F;
    G.diagonal().array() += config.ridge;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
    beta = ldlt.solve(F.transpose() * y);
    if (ldlt.info() != Eigen::Success || !beta.allFinite())
      throw std::runtime_error(
          "fit: singular normal equations; increase the ridge weight");
    return (y - F * beta).squaredNorm();
  };

  for (int h = 0; h < dprime; ++h) {
    const Eigen::VectorXd y = targets.col(h);
    Eigen::VectorXd residual = y;
    Eigen::MatrixXd features(P, config.terms);
    std::vector<std::vector<int>> chosen(
        static_cast<std::size_t>(config.terms),
        std::vector<int>(static_cast<std::size_t>(config.factors), 0));

    // Greedy term assembly against the running residual.
    for (int n = 0; n < config.terms; ++n) {
      Eigen::VectorXd prod = Eigen::VectorXd::Ones(P);
      for (int t = 0; t < config.factors; ++t) {
        int best = 0;
        double best_score = -1.0;
        for (int c = 0; c < C; ++c) {
          const Eigen::VectorXd f = prod.cwiseProduct(cand.col(c));
          const double s = score_feature(residual, f);
          if (s > best_score) {  // ties keep the lowest index
            best_score = s;
            best = c;
          }
        }
        chosen[static_cast<std::size_t>(n)][static_cast<std::size_t>(t)] = best;
        prod = prod.cwiseProduct(cand.col(best));
      }
      features.col(n) = prod;
      Eigen::VectorXd beta;
      solve_ridge(features.leftCols(n + 1), y, beta);
      residual = y - features.leftCols(n + 1) * beta;
    }

    // Replacement sweeps: revisit every factor slot and keep the candidate
    // that lowers the refit error; greedy picks are often diluted across
    // correlated candidates and this recovers representable targets.
    Eigen::VectorXd beta;
    double err = solve_ridge(features, y, beta);
    for (int pass = 0; pass < 4; ++pass) {
      bool improved = false;
      for (int n = 0; n < config.terms; ++n)
        for (int t = 0; t < config.factors; ++t) {
          Eigen::VectorXd base = Eigen::VectorXd::Ones(P);
          for (int s = 0; s < config.factors; ++s)
            if (s != t)
              base = base.cwiseProduct(cand.col(
                  chosen[static_cast<std::size_t>(n)][static_cast<std::size_t>(s)]));
          int best = chosen[static_cast<std::size_t>(n)][static_cast<std::size_t>(t)];
          Eigen::MatrixXd trial = features;
          for (int c = 0; c < C; ++c) {
            if (c == best) continue;
            trial.col(n) = base.cwiseProduct(cand.col(c));
            Eigen::VectorXd beta_try;
            const double err_try = solve_ridge(trial, y, beta_try);
            if (err_try < err * (1.0 - 1e-12)) {
              err = err_try;
              best = c;
              improved = true;
            }
          }
          if (best !=
              chosen[static_cast<std::size_t>(n)][static_cast<std::size_t>(t)]) {
            chosen[static_cast<std::size_t>(n)][static_cast<std::size_t>(t)] = best;
            features.col(n) = base.cwiseProduct(cand.col(best));
          }
        }
      if (!improved) break;
    }

    err = solve_ridge(features, y, beta);
    for (int m = 0; m < config.terms; ++m) {
      const std::vector<int>& idx = chosen[static_cast<std::size_t>(m)];
      if (std::abs(beta(m)) < 1e-12) {
        for (int t = 0; t < config.factors; ++t) A.at(h, m, t) = zero_factor(d);
        continue;
      }
      for (int t = 0; t < config.factors; ++t)
        A.at(h, m, t) = pool[static_cast<std::size_t>(
            idx[static_cast<std::size_t>(t)])];
      A.at(h, m, config.factors - 1) =
          fold_coefficient(A.at(h, m, config.factors - 1), beta(m));
    }
  }

  FitResult result;
  result.algebra = std::move(A);
  for (std::size_t j = 0; j < train.size(); ++j)
    result.train_max_error = std::max(
        result.train_max_error,
        (eval_algebra(result.algebra, train[j].first, train[j].second) -
         train_values[j])
            .norm());
  for (std::size_t j = 0; j < holdout.size(); ++j)
    result.holdout_max_error = std::max(
        result.holdout_max_error,
        (eval_algebra(result.algebra, holdout[j].first, holdout[j].second) -
         holdout_values[j])
            .norm());
  return result;
}

}  // namespace ictx
