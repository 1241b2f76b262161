#include "ictx/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ictx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMassEps = 1e-15;

double ground_cost(const Vec& x, const Vec& y, int p) {
  const double d = (x - y).norm();
  return p == 1 ? d : d * d;
}

// Successive shortest paths with node potentials on the bipartite
// transportation graph (real-valued supplies and demands). Nodes are
// sources 0..n-1 and sinks n..n+m-1; the reduced-cost invariant
// c + pi(u) - pi(v) >= 0 is maintained across phases. Dense Dijkstra,
// which is the right trade at n, m <= a few hundred.
TransportPlan solve_flow(const std::vector<Vec>& xs, const std::vector<double>& a,
                         const std::vector<Vec>& ys, const std::vector<double>& b,
                         int p) {
  const int n = static_cast<int>(xs.size());
  const int m = static_cast<int>(ys.size());
  const int nodes = n + m;

  std::vector<std::vector<double>> cost(n, std::vector<double>(m));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) cost[i][j] = ground_cost(xs[i], ys[j], p);

  std::vector<std::vector<double>> flow(n, std::vector<double>(m, 0.0));
  std::vector<double> supply = a, demand = b;
  std::vector<double> pot(nodes, 0.0);

  const int phase_cap = 50 * (nodes + 1);
  for (int phase = 0;; ++phase) {
    bool demand_left = false;
    for (int j = 0; j < m; ++j)
      if (demand[j] > kMassEps) demand_left = true;
    if (!demand_left) break;
    if (phase > phase_cap) throw std::runtime_error("transport: phase cap hit");

    std::vector<double> dist(nodes, kInf);
    std::vector<int> prev(nodes, -1);
    std::vector<char> done(nodes, 0);
    for (int i = 0; i < n; ++i)
      if (supply[i] > kMassEps) dist[i] = 0.0;

    while (true) {
      int best = -1;
      double best_d = kInf;
      for (int v = 0; v < nodes; ++v)
        if (!done[v] && dist[v] < best_d) {
          best_d = dist[v];
          best = v;
        }
      if (best < 0) break;
      done[best] = 1;
      if (best < n) {
        const int i = best;
        for (int j = 0; j < m; ++j) {
          double rc = cost[i][j] + pot[i] - pot[n + j];
          if (rc < 0.0) rc = 0.0;  // rounding guard
          if (dist[i] + rc < dist[n + j]) {
            dist[n + j] = dist[i] + rc;
            prev[n + j] = i;
          }
        }
      } else {
        const int j = best - n;
        for (int i = 0; i < n; ++i) {
          if (flow[i][j] <= 0.0) continue;
          double rc = -cost[i][j] + pot[n + j] - pot[i];
          if (rc < 0.0) rc = 0.0;
          if (dist[n + j] + rc < dist[i]) {
            dist[i] = dist[n + j] + rc;
            prev[i] = n + j;
          }
        }
      }
    }

    int sink = -1;
    double sink_d = kInf;
    for (int j = 0; j < m; ++j)
      if (demand[j] > kMassEps && dist[n + j] < sink_d) {
        sink_d = dist[n + j];
        sink = j;
      }
    if (sink < 0) throw std::runtime_error("transport: no augmenting path");

    // Recover the path sink -> ... -> root source.
    std::vector<int> path;  // node sequence from sink back to root
    for (int v = n + sink; v >= 0; v = prev[v]) {
      path.push_back(v);
      if (v < n && prev[v] < 0) break;
    }
    const int root = path.back();

    double push = std::min(demand[sink], supply[root]);
    for (std::size_t e = 0; e + 1 < path.size(); ++e) {
      const int v = path[e], u = path[e + 1];
      if (v < n)  // backward arc sink(u) -> source(v): bounded by its flow
        push = std::min(push, flow[v][u - n]);
    }

    for (std::size_t e = 0; e + 1 < path.size(); ++e) {
      const int v = path[e], u = path[e + 1];
      if (v >= n)
        flow[u][v - n] += push;  // forward arc source(u) -> sink(v)
      else
        flow[v][u - n] -= push;  // backward arc sink(u) -> source(v)
    }
    supply[root] -= push;
    demand[sink] -= push;

    for (int v = 0; v < nodes; ++v)
      pot[v] += std::min(dist[v] == kInf ? sink_d : dist[v], sink_d);
  }

  TransportPlan plan;
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      if (flow[i][j] > 0.0) {
        plan.flows.push_back({i, j, flow[i][j]});
        total += flow[i][j] * cost[i][j];
      }
  plan.cost = total;
  return plan;
}

// Exact assignment by shortest augmenting paths (Hungarian with
// potentials), used for equal-size uniform measures.
std::vector<int> solve_assignment(const std::vector<std::vector<double>>& c) {
  const int n = static_cast<int>(c.size());
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = kInf;
      for (int j = 1; j <= n; ++j)
        if (!used[j]) {
          const double cur = c[i0 - 1][j - 1] - u[i0] - v[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way[j] = j0;
          }
          if (minv[j] < delta) {
            delta = minv[j];
            j1 = j;
          }
        }
      for (int j = 0; j <= n; ++j)
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

bool is_uniform(const std::vector<double>& w) {
  const double expected = 1.0 / static_cast<double>(w.size());
  for (double x : w)
    if (std::abs(x - expected) > 1e-15) return false;
  return true;
}

}  // namespace

WassersteinResult wasserstein(const ParticleMeasure& mu,
                              const ParticleMeasure& nu, int p) {
  if (mu.dim() != nu.dim())
    throw std::invalid_argument("wasserstein: dimension mismatch");
  if (p != 1 && p != 2) throw std::invalid_argument("wasserstein: p must be 1 or 2");

  TransportPlan plan;
  if (mu.size() == nu.size() && is_uniform(mu.weights()) && is_uniform(nu.weights())) {
    const int n = static_cast<int>(mu.size());
    std::vector<std::vector<double>> c(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) c[i][j] = ground_cost(mu.point(i), nu.point(j), p);
    const std::vector<int> match = solve_assignment(c);
    const double w = 1.0 / static_cast<double>(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      plan.flows.push_back({i, match[i], w});
      total += w * c[i][match[i]];
    }
    plan.cost = total;
  } else {
    plan = solve_flow(mu.points(), mu.weights(), nu.points(), nu.weights(), p);
  }

  WassersteinResult result;
  result.value = p == 1 ? plan.cost : std::sqrt(std::max(plan.cost, 0.0));
  result.plan = std::move(plan);
  return result;
}

double spacetime_wasserstein(const SpaceTimeMeasure& mu,
                             const SpaceTimeMeasure& nu, int p) {
  return wasserstein(mu.as_particles(), nu.as_particles(), p).value;
}

TestDictionary default_dictionary(Eigen::Index dim) {
  TestDictionary dict;
  for (Eigen::Index i = 0; i < dim; ++i)
    dict.push_back({"x" + std::to_string(i),
                    [i](const Vec& x) { return x(i); }});
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = i; j < dim; ++j)
      dict.push_back({"x" + std::to_string(i) + "*x" + std::to_string(j),
                      [i, j](const Vec& x) { return x(i) * x(j); }});
  std::vector<Vec> dirs;
  for (Eigen::Index i = 0; i < dim; ++i) {
    Vec a = Vec::Zero(dim);
    a(i) = 0.5;
    dirs.push_back(a);
    dirs.push_back(-a);
  }
  Vec diag = Vec::Constant(dim, 0.5 / std::sqrt(static_cast<double>(dim)));
  dirs.push_back(diag);
  dirs.push_back(-diag);
  for (std::size_t k = 0; k < dirs.size(); ++k)
    dict.push_back({"exp" + std::to_string(k),
                    [a = dirs[k]](const Vec& x) { return std::exp(a.dot(x)); }});
  return dict;
}

double weakstar_gap(const ParticleMeasure& mu, const ParticleMeasure& nu,
                    const TestDictionary& dict) {
  if (dict.empty()) throw std::invalid_argument("weakstar_gap: empty dictionary");
  double worst = 0.0;
  for (const TestFunction& tf : dict)
    worst = std::max(worst, std::abs(integrate(mu, tf.f) - integrate(nu, tf.f)));
  return worst;
}

double plan_feasibility_error(const TransportPlan& plan,
                              const ParticleMeasure& mu,
                              const ParticleMeasure& nu) {
  std::vector<double> row(mu.size(), 0.0), col(nu.size(), 0.0);
  for (const Flow& f : plan.flows) {
    if (f.mass < 0.0) return kInf;
    row[static_cast<std::size_t>(f.source)] += f.mass;
    col[static_cast<std::size_t>(f.target)] += f.mass;
  }
  double err = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i)
    err = std::max(err, std::abs(row[i] - mu.weight(i)));
  for (std::size_t j = 0; j < col.size(); ++j)
    err = std::max(err, std::abs(col[j] - nu.weight(j)));
  return err;
}

}  // namespace ictx
