// Exact Wasserstein distances between discrete measures and a weak*
// discrepancy probe over a dictionary of test functions.
//
// The solver is exact at desk scale: a successive-shortest-path network
// flow for general weights, and a shortest-augmenting-path assignment for
// equal-size uniform measures. No entropic approximation anywhere.

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ictx/measure.hpp"

namespace ictx {

/// One transport arc: mass moved from source particle to target particle.
struct Flow {
  int source;
  int target;
  double mass;
};

/// Optimal coupling between two particle measures.
/// `cost` is the linear-program objective, i.e. sum of mass * |x-y|^p.
struct TransportPlan {
  std::vector<Flow> flows;
  double cost = 0.0;
};

struct WassersteinResult {
  double value = 0.0;  // p-th root of the optimal cost
  TransportPlan plan;
};

/// Exact W_p between discrete measures, p in {1, 2}.
WassersteinResult wasserstein(const ParticleMeasure& mu,
                              const ParticleMeasure& nu, int p);

/// W_p on the space-time lift, treating (x, t) as a point in R^{d+1}.
double spacetime_wasserstein(const SpaceTimeMeasure& mu,
                             const SpaceTimeMeasure& nu, int p);

/// Named scalar test function for weak* probes.
struct TestFunction {
  std::string name;
  std::function<double(const Vec&)> f;
};

using TestDictionary = std::vector<TestFunction>;

/// Coordinates, pairwise coordinate products and a small fixed family of
/// exponentials exp(<a,.>); matches the separation structure of the
/// Laplace-transform probes.
TestDictionary default_dictionary(Eigen::Index dim);

/// max_f |int f dmu - int f dnu| over the dictionary.
double weakstar_gap(const ParticleMeasure& mu, const ParticleMeasure& nu,
                    const TestDictionary& dict);

/// Marginal feasibility slack of a plan (max row/column deviation).
double plan_feasibility_error(const TransportPlan& plan,
                              const ParticleMeasure& mu,
                              const ParticleMeasure& nu);

}  // namespace ictx
