// Discrete probability measures over token space and space-time.
//
// A context of tokens is held as a weighted particle cloud: points in R^d
// with nonnegative weights summing to one. The space-time variant attaches
// a time coordinate in [0,1] to every particle so that causal masking
// becomes a restriction of the measure to a time window.

#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

namespace ictx {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Absolute tolerance for "weights sum to one" checks.
inline constexpr double kWeightSumTol = 1e-12;
/// Two time stamps closer than this are treated as the same instant.
inline constexpr double kTimeEqTol = 1e-12;

/// Weighted particle cloud in R^d. Immutable after construction.
class ParticleMeasure {
 public:
  /// Placeholder: a unit mass at the origin of R^1.
  ParticleMeasure() : points_{Vec::Zero(1)}, weights_{1.0} {}
  ParticleMeasure(std::vector<Vec> points, std::vector<double> weights);

  const std::vector<Vec>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  const Vec& point(std::size_t i) const { return points_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }

  std::size_t size() const { return points_.size(); }
  Eigen::Index dim() const { return points_.front().size(); }

 private:
  std::vector<Vec> points_;
  std::vector<double> weights_;
};

/// Weighted particles carrying (point in R^d, time in [0,1]).
class SpaceTimeMeasure {
 public:
  /// Placeholder: a unit mass at the origin of R^1 at time 0.
  SpaceTimeMeasure() : points_{Vec::Zero(1)}, times_{0.0}, weights_{1.0} {}
  SpaceTimeMeasure(std::vector<Vec> points, std::vector<double> times,
                   std::vector<double> weights);

  const std::vector<Vec>& points() const { return points_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& weights() const { return weights_; }
  const Vec& point(std::size_t i) const { return points_[i]; }
  double time(std::size_t i) const { return times_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }

  std::size_t size() const { return points_.size(); }
  Eigen::Index dim() const { return points_.front().size(); }

  /// Drops the time coordinate, keeping weights.
  ParticleMeasure space_marginal() const;

  /// Lifts every particle to R^{d+1}, time as the last coordinate.
  ParticleMeasure as_particles() const;

 private:
  std::vector<Vec> points_;
  std::vector<double> times_;
  std::vector<double> weights_;
};

/// Marginal of a space-time measure with respect to the time variable.
struct TimeAtom {
  double time;
  double mass;
};

class TimeMarginal {
 public:
  /// Placeholder: all mass at time 0.
  TimeMarginal() : atoms_{{0.0, 1.0}} {}
  explicit TimeMarginal(std::vector<TimeAtom> atoms);

  const std::vector<TimeAtom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }

  /// Total mass of atoms with time <= t.
  double mass_up_to(double t) const;

 private:
  std::vector<TimeAtom> atoms_;
};

/// Per-instant conditional measures mu(.|t) together with the marginal.
struct TimeGroup {
  double time;
  ParticleMeasure conditional;
};

struct Disintegration {
  std::vector<TimeGroup> groups;  // times strictly increasing
  TimeMarginal marginal;
};

// --- constructors and basic operations --------------------------------

/// Uniform empirical measure over the given tokens (order preserved).
/// Throws std::invalid_argument("empty context") when X is empty.
ParticleMeasure from_tokens(const std::vector<Vec>& tokens);

/// Displaces particle positions through T, keeping weights.
ParticleMeasure pushforward(const ParticleMeasure& mu,
                            const std::function<Vec(const Vec&)>& map);

/// Space-time push-forward acting in space only: the map sees (point, time)
/// and yields a new point; times and weights are unchanged.
SpaceTimeMeasure pushforward_space(
    const SpaceTimeMeasure& mu,
    const std::function<Vec(const Vec&, double)>& map);

/// Restriction of mu to the time window [0,t], renormalized. At t=0 returns
/// the conditional at time 0 concentrated at time 0. Throws when the window
/// carries no mass ("mask of null time interval").
SpaceTimeMeasure mask(const SpaceTimeMeasure& mu, double t);

/// Time marginal with masses aggregated over equal times.
TimeMarginal time_marginal(const SpaceTimeMeasure& mu);

/// Largest atom time of the marginal.
double end_point(const TimeMarginal& marginal);

/// Mass carried by the atom at time 0 (0 when there is none).
double sigma_mass(const SpaceTimeMeasure& mu);

/// Groups particles by time into normalized conditionals.
Disintegration disintegrate(const SpaceTimeMeasure& mu);

/// Recombines a disintegration back into a space-time measure, conditional
/// weights scaled by the marginal masses, ordered by time.
SpaceTimeMeasure recombine(const Disintegration& d);

/// Sampled Lipschitz certificate: the max of W2(group_i, group_{i+1}) over
/// the consecutive-time gap, taken over the distinct times of mu.
/// Requires at least two distinct times.
double lipschitz_estimate(const SpaceTimeMeasure& mu);

/// Integral of a scalar test function against a particle measure.
double integrate(const ParticleMeasure& mu,
                 const std::function<double(const Vec&)>& f);

}  // namespace ictx
