#include "ictx/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ictx/transport.hpp"

namespace ictx {

namespace {

void check_weights(const std::vector<double>& weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("negative or NaN weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > kWeightSumTol)
    throw std::invalid_argument("weights do not sum to 1");
}

void check_points(const std::vector<Vec>& points) {
  if (points.empty()) throw std::invalid_argument("empty context");
  const Eigen::Index d = points.front().size();
  if (d == 0) throw std::invalid_argument("zero-dimensional point");
  for (const Vec& p : points) {
    if (p.size() != d) throw std::invalid_argument("inconsistent point dimension");
    if (!p.allFinite()) throw std::invalid_argument("non-finite point coordinate");
  }
}

}  // namespace

ParticleMeasure::ParticleMeasure(std::vector<Vec> points,
                                 std::vector<double> weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  check_points(points_);
  if (points_.size() != weights_.size())
    throw std::invalid_argument("points/weights length mismatch");
  check_weights(weights_);
}

SpaceTimeMeasure::SpaceTimeMeasure(std::vector<Vec> points,
                                   std::vector<double> times,
                                   std::vector<double> weights)
    : points_(std::move(points)),
      times_(std::move(times)),
      weights_(std::move(weights)) {
  check_points(points_);
  if (points_.size() != times_.size() || points_.size() != weights_.size())
    throw std::invalid_argument("points/times/weights length mismatch");
  for (double t : times_)
    if (!(t >= 0.0 && t <= 1.0))
      throw std::invalid_argument("time outside [0,1]");
  check_weights(weights_);
}

ParticleMeasure SpaceTimeMeasure::space_marginal() const {
  return ParticleMeasure(points_, weights_);
}

ParticleMeasure SpaceTimeMeasure::as_particles() const {
  std::vector<Vec> lifted;
  lifted.reserve(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    Vec q(points_[i].size() + 1);
    q.head(points_[i].size()) = points_[i];
    q(points_[i].size()) = times_[i];
    lifted.push_back(std::move(q));
  }
  return ParticleMeasure(std::move(lifted), weights_);
}

TimeMarginal::TimeMarginal(std::vector<TimeAtom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw std::invalid_argument("empty time marginal");
  double sum = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (!(atoms_[i].mass > 0.0)) throw std::invalid_argument("nonpositive atom mass");
    if (i > 0 && !(atoms_[i].time > atoms_[i - 1].time))
      throw std::invalid_argument("atom times not strictly increasing");
    sum += atoms_[i].mass;
  }
  if (std::abs(sum - 1.0) > kWeightSumTol)
    throw std::invalid_argument("atom masses do not sum to 1");
}

double TimeMarginal::mass_up_to(double t) const {
  double sum = 0.0;
  for (const TimeAtom& a : atoms_)
    if (a.time <= t) sum += a.mass;
  return sum;
}

ParticleMeasure from_tokens(const std::vector<Vec>& tokens) {
  if (tokens.empty()) throw std::invalid_argument("empty context");
  const double w = 1.0 / static_cast<double>(tokens.size());
  return ParticleMeasure(tokens, std::vector<double>(tokens.size(), w));
}

ParticleMeasure pushforward(const ParticleMeasure& mu,
                            const std::function<Vec(const Vec&)>& map) {
  std::vector<Vec> moved;
  moved.reserve(mu.size());
  for (const Vec& p : mu.points()) moved.push_back(map(p));
  return ParticleMeasure(std::move(moved), mu.weights());
}

SpaceTimeMeasure pushforward_space(
    const SpaceTimeMeasure& mu,
    const std::function<Vec(const Vec&, double)>& map) {
  std::vector<Vec> moved;
  moved.reserve(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i)
    moved.push_back(map(mu.point(i), mu.time(i)));
  return SpaceTimeMeasure(std::move(moved), mu.times(), mu.weights());
}

SpaceTimeMeasure mask(const SpaceTimeMeasure& mu, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("mask time must be >= 0");
  // t = 0 selects the conditional at time 0; t > 0 the window [0,t].
  const double cutoff = (t == 0.0) ? kTimeEqTol : t;
  std::vector<Vec> points;
  std::vector<double> times, weights;
  double total = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu.time(i) <= cutoff) {
      points.push_back(mu.point(i));
      times.push_back(t == 0.0 ? 0.0 : mu.time(i));
      weights.push_back(mu.weight(i));
      total += mu.weight(i);
    }
  }
  if (points.empty() || total <= 0.0)
    throw std::invalid_argument("mask of null time interval");
  for (double& w : weights) w /= total;
  return SpaceTimeMeasure(std::move(points), std::move(times), std::move(weights));
}

namespace {

// Indices of mu sorted by time (stable), grouped by the time tolerance.
std::vector<std::vector<std::size_t>> time_groups(const SpaceTimeMeasure& mu) {
  std::vector<std::size_t> order(mu.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return mu.time(a) < mu.time(b);
  });
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i : order) {
    if (groups.empty() ||
        std::abs(mu.time(i) - mu.time(groups.back().front())) > kTimeEqTol)
      groups.emplace_back();
    groups.back().push_back(i);
  }
  return groups;
}

}  // namespace

TimeMarginal time_marginal(const SpaceTimeMeasure& mu) {
  std::vector<TimeAtom> atoms;
  for (const auto& group : time_groups(mu)) {
    double mass = 0.0;
    for (std::size_t i : group) mass += mu.weight(i);
    atoms.push_back({mu.time(group.front()), mass});
  }
  return TimeMarginal(std::move(atoms));
}

double end_point(const TimeMarginal& marginal) {
  return marginal.atoms().back().time;
}

double sigma_mass(const SpaceTimeMeasure& mu) {
  double mass = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (std::abs(mu.time(i)) <= kTimeEqTol) mass += mu.weight(i);
  return mass;
}

Disintegration disintegrate(const SpaceTimeMeasure& mu) {
  std::vector<TimeGroup> groups;
  std::vector<TimeAtom> atoms;
  for (const auto& group : time_groups(mu)) {
    double mass = 0.0;
    for (std::size_t i : group) mass += mu.weight(i);
    std::vector<Vec> pts;
    std::vector<double> ws;
    pts.reserve(group.size());
    for (std::size_t i : group) {
      pts.push_back(mu.point(i));
      ws.push_back(mu.weight(i) / mass);
    }
    const double time = mu.time(group.front());
    groups.push_back({time, ParticleMeasure(std::move(pts), std::move(ws))});
    atoms.push_back({time, mass});
  }
  return Disintegration{std::move(groups), TimeMarginal(std::move(atoms))};
}

SpaceTimeMeasure recombine(const Disintegration& d) {
  if (d.groups.size() != d.marginal.size())
    throw std::invalid_argument("disintegration group/marginal mismatch");
  std::vector<Vec> points;
  std::vector<double> times, weights;
  for (std::size_t g = 0; g < d.groups.size(); ++g) {
    const TimeGroup& group = d.groups[g];
    const double mass = d.marginal.atoms()[g].mass;
    for (std::size_t i = 0; i < group.conditional.size(); ++i) {
      points.push_back(group.conditional.point(i));
      times.push_back(group.time);
      weights.push_back(group.conditional.weight(i) * mass);
    }
  }
  return SpaceTimeMeasure(std::move(points), std::move(times), std::move(weights));
}

double lipschitz_estimate(const SpaceTimeMeasure& mu) {
  const Disintegration d = disintegrate(mu);
  if (d.groups.size() < 2)
    throw std::invalid_argument("lipschitz_estimate needs at least 2 distinct times");
  double worst = 0.0;
  for (std::size_t g = 0; g + 1 < d.groups.size(); ++g) {
    const double gap = d.groups[g + 1].time - d.groups[g].time;
    const double w2 =
        wasserstein(d.groups[g].conditional, d.groups[g + 1].conditional, 2).value;
    worst = std::max(worst, w2 / gap);
  }
  return worst;
}

double integrate(const ParticleMeasure& mu,
                 const std::function<double(const Vec&)>& f) {
  double sum = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) sum += mu.weight(i) * f(mu.point(i));
  return sum;
}

}  // namespace ictx
