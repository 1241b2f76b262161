#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ictx/measure.hpp"
#include "ictx/measure_io.hpp"
#include "ictx/transport.hpp"

using namespace ictx;

namespace {

Vec v1(double x) {
  Vec p(1);
  p << x;
  return p;
}

Vec v2(double x, double y) {
  Vec p(2);
  p << x, y;
  return p;
}

}  // namespace

TEST_CASE("from_tokens builds the uniform empirical measure") {
  const ParticleMeasure mu = from_tokens({v2(1, 0), v2(0, 1)});
  CHECK(mu.size() == 2);
  CHECK(mu.weight(0) == 0.5);
  CHECK(mu.weight(1) == 0.5);
  CHECK(mu.point(0) == v2(1, 0));
  CHECK(mu.point(1) == v2(0, 1));

  const ParticleMeasure single = from_tokens({v1(3)});
  CHECK(single.size() == 1);
  CHECK(single.weight(0) == 1.0);

  CHECK_THROWS_WITH_AS(from_tokens({}), "empty context", std::invalid_argument);
}

TEST_CASE("repeated tokens integrate like a single atom") {
  const Vec x = v2(0.3, -0.7);
  const ParticleMeasure mu = from_tokens({x, x, x, x, x});
  CHECK(mu.size() == 5);
  CHECK(mu.weight(2) == doctest::Approx(0.2).epsilon(1e-15));
  auto f = [](const Vec& y) { return std::sin(y(0)) + y(1) * y(1); };
  CHECK(std::abs(integrate(mu, f) - f(x)) <= 1e-12);
}

TEST_CASE("measure constructors enforce invariants") {
  CHECK_THROWS_AS(ParticleMeasure({v1(0), v1(1)}, {0.5, 0.6}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ParticleMeasure({v1(0)}, {-1.0}), std::invalid_argument);
  CHECK_THROWS_AS(ParticleMeasure({v1(0), v2(0, 1)}, {0.5, 0.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(SpaceTimeMeasure({v1(0)}, {1.5}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(SpaceTimeMeasure({v1(0), v1(1)}, {0.0}, {0.5, 0.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ParticleMeasure({v1(std::nan(""))}, {1.0}),
                  std::invalid_argument);
}

TEST_CASE("pushforward displaces supports and keeps weights") {
  const ParticleMeasure mu = from_tokens({v1(1), v1(2)});
  const ParticleMeasure same = pushforward(mu, [](const Vec& y) { return y; });
  CHECK(same.point(0) == mu.point(0));
  CHECK(same.point(1) == mu.point(1));

  const ParticleMeasure doubled =
      pushforward(mu, [](const Vec& y) { return Vec(2 * y); });
  CHECK(doubled.point(0)(0) == 2.0);
  CHECK(doubled.point(1)(0) == 4.0);
  CHECK(doubled.weights() == mu.weights());
}

TEST_CASE("pushforward satisfies the change-of-variables identity") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-1, 1);
  std::vector<Vec> pts;
  std::vector<double> ws;
  double total = 0;
  for (int i = 0; i < 9; ++i) {
    pts.push_back(v2(unif(rng), unif(rng)));
    ws.push_back(0.1 + std::abs(unif(rng)));
    total += ws.back();
  }
  for (double& w : ws) w /= total;
  const ParticleMeasure mu(pts, ws);
  auto T = [](const Vec& y) { return v2(y(0) - y(1), std::tanh(y(1))); };
  const ParticleMeasure pushed = pushforward(mu, T);
  for (const TestFunction& tf : default_dictionary(2)) {
    const double lhs = integrate(pushed, tf.f);
    const double rhs = integrate(mu, [&](const Vec& y) { return tf.f(T(y)); });
    CHECK(std::abs(lhs - rhs) <= 1e-12);
  }
}

TEST_CASE("pushforward_space keeps times and acts in space") {
  const SpaceTimeMeasure mu({v1(1), v1(2)}, {0.2, 0.8}, {0.5, 0.5});
  const SpaceTimeMeasure same =
      pushforward_space(mu, [](const Vec& y, double) { return y; });
  CHECK(same.point(0) == mu.point(0));
  CHECK(same.times() == mu.times());

  const SpaceTimeMeasure constant =
      pushforward_space(mu, [](const Vec&, double) { return v1(9); });
  CHECK(constant.point(0)(0) == 9.0);
  CHECK(constant.point(1)(0) == 9.0);
  CHECK(constant.times() == mu.times());
}

TEST_CASE("space push-forward commutes with disintegration by time") {
  // six particles over three distinct times
  const SpaceTimeMeasure mu(
      {v2(0, 0), v2(1, 0), v2(0, 1), v2(2, 2), v2(3, 1), v2(1, 4)},
      {0.0, 0.0, 0.5, 0.5, 1.0, 1.0}, {0.1, 0.2, 0.15, 0.15, 0.2, 0.2});
  auto T = [](const Vec& y, double s) { return v2(y(0) + s, y(1) * 2 - s); };
  const Disintegration lhs = disintegrate(pushforward_space(mu, T));
  const Disintegration rhs_src = disintegrate(mu);
  REQUIRE(lhs.groups.size() == rhs_src.groups.size());
  for (std::size_t g = 0; g < lhs.groups.size(); ++g) {
    const double s = rhs_src.groups[g].time;
    const ParticleMeasure pushed_group = pushforward(
        rhs_src.groups[g].conditional, [&](const Vec& y) { return T(y, s); });
    REQUIRE(lhs.groups[g].conditional.size() == pushed_group.size());
    for (std::size_t i = 0; i < pushed_group.size(); ++i) {
      CHECK((lhs.groups[g].conditional.point(i) - pushed_group.point(i))
                .lpNorm<Eigen::Infinity>() <= 1e-12);
      CHECK(std::abs(lhs.groups[g].conditional.weight(i) -
                     pushed_group.weight(i)) <= 1e-12);
    }
  }
}

TEST_CASE("mask keeps the discrete prefix semantics") {
  const int n = 8;
  std::vector<Vec> pts;
  std::vector<double> times, ws;
  for (int i = 1; i <= n; ++i) {
    pts.push_back(v1(i));
    times.push_back(static_cast<double>(i) / n);
    ws.push_back(1.0 / n);
  }
  const SpaceTimeMeasure mu(pts, times, ws);
  for (int i = 1; i <= n; ++i) {
    const SpaceTimeMeasure masked = mask(mu, static_cast<double>(i) / n);
    REQUIRE(masked.size() == static_cast<std::size_t>(i));
    for (std::size_t j = 0; j < masked.size(); ++j)
      CHECK(masked.weight(j) == doctest::Approx(1.0 / i).epsilon(1e-14));
  }
  // full window is the identity
  const SpaceTimeMeasure full = mask(mu, 1.0);
  REQUIRE(full.size() == mu.size());
  for (std::size_t j = 0; j < mu.size(); ++j) {
    CHECK(full.point(j) == mu.point(j));
    CHECK(full.weight(j) == doctest::Approx(mu.weight(j)).epsilon(1e-15));
  }
}

TEST_CASE("mask at zero returns the time-0 conditional") {
  const SpaceTimeMeasure mu({v1(0), v1(1), v1(2), v1(3), v1(4)},
                            {0.0, 0.0, 0.0, 0.4, 0.9},
                            {0.1, 0.12, 0.08, 0.3, 0.4});
  CHECK(sigma_mass(mu) == doctest::Approx(0.3).epsilon(1e-14));
  const SpaceTimeMeasure conditional = mask(mu, 0.0);
  REQUIRE(conditional.size() == 3);
  CHECK(conditional.weight(0) == doctest::Approx(0.1 / 0.3).epsilon(1e-14));
  CHECK(conditional.weight(1) == doctest::Approx(0.12 / 0.3).epsilon(1e-14));
  CHECK(conditional.weight(2) == doctest::Approx(0.08 / 0.3).epsilon(1e-14));
  for (std::size_t i = 0; i < conditional.size(); ++i)
    CHECK(conditional.time(i) == 0.0);
  CHECK(sigma_mass(conditional) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("mask of a null window is an error") {
  const SpaceTimeMeasure mu({v1(0), v1(1)}, {0.5, 1.0}, {0.5, 0.5});
  CHECK_THROWS_WITH_AS(mask(mu, 0.2), "mask of null time interval",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(mask(mu, 0.0), "mask of null time interval",
                       std::invalid_argument);
}

TEST_CASE("time marginal aggregates equal times") {
  const SpaceTimeMeasure one_time({v1(0), v1(1)}, {0.7, 0.7}, {0.4, 0.6});
  const TimeMarginal single = time_marginal(one_time);
  REQUIRE(single.size() == 1);
  CHECK(single.atoms()[0].mass == doctest::Approx(1.0).epsilon(1e-15));

  const SpaceTimeMeasure mu({v1(0), v1(1), v1(2)}, {0.0, 0.0, 0.5},
                            {0.2, 0.3, 0.5});
  const TimeMarginal tm = time_marginal(mu);
  REQUIRE(tm.size() == 2);
  CHECK(tm.atoms()[0].time == 0.0);
  CHECK(tm.atoms()[0].mass == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(tm.atoms()[1].time == 0.5);
  CHECK(tm.atoms()[1].mass == doctest::Approx(0.5).epsilon(1e-15));

  std::vector<Vec> pts;
  std::vector<double> times, ws;
  for (int i = 0; i < 5; ++i) {
    pts.push_back(v1(i));
    times.push_back(0.1 + 0.2 * i);
    ws.push_back(0.2);
  }
  const TimeMarginal distinct = time_marginal(SpaceTimeMeasure(pts, times, ws));
  REQUIRE(distinct.size() == 5);
  for (const TimeAtom& a : distinct.atoms())
    CHECK(a.mass == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("end point is the last support time and re-masking is a no-op") {
  const TimeMarginal tm({{0.0, 0.5}, {0.5, 0.5}});
  CHECK(end_point(tm) == 0.5);
  CHECK(end_point(TimeMarginal({{0.0, 1.0}})) == 0.0);

  const SpaceTimeMeasure mu({v1(0), v1(1), v1(2), v1(3)},
                            {0.0, 0.25, 0.5, 0.75}, {0.25, 0.25, 0.25, 0.25});
  const double t = 0.6;  // strictly between atoms
  const SpaceTimeMeasure once = mask(mu, t);
  const double e = end_point(time_marginal(once));
  CHECK(e == 0.5);
  const SpaceTimeMeasure again = mask(mu, e);
  REQUIRE(again.size() == once.size());
  for (std::size_t i = 0; i < once.size(); ++i) {
    CHECK(again.point(i) == once.point(i));
    CHECK(again.time(i) == once.time(i));
    CHECK(std::abs(again.weight(i) - once.weight(i)) <= 1e-15);
  }
}

TEST_CASE("disintegration groups by time and recombines") {
  const SpaceTimeMeasure distinct({v1(0), v1(1)}, {0.2, 0.9}, {0.5, 0.5});
  const Disintegration d1 = disintegrate(distinct);
  REQUIRE(d1.groups.size() == 2);
  CHECK(d1.groups[0].conditional.size() == 1);
  CHECK(d1.groups[0].conditional.weight(0) == 1.0);

  const SpaceTimeMeasure shared({v1(0), v1(1), v1(2)}, {0.0, 0.0, 0.6},
                                {0.1, 0.3, 0.6});
  const Disintegration d2 = disintegrate(shared);
  REQUIRE(d2.groups.size() == 2);
  CHECK(d2.groups[0].conditional.weight(0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(d2.groups[0].conditional.weight(1) == doctest::Approx(0.75).epsilon(1e-14));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(0, 1);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Vec> pts;
    std::vector<double> times, ws;
    double total = 0;
    const int n = 3 + trial;
    for (int i = 0; i < n; ++i) {
      pts.push_back(v2(unif(rng), unif(rng)));
      times.push_back(std::floor(unif(rng) * 4) / 4.0);
      ws.push_back(0.05 + unif(rng));
      total += ws.back();
    }
    for (double& w : ws) w /= total;
    const SpaceTimeMeasure mu(pts, times, ws);
    const SpaceTimeMeasure re = recombine(disintegrate(mu));

    std::vector<std::size_t> order(mu.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return mu.time(a) < mu.time(b);
    });
    REQUIRE(re.size() == mu.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      CHECK(re.point(i) == mu.point(order[i]));
      CHECK(re.time(i) == mu.time(order[i]));
      CHECK(std::abs(re.weight(i) - mu.weight(order[i])) <= 1e-12);
    }
  }
}

TEST_CASE("lipschitz estimate matches the path constant") {
  // phi(t) = (t, 0) sampled at {0, 0.5, 1}
  const SpaceTimeMeasure path({v2(0, 0), v2(0.5, 0), v2(1, 0)}, {0.0, 0.5, 1.0},
                              {1.0 / 3, 1.0 / 3, 1.0 / 3});
  CHECK(lipschitz_estimate(path) == doctest::Approx(1.0).epsilon(1e-12));

  const SpaceTimeMeasure constant({v2(2, 2), v2(2, 2)}, {0.0, 1.0}, {0.5, 0.5});
  CHECK(lipschitz_estimate(constant) == 0.0);

  // one token per distinct time with minimum gap delta
  const double delta = 0.25;
  const SpaceTimeMeasure tokens({v2(0, 0), v2(1, 1), v2(-1, 0.5)},
                                {0.0, 0.25, 0.75}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  double diameter = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      diameter = std::max(diameter, (tokens.point(i) - tokens.point(j)).norm());
  CHECK(lipschitz_estimate(tokens) <= diameter / delta + 1e-12);

  const SpaceTimeMeasure one_time({v1(0), v1(1)}, {0.3, 0.3}, {0.5, 0.5});
  CHECK_THROWS_AS(lipschitz_estimate(one_time), std::invalid_argument);
}

TEST_CASE("sigma mass reads the time-0 atom") {
  const SpaceTimeMeasure with_atom({v1(0), v1(1)}, {0.0, 0.5}, {0.3, 0.7});
  CHECK(sigma_mass(with_atom) == doctest::Approx(0.3).epsilon(1e-15));
  const SpaceTimeMeasure none({v1(0), v1(1)}, {0.2, 0.5}, {0.3, 0.7});
  CHECK(sigma_mass(none) == 0.0);
}

TEST_CASE("measure serialization round-trips bit-faithfully") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unif(-1, 1);
  std::vector<Vec> pts;
  std::vector<double> ws = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  pts.push_back(v2(0.1, unif(rng)));
  pts.push_back(v2(1e-300, -unif(rng) * 1e17));
  pts.push_back(v2(M_PI, std::nextafter(1.0, 2.0)));
  const ParticleMeasure mu(pts, ws);

  std::ostringstream os;
  os << "# comment line\n";
  write_measure(os, mu);
  std::istringstream is(os.str());
  const AnyMeasure back = read_measure(is);
  REQUIRE(std::holds_alternative<ParticleMeasure>(back));
  const ParticleMeasure& round = std::get<ParticleMeasure>(back);
  REQUIRE(round.size() == mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    CHECK(round.point(i) == mu.point(i));  // bitwise
    CHECK(round.weight(i) == mu.weight(i));
  }

  const SpaceTimeMeasure st({v1(0.25), v1(0.75)}, {0.0, 2.0 / 3}, {0.5, 0.5});
  std::ostringstream os2;
  write_measure(os2, st);
  std::istringstream is2(os2.str());
  const AnyMeasure back2 = read_measure(is2);
  REQUIRE(std::holds_alternative<SpaceTimeMeasure>(back2));
  const SpaceTimeMeasure& round2 = std::get<SpaceTimeMeasure>(back2);
  CHECK(round2.time(1) == st.time(1));
  CHECK(round2.point(0) == st.point(0));

  std::istringstream garbage("d=2 spacetime=5\n");
  CHECK_THROWS_AS(read_measure(garbage), std::runtime_error);
}
