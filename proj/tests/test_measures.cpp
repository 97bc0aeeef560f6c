#include "layerpot/errors.hpp"
#include "layerpot/dini.hpp"
#include "layerpot/measures.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace layerpot;
using namespace layerpot::measures;

TEST_CASE("plane patch is a uniform probability measure on the unit square") {
  const auto mu = generate(PlanePatch{8});
  CHECK(mu.size() == 64);
  CHECK(mu.total_mass() == doctest::Approx(1.0).epsilon(1e-15));
  for (const auto& p : mu.points) CHECK(p.z() == 0.0);
  CHECK(min_spacing(mu) == doctest::Approx(1.0 / 8));
  validate(mu);
}

TEST_CASE("sphere points lie on the unit sphere") {
  const auto mu = generate(Sphere{200});
  CHECK(mu.size() == 200);
  for (const auto& p : mu.points) CHECK(p.norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(barycenter(mu).norm() < 0.05);
}

TEST_CASE("tetrix has dimension two and the open set condition") {
  const auto spec = IfsSpec::tetrix();
  CHECK(spec.similarity_dimension() == doctest::Approx(2.0));
  CHECK(spec.open_set_condition());
  const auto mu = generate(Ifs{spec, 3});
  CHECK(mu.size() == 64);
  CHECK(mu.total_mass() == doctest::Approx(1.0));
}

TEST_CASE("tetrix growth ratio is bounded across scales") {
  const auto mu = generate(Ifs{IfsSpec::tetrix(), 5});
  const std::vector<double> r{0.5, 0.25, 0.125, 0.0625};
  const auto g = growth_report(mu, r, 16, 1);
  CHECK(g.c0_hat > 0);
  CHECK(g.c0_hat < 10);
}

TEST_CASE("lacunary measure concentrates") {
  const auto a = generate(Lacunary{IfsSpec::tetrix(), 4, 1.0, 0});
  const auto b = generate(Lacunary{IfsSpec::tetrix(), 6, 1.0, 0});
  CHECK(a.total_mass() == doctest::Approx(1.0));
  CHECK(b.total_mass() == doctest::Approx(1.0));
  CHECK(b.size() < generate(Ifs{IfsSpec::tetrix(), 6}).size());
}

TEST_CASE("ball mass open versus closed") {
  DiscreteMeasure mu;
  mu.points = {Vec3::Zero(), Vec3(1, 0, 0)};
  mu.weights = {1.0, 2.0};
  CHECK(ball_mass(mu, Vec3::Zero(), 1.0) == 1.0);
  CHECK(ball_mass(mu, Vec3::Zero(), 1.0, true) == 3.0);
}

TEST_CASE("invalid measures are rejected") {
  DiscreteMeasure mu;
  mu.points = {Vec3::Zero()};
  mu.weights = {-1.0};
  CHECK_THROWS_AS(validate(mu), DomainError);
  mu.weights = {1.0, 2.0};
  CHECK_THROWS_AS(validate(mu), DomainError);
}

TEST_CASE("restriction and pushforward") {
  const auto mu = generate(PlanePatch{16});
  const auto r = restrict(mu, Cube{Vec3(0.25, 0.25, 0), 0.5});
  CHECK(r.size() == 64);
  const auto p = pushforward(mu, 2.0 * Mat3::Identity(), Vec3(1, 0, 0));
  CHECK(p.total_mass() == mu.total_mass());
  CHECK(diameter(p) == doctest::Approx(2 * diameter(mu)));
}

TEST_CASE("mollifier integrates to one") {
  // Midpoint grid oracle on [-1,1]^3.
  const int n = 120;
  double s = 0;
  const double h = 2.0 / n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) s += mollifier(Vec3(-1 + (i + 0.5) * h, -1 + (j + 0.5) * h, -1 + (k + 0.5) * h));
  CHECK(s * h * h * h == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(mollifier(Vec3::Zero()) == doctest::Approx(105.0 / (32 * std::numbers::pi)));
  CHECK(mollifier(Vec3(1.0, 0, 0)) == 0.0);
}

TEST_CASE("mollification conserves mass and keeps the barycenter") {
  const auto nu = generate(Ifs{IfsSpec::tetrix(), 3});
  for (double eps : {0.1, 0.01}) {
    const auto m = mollify(nu, eps, 4);
    CHECK(std::abs(m.total_mass() - nu.total_mass()) < 1e-12);
    CHECK((barycenter(m) - barycenter(nu)).norm() < 1e-12);
    for (const auto& p : m.points) {
      double best = 1e300;
      for (const auto& q : nu.points) best = std::min(best, (p - q).norm());
      CHECK(best <= eps);
    }
  }
}

TEST_CASE("mollified ball mass is full for a large ball") {
  const auto nu = generate(Ifs{IfsSpec::tetrix(), 2});
  CHECK(mollified_ball_mass(nu, 0.01, barycenter(nu), 10.0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("generation is deterministic in the seed") {
  const auto a = generate(LipschitzGraph{0.1, 6.0, 12}, 4);
  const auto b = generate(LipschitzGraph{0.1, 6.0, 12}, 4);
  CHECK(a.points == b.points);
  CHECK(a.weights == b.weights);
}

TEST_CASE("lacunary tetrix: survivors and growing small-scale density") {
  // With skew 1 every other generation keeps one child, so the support is one-dimensional
  // and the 2-density at fine scales grows with the level.
  double prev = 0;
  for (int level : {4, 6, 8}) {
    const auto mu = generate(Lacunary{IfsSpec::tetrix(), level, 1.0, 0});
    CHECK(mu.size() == static_cast<std::size_t>(1) << level);
    const auto grid = layerpot::dini::geometric_grid(1e-4, 2.0, 40);
    double upper = 0;
    for (const auto& x : mu.points) upper = std::max(upper, density_profile(mu, x, grid).upper_hat);
    CHECK(upper > prev);
    prev = upper;
  }
}
