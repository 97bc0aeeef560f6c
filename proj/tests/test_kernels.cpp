#include "layerpot/errors.hpp"
#include "layerpot/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace layerpot;
using namespace layerpot::kernels;

namespace {

Vec3 random_z(std::mt19937_64& g) {
  std::normal_distribution<double> n;
  std::lognormal_distribution<double> len(0.0, 2.0);
  Vec3 z(n(g), n(g), n(g));
  return len(g) * z.normalized();
}

Mat3 random_spd(std::mt19937_64& g) {
  std::uniform_real_distribution<double> u(-1, 1);
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = u(g);
  return m * m.transpose() + 0.5 * Mat3::Identity();
}

}  // namespace

TEST_CASE("identity coefficients give the Riesz kernel over 4 pi") {
  std::mt19937_64 g(1);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vec3 z = random_z(g);
    const Vec3 r = riesz_kernel(z) / (4 * std::numbers::pi);
    worst = std::max(worst, (grad_theta(z, Mat3::Identity()) - r).norm() / r.norm());
  }
  CHECK(worst < 1e-13);
}

TEST_CASE("gradient matches finite differences of Theta") {
  std::mt19937_64 g(2);
  for (int i = 0; i < 200; ++i) {
    const Mat3 a = random_spd(g);
    Vec3 z = random_z(g);
    z = z.normalized() * (0.5 + z.norm() / (1 + z.norm()));
    const double h = 1e-5;
    Vec3 fd;
    for (int k = 0; k < 3; ++k) {
      Vec3 e = Vec3::Zero();
      e[k] = h;
      fd[k] = (theta(z + e, a) - theta(z - e, a)) / (2 * h);
    }
    CHECK((fd - grad_theta(z, a)).norm() < 1e-7 * (1 + fd.norm()));
  }
}

TEST_CASE("Theta solves the constant-coefficient equation away from 0") {
  // div(A grad Theta) = 0 via second differences of Theta.
  std::mt19937_64 g(3);
  for (int i = 0; i < 50; ++i) {
    const Mat3 a = random_spd(g);
    const Vec3 z = random_z(g).normalized();
    const double h = 1e-3;
    double lap = 0;
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q) {
        Vec3 ep = Vec3::Zero(), eq = Vec3::Zero();
        ep[p] = h;
        eq[q] = h;
        const double d2 = (theta(z + ep + eq, a) - theta(z + ep - eq, a) - theta(z - ep + eq, a) +
                           theta(z - ep - eq, a)) /
                          (4 * h * h);
        lap += a(p, q) * d2;
      }
    CHECK(std::abs(lap) < 1e-4);
  }
}

TEST_CASE("antisymmetric part of A does not enter") {
  std::mt19937_64 g(4);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int i = 0; i < 1000; ++i) {
    const Mat3 a = random_spd(g);
    Mat3 s;
    s << 0, u(g), u(g), 0, 0, u(g), 0, 0, 0;
    s = s - s.transpose().eval();
    const Vec3 z = random_z(g);
    const Vec3 d = grad_theta(z, a + s) - grad_theta(z, a);
    CHECK(d.cwiseAbs().maxCoeff() <= 1e-14 * grad_theta(z, a).norm());
  }
}

TEST_CASE("homogeneity of degree -2 and oddness") {
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> lam(0.01, 100);
  for (int i = 0; i < 2000; ++i) {
    const Mat3 a = random_spd(g);
    const Vec3 z = random_z(g);
    const double l = lam(g);
    const Vec3 k = grad_theta(z, a);
    CHECK((grad_theta(l * z, a) * l * l - k).norm() <= 1e-13 * k.norm());
    CHECK((grad_theta(-z, a) + k).norm() <= 1e-13 * k.norm());
    CHECK((riesz_kernel(-z) + riesz_kernel(z)).norm() == 0.0);
  }
}

TEST_CASE("z = 0 is a domain error") {
  CHECK_THROWS_AS(grad_theta(Vec3::Zero(), Mat3::Identity()), DomainError);
  CHECK_THROWS_AS(theta(Vec3::Zero(), Mat3::Identity()), DomainError);
}

TEST_CASE("frozen kernel with a constant field is the constant kernel") {
  Mat3 a0;
  a0 << 2, 0.3, 0, 0.3, 1.2, 0.1, 0, 0.1, 1.5;
  auto f = std::make_shared<const field::MatrixField>(field::MatrixField::constant(a0, 3.0));
  FrozenKernel fk(f, {});
  std::mt19937_64 g(6);
  for (int i = 0; i < 100; ++i) {
    const Vec3 x = random_z(g), y = random_z(g);
    CHECK((fk(x, y) - grad_theta(x - y, a0)).norm() <= 1e-14 * grad_theta(x - y, a0).norm());
  }
}

TEST_CASE("frozen cache returns identical bits") {
  auto f = std::make_shared<const field::MatrixField>(field::MatrixField::log_dini(0.25));
  FrozenKernel fk(f, {256, 3});
  const Vec3 x(0.1, 0.0, 0.0), y(0.1, 0.02, 0.01);
  const Vec3 first = fk(x, y);
  CHECK(fk.cache_size() >= 1);
  const Vec3 second = fk(x, y);
  CHECK(first == second);
  fk.clear_cache();
  CHECK(fk(x, y) == first);
}

TEST_CASE("k3 vanishes for the identity field") {
  const auto id = field::MatrixField::identity();
  const Vec3 z = Vec3(1, 2, 3).normalized();
  CHECK(k3_diff(id, Vec3::Zero(), 0.01, z, {}).norm() < 1e-15);
}

TEST_CASE("k1 budget needs r < R") {
  const auto th = dini::OscillationModulus::power(0.5);
  CHECK(k1_budget(th, 0.1, 1.0) > 0);
  CHECK_THROWS_AS(k1_budget(th, 1.0, 0.5), DomainError);
}
