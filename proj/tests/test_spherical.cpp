#include "layerpot/errors.hpp"
#include "layerpot/kernels.hpp"
#include "layerpot/spherical.hpp"

#include <boost/math/special_functions/spherical_harmonic.hpp>
#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace layerpot;
using namespace layerpot::sph;

namespace {

Vec3 from_angles(double th, double ph) {
  return {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
}

}  // namespace

TEST_CASE("harmonics match Boost up to the real-form convention") {
  for (int j = 0; j <= 8; ++j)
    for (int ell = 1; ell <= 2 * j + 1; ++ell) {
      const int m = ell - j - 1;
      for (double th : {0.3, 1.1, 2.5})
        for (double ph : {0.2, 2.0, 4.4}) {
          // Boost includes the Condon-Shortley phase; undo it.
          const double cs = (std::abs(m) % 2) ? -1.0 : 1.0;
          double ref;
          if (m == 0)
            ref = boost::math::spherical_harmonic_r(j, 0, th, ph);
          else if (m > 0)
            ref = cs * std::sqrt(2.0) * boost::math::spherical_harmonic_r(j, m, th, ph);
          else
            ref = cs * std::sqrt(2.0) * boost::math::spherical_harmonic_i(j, -m, th, ph);
          CHECK(std::abs(eval_harmonic({j, ell}, from_angles(th, ph)) - ref) < 1e-12);
        }
    }
}

TEST_CASE("degree one harmonics") {
  const Vec3 z = Vec3(0.3, -0.4, 0.5).normalized();
  const double c = std::sqrt(3.0 / (4 * std::numbers::pi));
  CHECK(eval_harmonic({1, 1}, z) == doctest::Approx(c * z.y()));
  CHECK(eval_harmonic({1, 2}, z) == doctest::Approx(c * z.z()));
  CHECK(eval_harmonic({1, 3}, z) == doctest::Approx(c * z.x()));
}

TEST_CASE("addition theorem") {
  const Vec3 z = Vec3(-0.2, 0.7, 0.1).normalized();
  const auto y = eval_harmonics(20, z);
  for (int j = 0; j <= 20; ++j) {
    double s = 0;
    for (int ell = 1; ell <= 2 * j + 1; ++ell) s += y[flat_index(j, ell)] * y[flat_index(j, ell)];
    CHECK(s == doctest::Approx((2 * j + 1) / (4 * std::numbers::pi)).epsilon(1e-12));
  }
}

TEST_CASE("Gram matrix is the identity") {
  const int jmax = 10;
  const auto q = build_quadrature(jmax + 1);
  const int n = harmonic_count(jmax);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < q.nodes.size(); ++k) {
    const auto y = eval_harmonics(jmax, q.nodes[k]);
    const Eigen::Map<const Eigen::VectorXd> v(y.data(), n);
    g += q.weights[k] * v * v.transpose();
  }
  CHECK((g - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("quadrature exactness and weights") {
  const auto q = build_quadrature(12);
  CHECK(q.exactness == 23);
  double s = 0;
  for (double w : q.weights) s += w;
  CHECK(s == doctest::Approx(4 * std::numbers::pi).epsilon(1e-14));
}

TEST_CASE("unit length is enforced") {
  CHECK_THROWS_AS(eval_harmonics(3, Vec3(1, 1, 0)), DomainError);
}

TEST_CASE("Riesz kernel on the sphere is pure degree one") {
  const auto q = build_quadrature(12);
  const auto d = decompose([](const Vec3& z) { return z; }, 8, q);
  const double c = std::sqrt(4 * std::numbers::pi / 3);
  CHECK(d.coeff(0, 1, 3) == doctest::Approx(c).epsilon(1e-13));
  CHECK(d.coeff(1, 1, 1) == doctest::Approx(c).epsilon(1e-13));
  CHECK(d.coeff(2, 1, 2) == doctest::Approx(c).epsilon(1e-13));
  CHECK(d.residual < 1e-13);
  for (int c3 = 0; c3 < 3; ++c3)
    for (int j = 0; j <= 8; j += 2)
      for (int ell = 1; ell <= 2 * j + 1; ++ell) CHECK(std::abs(d.coeff(c3, j, ell)) < 1e-14);
}

TEST_CASE("decompose requires enough exactness") {
  const auto q = build_quadrature(4);
  CHECK_THROWS(decompose([](const Vec3& z) { return z; }, 8, q));
}

TEST_CASE("reconstruction reproduces a band-limited function") {
  const auto f = [](const Vec3& z) { return Vec3(z.x() * z.y(), z.z() * z.z() * z.x(), 1.0 + z.y()); };
  const auto d = decompose(f, 4, build_quadrature(8));
  const Vec3 z = Vec3(0.1, 0.9, -0.3).normalized();
  CHECK((reconstruct(d, z) - f(z)).norm() < 1e-13);
}

TEST_CASE("odd kernels have vanishing even coefficients") {
  Mat3 a;
  a << 1.3, 0.2, 0, 0.2, 0.9, 0.1, 0, 0.1, 1.1;
  const auto d = decompose([&](const Vec3& z) { return kernels::grad_theta(z, a); }, 12, build_quadrature(28));
  for (int c = 0; c < 3; ++c)
    for (int j = 0; j <= 12; j += 2)
      for (int ell = 1; ell <= 2 * j + 1; ++ell) CHECK(std::abs(d.coeff(c, j, ell)) < 1e-12);
}
