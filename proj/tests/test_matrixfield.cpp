#include "layerpot/errors.hpp"
#include "layerpot/matrixfield.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace layerpot;
using namespace layerpot::field;

namespace {

Mat3 sample_a0() {
  Mat3 a;
  a << 2, 0.3, 0, 0.3, 1.2, 0.1, 0, 0.1, 1.5;
  return a;
}

// Grid oracle for the ball average: midpoint rule on an n^3 grid clipped to the ball.
Mat3 grid_average(const MatrixField& a, const Vec3& x, double r, int n) {
  Mat3 s = Mat3::Zero();
  int count = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const Vec3 u((i + 0.5) / n * 2 - 1, (j + 0.5) / n * 2 - 1, (k + 0.5) / n * 2 - 1);
        if (u.squaredNorm() > 1) continue;
        s += a(x + r * u);
        ++count;
      }
  return s / count;
}

}  // namespace

TEST_CASE("constant fields average exactly and do not oscillate") {
  const auto a = MatrixField::constant(sample_a0(), 3.0);
  CHECK(a.is_constant());
  CHECK(ball_average(a, Vec3(1, 2, 3), 0.7, {}) == sample_a0());
  CHECK(ball_oscillation(a, Vec3::Zero(), 0.3, {}) == 0.0);
}

TEST_CASE("ball average agrees with a grid oracle") {
  const auto a = MatrixField::log_dini(0.25);
  for (double r : {0.05, 0.2}) {
    const Vec3 x(0.1, 0.05, 0.0);
    const Mat3 qmc = ball_average(a, x, r, {8192, 1});
    const Mat3 grid = grid_average(a, x, r, 80);
    CHECK(max_entry_norm(qmc - grid) < 2e-3);
  }
}

TEST_CASE("ball average is a pure function of its inputs") {
  const auto a = MatrixField::log_dini(0.25);
  const Vec3 x(0.01, 0.02, 0.03);
  CHECK(ball_average(a, x, 0.1, {512, 9}) == ball_average(a, x, 0.1, {512, 9}));
}

TEST_CASE("degenerate radius returns the point value") {
  const auto a = MatrixField::log_dini(0.25);
  const Vec3 x(0.2, 0, 0);
  CHECK(ball_average(a, x, 0.5 * kDegenerateRadius, {}) == a(x));
  CHECK_THROWS_AS(ball_average(a, x, 0.0, {}), DomainError);
}

TEST_CASE("log_dini oscillation decays like a log power") {
  const auto a = MatrixField::log_dini(0.25);
  std::vector<double> scaled;
  for (int k = 4; k <= 10; ++k) {
    const double r = std::exp(-k);
    const std::vector<Vec3> c{Vec3::Zero(), Vec3(0.5 * r, 0, 0), Vec3(r, 0, 0)};
    scaled.push_back(oscillation_estimate(a, r, c, {4096, 0}) * std::pow(k, 2.25));
  }
  const auto [lo, hi] = std::minmax_element(scaled.begin(), scaled.end());
  CHECK(*hi / *lo < 4.0);
}

TEST_CASE("sqrt_spd squares back") {
  const Mat3 m = sample_a0();
  const Mat3 s = sqrt_spd(m);
  CHECK(max_entry_norm(s * s - m) < 1e-14);
  CHECK(max_entry_norm(s - s.transpose()) == 0.0);
  Mat3 bad = Mat3::Identity();
  bad(2, 2) = -1;
  CHECK_THROWS_AS(sqrt_spd(bad), DomainError);
}

TEST_CASE("covariance normalization makes the averaged symmetric part Id") {
  Mat3 a1;
  a1 << 1.5, 0.2, 0, 0.2, 1, 0, 0, 0, 0.8;
  const MatrixField a({RadialBlend{sample_a0(), a1, {RadialProfile::Kind::log_dini, 0.25}}}, 3.0);
  const AveragingOptions ao{4096, 5};
  const auto cn = normalize_cov(a, Vec3::Zero(), 0.25, ao);
  CHECK(max_entry_norm(cn.s * cn.s_inv - Mat3::Identity()) < 1e-13);
  // Ahat(y) = S^{-1} A(S y) S^{-1} pointwise
  const Vec3 y(0.01, -0.02, 0.03);
  CHECK(max_entry_norm(cn.hat_a(y) - cn.s_inv * a(cn.s * y) * cn.s_inv) < 1e-13);
  const Mat3 avg = cn.s_inv * sym_part(ball_average(a, Vec3::Zero(), 0.25, ao)) * cn.s_inv;
  CHECK(max_entry_norm(avg - Mat3::Identity()) < 1e-12);
}

TEST_CASE("ellipticity report flags a non-definite field") {
  Mat3 bad = Mat3::Identity();
  bad(0, 0) = -0.5;
  const std::vector<Vec3> pts{Vec3::Zero(), Vec3(0.1, 0, 0)};
  CHECK_FALSE(ellipticity_report(MatrixField::constant(bad, 2.0), pts).pass);
  const auto ok = ellipticity_report(MatrixField::log_dini(0.25), pts);
  CHECK(ok.pass);
  CHECK(ok.lambda_hat <= 2.0);
}

TEST_CASE("declared modulus of log_dini dominates the measured oscillation") {
  const auto a = MatrixField::log_dini(0.25);
  const auto w = a.declared_modulus();
  for (double r : {1e-2, 1e-3, 1e-4}) {
    const std::vector<Vec3> c{Vec3::Zero()};
    CHECK(oscillation_estimate(a, r, c, {2048, 0}) <= 2.0 * w(r));
  }
}
