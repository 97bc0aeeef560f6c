#include "layerpot/dini.hpp"
#include "layerpot/errors.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <doctest.h>

#include <cmath>
#include <vector>

using namespace layerpot;
using namespace layerpot::dini;

namespace {

// Independent oracle in s = ln t: tanh-sinh between breakpoints, exp-sinh on the tails.
double oracle_log_axis(const OscillationModulus& th, double d, double lo_s, double hi_s, bool left_tail,
                       bool right_tail) {
  const auto g = [&](double s) {
    const double t = std::exp(s), w = std::exp(-d * s);
    if (t == 0.0 || w == 0.0 || !std::isfinite(t)) return 0.0;  // tails where theta t^-d has decayed
    return th(t) * w;
  };
  std::vector<double> cuts{lo_s};
  for (double b : th.breakpoints())
    if (std::log(b) > lo_s && std::log(b) < hi_s) cuts.push_back(std::log(b));
  cuts.push_back(hi_s);
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  double sum = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) sum += ts.integrate(g, cuts[i], cuts[i + 1]);
  if (left_tail) sum += es.integrate([&](double u) { return g(lo_s - u); });
  if (right_tail) sum += es.integrate([&](double u) { return g(hi_s + u); });
  return sum;
}

// int_{t0}^r theta dt/t with t0 = e^-700; the part below t0 is beyond double range in t.
constexpr double kLogT0 = -700.0;
double oracle_small(const OscillationModulus& th, double r) {
  return oracle_log_axis(th, 0.0, kLogT0, std::log(r), false, false);
}

double oracle_large(const OscillationModulus& th, double d, double r) {
  const double hi = std::max(std::log(r) + 1.0, 10.0);
  return std::pow(r, d) * oracle_log_axis(th, d, std::log(r), hi, false, true);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("power modulus closed forms") {
  for (double alpha : {0.25, 0.5, 1.0, 1.5}) {
    const auto th = OscillationModulus::power(alpha);
    for (double r : geometric_grid(1e-6, 10.0, 15)) {
      CHECK(rel(dini_small(th, r), std::pow(r, alpha) / alpha) < 1e-12);
      CHECK(rel(dini_large(th, 2.0, r), std::pow(r, alpha) / (2.0 - alpha)) < 1e-12);
    }
  }
}

TEST_CASE("log_power small integral below the cap") {
  const double g = 0.25;
  const auto th = OscillationModulus::log_power(g);
  for (double r : geometric_grid(1e-12, 0.3, 12)) {
    const double expect = std::pow(-std::log(r), -g - 1.0) / (g + 1.0);
    CHECK(rel(dini_small(th, r), expect) < 1e-10);
  }
}

TEST_CASE("quadrature agrees with an independent oracle") {
  QuadratureOptions quad;
  quad.method = Method::quadrature;
  for (const auto& th : {OscillationModulus::power(0.5), OscillationModulus::log_power(0.25),
                         OscillationModulus::log_power(1.0)}) {
    for (double r : geometric_grid(1e-8, 10.0, 30)) {
      const double bulk = dini_small(th, r, quad) - dini_small(th, std::exp(kLogT0), quad);
      CHECK(rel(bulk, oracle_small(th, r)) < 1e-8);
      CHECK(rel(dini_large(th, 2.0, r, quad), oracle_large(th, 2.0, r)) < 1e-8);
    }
  }
}

TEST_CASE("closed form and quadrature agree") {
  QuadratureOptions cf, qd;
  cf.method = Method::closed_form;
  qd.method = Method::quadrature;
  for (const auto& th : {OscillationModulus::power(0.5), OscillationModulus::power(1.0),
                         OscillationModulus::log_power(0.25), OscillationModulus::log_power(1.0)}) {
    for (double r : geometric_grid(1e-8, 10.0, 30)) {
      CHECK(rel(dini_small(th, r, cf), dini_small(th, r, qd)) < 1e-8);
      // log_power has a large-scale closed form only above the cap at 1/e
      if (th.family() == Family::power || r >= std::exp(-1.0))
        CHECK(rel(dini_large(th, 2.0, r, cf), dini_large(th, 2.0, r, qd)) < 1e-8);
      else
        CHECK_THROWS_AS(dini_large(th, 2.0, r, cf), DomainError);
    }
  }
}

TEST_CASE("Fubini identity for the large-scale integral of I") {
  for (const auto& th : {OscillationModulus::power(0.5), OscillationModulus::log_power(0.25)}) {
    const ScalarFn I = [&](double t) { return dini_small(th, t); };
    for (double d : {1.0, 2.0}) {
      for (double r : geometric_grid(1e-6, 1.0, 8)) {
        const double lhs = d * integrate_large(I, d, r, th.breakpoints());
        const double rhs = dini_small(th, r) + dini_large(th, d, r);
        CHECK(rel(lhs, rhs) < 1e-6);
      }
    }
  }
}

TEST_CASE("constant modulus is not small-scale Dini") {
  const auto th = OscillationModulus::constant(1.0);
  CHECK_THROWS_AS(dini_small(th, 0.5), NotDiniError);
  CHECK(rel(dini_large(th, 2.0, 0.5), 0.5) < 1e-12);
}

TEST_CASE("power above the dimension is not large-scale Dini") {
  CHECK_THROWS_AS(dini_large(OscillationModulus::power(2.5), 2.0, 0.5), NotDiniError);
}

TEST_CASE("domain errors") {
  const auto th = OscillationModulus::power(0.5);
  CHECK_THROWS_AS(eval_modulus(th, 0.0), DomainError);
  CHECK_THROWS_AS(eval_modulus(th, -1.0), DomainError);
}

TEST_CASE("doubling property of the closed families") {
  const auto grid = geometric_grid(1e-10, 1e3, 200);
  CHECK(check_doubling(OscillationModulus::power(0.5), std::sqrt(2.0), grid).holds);
  CHECK(check_doubling(OscillationModulus::log_power(0.25), OscillationModulus::log_power(0.25).kappa(), grid).holds);
  CHECK_FALSE(check_doubling(OscillationModulus::power(1.0), 1.5, grid).holds);
}

TEST_CASE("integrals are monotone in r") {
  const auto th = OscillationModulus::log_power(0.25);
  const auto grid = geometric_grid(1e-9, 5.0, 40);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    CHECK(dini_small(th, grid[i]) > dini_small(th, grid[i - 1]));
    // L^d(r) r^{-d} is decreasing
    CHECK(dini_large(th, 2.0, grid[i]) / (grid[i] * grid[i]) <
          dini_large(th, 2.0, grid[i - 1]) / (grid[i - 1] * grid[i - 1]));
  }
}

TEST_CASE("tau budgets split into the two integrals") {
  const auto th = OscillationModulus::power(0.5);
  const auto tb = tau_budgets(th, 0.01, 0.5);
  CHECK(rel(tb.tau, dini_small(th, 0.01) + dini_large(th, 2.0, 0.01)) < 1e-12);
  CHECK(rel(tb.tau_hat, dini_small(th, 0.5) + dini_large(th, 1.0, 0.5)) < 1e-12);
}

TEST_CASE("tabulated modulus interpolates in log t") {
  const auto th = OscillationModulus::tabulated({0.01, 0.1, 1.0}, {0.1, 0.3, 1.0}, 2.0);
  CHECK(th(0.1) == doctest::Approx(0.3));
  CHECK(th(std::sqrt(0.01 * 0.1)) == doctest::Approx(0.2));
  CHECK(th(1e-5) == doctest::Approx(0.1));
  CHECK(th(10.0) == doctest::Approx(1.0));
}
