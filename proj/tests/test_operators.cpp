#include "layerpot/errors.hpp"
#include "layerpot/operators.hpp"

#include <Eigen/SVD>
#include <doctest.h>

#include <cmath>
#include <random>

using namespace layerpot;
using namespace layerpot::ops;
using kernels::KernelSpec;

namespace {

// Independent oracle: sigma_max of W^{1/2} K W^{1/2} with K assembled here.
double svd_oracle(const KernelSpec& k, const DiscreteMeasure& mu, double delta) {
  const auto n = static_cast<Eigen::Index>(mu.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3 * n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if ((mu.points[i] - mu.points[j]).norm() <= delta) continue;
      const Vec3 v = k(mu.points[i], mu.points[j]) * std::sqrt(mu.weights[i] * mu.weights[j]);
      m.block<3, 1>(3 * i, j) = v;
    }
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

DiscreteMeasure jittered(int n, std::uint64_t seed) {
  auto mu = measures::generate(measures::PlanePatch{n});
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(-0.2, 0.2), w(0.5, 1.5);
  for (auto& p : mu.points) p += Vec3(u(g), u(g), u(g)) / n;
  for (auto& x : mu.weights) x *= w(g);
  return mu;
}

}  // namespace

TEST_CASE("two-atom hand case has norm one") {
  DiscreteMeasure mu;
  mu.points = {Vec3::Zero(), Vec3(1, 0, 0)};
  mu.weights = {1.0, 1.0};
  for (auto m : {OpNormMethod::power, OpNormMethod::lanczos, OpNormMethod::svd}) {
    OpNormOptions o;
    o.method = m;
    CHECK(std::abs(opnorm(KernelSpec::riesz(), mu, 1e-9, o).sigma_max - 1.0) < 1e-10);
  }
  CHECK(opnorm(KernelSpec::riesz(), mu, 1.0).sigma_max == 0.0);
}

TEST_CASE("opnorm agrees with an SVD oracle") {
  const auto mu = jittered(8, 11);
  const auto f = std::make_shared<const field::MatrixField>(field::MatrixField::log_dini(0.25));
  const std::vector<KernelSpec> ks{KernelSpec::riesz(),
                                   KernelSpec::frozen(std::make_shared<const kernels::FrozenKernel>(
                                       f, field::AveragingOptions{256, 0})),
                                   KernelSpec(kernels::ModulusKernel{dini::OscillationModulus::power(0.5), 2.0})};
  for (const auto& k : ks)
    for (double delta : {1e-9, 0.1, 0.3}) {
      const double ref = svd_oracle(k, mu, delta);
      for (auto m : {OpNormMethod::power, OpNormMethod::lanczos, OpNormMethod::svd}) {
        OpNormOptions o;
        o.method = m;
        CHECK(std::abs(opnorm(k, mu, delta, o).sigma_max - ref) <= 1e-8 * ref);
      }
    }
}

TEST_CASE("streamed and dense paths agree") {
  const auto mu = jittered(10, 12);
  OpNormOptions dense, streamed;
  streamed.dense_limit = 1;
  const double a = opnorm(KernelSpec::riesz(), mu, 0.05, dense).sigma_max;
  const double b = opnorm(KernelSpec::riesz(), mu, 0.05, streamed).sigma_max;
  CHECK(std::abs(a - b) <= 1e-9 * a);
}

TEST_CASE("apply_truncated is bit-identical to the assembled matvec") {
  const auto mu = jittered(6, 13);
  std::vector<double> f(mu.size());
  std::mt19937_64 g(1);
  std::normal_distribution<double> n;
  for (auto& x : f) x = n(g);
  const auto m = assemble(KernelSpec::riesz(), mu, 0.1);
  const Eigen::VectorXd mv = matvec_pairwise(m, f);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const Vec3 v = apply_truncated(KernelSpec::riesz(), mu, 0.1, f, mu.points[i]);
    CHECK(v == mv.segment<3>(3 * static_cast<Eigen::Index>(i)));
  }
}

TEST_CASE("assembly refuses oversize measures") {
  const auto mu = measures::generate(measures::PlanePatch{8});
  CHECK_THROWS_AS(assemble(KernelSpec::riesz(), mu, 0.0, 32), BudgetError);
}

TEST_CASE("opnorm is nonincreasing in delta for the modulus kernel") {
  // Positive kernels lose mass monotonically as pairs are dropped.
  const auto mu = jittered(8, 14);
  const KernelSpec k(kernels::ModulusKernel{dini::OscillationModulus::power(1.0), 2.0});
  const auto grid = default_delta_grid(mu, 12);
  const auto sweep = opnorm(k, mu, grid);
  CHECK(sweep.per_delta.size() == grid.size());
  CHECK(std::is_sorted(grid.begin(), grid.end()));
  CHECK(sweep.sup == doctest::Approx(sweep.per_delta.front().sigma_max));
}

TEST_CASE("discrete Schur bound dominates the operator norm") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto mu = jittered(8, seed);
    for (const auto& th : {dini::OscillationModulus::power(0.5), dini::OscillationModulus::constant(1.0),
                           dini::OscillationModulus::log_power(0.25)}) {
      const KernelSpec k(kernels::ModulusKernel{th, 2.0});
      const auto sb = schur_bound(th, 2.0, mu, measures::diameter(mu), 0.0);
      CHECK(opnorm(k, mu, 1e-9).sigma_max <= sb.discrete * (1 + 1e-12));
    }
  }
}

TEST_CASE("analytic Schur bound is infinite without small-scale Dini") {
  const auto mu = jittered(4, 1);
  const auto sb = schur_bound(dini::OscillationModulus::constant(1.0), 2.0, mu, 1.0);
  CHECK(std::isinf(sb.analytic));
}

TEST_CASE("beta flatness separates a plane from the tetrix") {
  const auto plane = measures::generate(measures::PlanePatch{16});
  const Ball b{Vec3(0.5, 0.5, 0), 0.25};
  CHECK(beta_flatness(plane, b).beta < 1e-12);
  const auto tet = measures::generate(measures::Ifs{measures::IfsSpec::tetrix(), 5});
  const auto c = measures::barycenter(tet);
  CHECK(beta_flatness(tet, Ball{c, measures::diameter(tet) / 4}).beta > 0.05);
}

TEST_CASE("beta of a tilted plane with a given plane") {
  auto mu = measures::generate(measures::PlanePatch{12});
  for (auto& p : mu.points) p.z() = 0.3 * p.x();
  const Vec3 nrm = Vec3(-0.3, 0, 1).normalized();
  const Ball b{Vec3(0.5, 0.5, 0.15), 0.3};
  CHECK(beta_plane(mu, b, Plane::through(Vec3::Zero(), nrm)) < 1e-12);
  CHECK(beta_flatness(mu, b).beta < 1e-10);
}

TEST_CASE("theta_mu on the plane patch") {
  const auto mu = measures::generate(measures::PlanePatch{64});
  const double t = theta_mu(mu, Ball{Vec3(0.5, 0.5, 0), 0.25});
  CHECK(t == doctest::Approx(std::numbers::pi).epsilon(0.02));
}

TEST_CASE("compare_T_R with the identity field has zero difference") {
  auto mu = measures::generate(measures::PlanePatch{8});
  CompareOptions co;
  co.normalize = true;
  const auto r = compare_T_R(mu, field::MatrixField::identity(), measures::Cube{Vec3(0.5, 0.5, 0), 1.0}, co);
  CHECK(r.diff_norm < 1e-14);
  CHECK(r.norm_T == doctest::Approx(r.norm_R / (4 * std::numbers::pi)).epsilon(1e-10));
}
