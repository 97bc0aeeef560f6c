#include "layerpot/kernels.hpp"
#include "layerpot/spherical.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace layerpot;

namespace {

std::vector<Vec3> random_points(std::size_t n) {
  std::mt19937_64 g(1);
  std::normal_distribution<double> d;
  std::vector<Vec3> v(n);
  for (auto& p : v) p = Vec3(d(g), d(g), d(g));
  return v;
}

void BM_RieszKernel(benchmark::State& state) {
  const auto z = random_points(1024);
  for (auto _ : state)
    for (const auto& p : z) benchmark::DoNotOptimize(kernels::riesz_kernel(p));
  state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_RieszKernel);

void BM_ConstKernelGrad(benchmark::State& state) {
  Mat3 a;
  a << 2, 0.3, 0, 0.3, 1.2, 0.1, 0, 0.1, 1.5;
  const kernels::ConstKernel k(a);
  const auto z = random_points(1024);
  for (auto _ : state)
    for (const auto& p : z) benchmark::DoNotOptimize(k.grad(p));
  state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_ConstKernelGrad);

void BM_FrozenKernelWarm(benchmark::State& state) {
  auto f = std::make_shared<const field::MatrixField>(field::MatrixField::log_dini(0.25));
  const kernels::FrozenKernel k(f, {512, 0});
  const auto z = random_points(256);
  for (const auto& p : z) k(Vec3::Zero(), 0.1 * p);
  for (auto _ : state)
    for (const auto& p : z) benchmark::DoNotOptimize(k(Vec3::Zero(), 0.1 * p));
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_FrozenKernelWarm);

void BM_Harmonics(benchmark::State& state) {
  const int jmax = static_cast<int>(state.range(0));
  const Vec3 z = Vec3(0.3, -0.2, 0.9).normalized();
  for (auto _ : state) benchmark::DoNotOptimize(sph::eval_harmonics(jmax, z));
}
BENCHMARK(BM_Harmonics)->Arg(8)->Arg(24)->Arg(48);

}  // namespace

BENCHMARK_MAIN();
