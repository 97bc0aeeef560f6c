#include "layerpot/measures.hpp"
#include "layerpot/operators.hpp"

#include <benchmark/benchmark.h>

using namespace layerpot;

namespace {

void BM_Assemble(benchmark::State& state) {
  const auto mu = measures::generate(measures::PlanePatch{static_cast<int>(state.range(0))});
  for (auto _ : state) benchmark::DoNotOptimize(ops::assemble(kernels::KernelSpec::riesz(), mu, 1e-9));
  state.SetComplexityN(static_cast<benchmark::IterationCount>(mu.size()));
}
BENCHMARK(BM_Assemble)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond)->Complexity(benchmark::oNSquared);

void BM_Matvec(benchmark::State& state) {
  const auto mu = measures::generate(measures::PlanePatch{static_cast<int>(state.range(0))});
  const auto m = ops::assemble(kernels::KernelSpec::riesz(), mu, 1e-9);
  const std::vector<double> f(mu.size(), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(ops::matvec_pairwise(m, f));
}
BENCHMARK(BM_Matvec)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

void BM_OpNorm(benchmark::State& state) {
  const auto mu = measures::generate(measures::PlanePatch{static_cast<int>(state.range(0))});
  ops::OpNormOptions o;
  o.method = static_cast<ops::OpNormMethod>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(ops::opnorm(kernels::KernelSpec::riesz(), mu, 1e-9, o));
  state.SetLabel(ops::to_string(o.method));
}
BENCHMARK(BM_OpNorm)
    ->ArgsProduct({{16, 24}, {static_cast<int>(ops::OpNormMethod::power), static_cast<int>(ops::OpNormMethod::lanczos),
                              static_cast<int>(ops::OpNormMethod::svd)}})
    ->Unit(benchmark::kMillisecond);

void BM_OpNormStreamed(benchmark::State& state) {
  const auto mu = measures::generate(measures::PlanePatch{static_cast<int>(state.range(0))});
  ops::OpNormOptions o;
  o.method = ops::OpNormMethod::lanczos;
  o.dense_limit = 0;
  for (auto _ : state) benchmark::DoNotOptimize(ops::opnorm(kernels::KernelSpec::riesz(), mu, 1e-9, o));
}
BENCHMARK(BM_OpNormStreamed)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace
