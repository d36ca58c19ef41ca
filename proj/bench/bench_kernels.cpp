// Serial reference vs OpenMP drivers for the two hot loops.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "contactdyn/kernels.hpp"
#include "contactdyn/random.hpp"

using namespace contactdyn;

namespace {

kernels::GeneratorPlan plan_for(std::size_t m) {
  CoefficientSet d;
  d.n = 2;
  d.set({0}, 0.3);
  d.set({1}, -0.2);
  d.set({0, 0}, 1.0);
  d.set({0, 1}, 0.1);
  d.set({1, 1}, 0.8);
  return kernels::make_generator_plan(d, GridSpec::square(-5.0, 5.0, -5.0, 5.0, m, Boundary::reflecting));
}

std::vector<double> bump(std::size_t cells) {
  std::vector<double> p(cells);
  for (std::size_t i = 0; i < cells; ++i) p[i] = std::exp(-1e-4 * static_cast<double>(i % 997));
  return p;
}

template <auto Kernel>
void BM_generator(benchmark::State& state) {
  const auto plan = plan_for(static_cast<std::size_t>(state.range(0)));
  const auto p = bump(plan.spec.cells());
  std::vector<double> out(p.size());
  for (auto _ : state) {
    Kernel(plan, p, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(p.size()));
}

std::vector<double> ensemble(std::size_t samples, std::size_t dim) {
  std::vector<double> x(samples * dim);
  SplitMix64 rng(7);
  for (double& v : x) v = rng.uniform() - 0.5;
  return x;
}

template <auto Kernel>
void BM_power_sums(benchmark::State& state) {
  const auto samples = static_cast<std::size_t>(state.range(0));
  const auto x = ensemble(samples, 2);
  const std::vector<double> centre{0.0, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(x, samples, 2, centre, 4));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(samples));
}

}  // namespace

BENCHMARK(BM_generator<kernels::generator_serial>)->Arg(128)->Arg(512);
BENCHMARK(BM_generator<kernels::generator_parallel>)->Arg(128)->Arg(512);
BENCHMARK(BM_power_sums<kernels::power_sums_serial>)->Arg(100000)->Arg(1000000);
BENCHMARK(BM_power_sums<kernels::power_sums_parallel>)->Arg(100000)->Arg(1000000);

BENCHMARK_MAIN();
