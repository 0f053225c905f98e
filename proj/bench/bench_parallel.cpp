#include <random>

#include <benchmark/benchmark.h>

#include "stlc/quadform.hpp"

using namespace stlc;

namespace {

struct Fixture {
  KernelModel model;
  Signal u, v;
};

const Fixture& fixture(long J) {
  static std::map<long, Fixture> cache;
  auto it = cache.find(J);
  if (it != cache.end()) return it->second;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  std::vector<double> a(1024), b(1024);
  for (double& x : a) x = nd(rng);
  for (double& x : b) x = nd(rng);
  Fixture f{interaction_coefficients(cosine_coefficients(PotentialDesc::linear(), J), 0, J),
            Signal(Control::from_real(0.5, a)), Signal(Control::from_real(0.5, b))};
  return cache.emplace(J, std::move(f)).first->second;
}

void BM_q_time(benchmark::State& state, bool parallel) {
  const Fixture& f = fixture(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(q_time(f.model, f.u, f.v, false, parallel));
}

}  // namespace

BENCHMARK_CAPTURE(BM_q_time, serial, false)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(BM_q_time, parallel, true)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
