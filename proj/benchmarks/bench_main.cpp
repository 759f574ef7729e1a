#include <benchmark/benchmark.h>

#include "beamnf/beam_dynamics.hpp"
#include "beamnf/bnf_engine.hpp"
#include "beamnf/small_divisors.hpp"

using namespace beamnf;

namespace {

PolyHamiltonian beam(int M, int cutoff) { return build_R0(NonlinearitySpec::cubic(), 1.37, M, cutoff); }

void BM_Bracket(benchmark::State& st) {
  const int M = static_cast<int>(st.range(0));
  PolyHamiltonian H = beam(M, 3);
  FrequencyVector f(1.37, M);
  PolyHamiltonian S = solve_homological(project_resonant(H, ResonantPart::Range), f);
  for (auto _ : st) benchmark::DoNotOptimize(poisson_bracket(H, S));
  st.counters["terms"] = static_cast<double>(H.size());
}
BENCHMARK(BM_Bracket)->Arg(3)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_LieTransform(benchmark::State& st) {
  const int M = static_cast<int>(st.range(0));
  PolyHamiltonian H = beam(M, 5);
  FrequencyVector f(1.37, M);
  PolyHamiltonian S = solve_homological(project_resonant(project_degree(H, 1, DegreeFilter::Equal),
                                                         ResonantPart::Range), f);
  for (auto _ : st) benchmark::DoNotOptimize(lie_transform(H, S, 3));
}
BENCHMARK(BM_LieTransform)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Enumeration(benchmark::State& st) {
  const int l1 = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(enumerate_nonresonant(l1, 6));
}
BENCHMARK(BM_Enumeration)->Arg(3)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_BeamStep(benchmark::State& st) {
  const int M = static_cast<int>(st.range(0));
  NonlinearitySpec spec = NonlinearitySpec::cubic();
  BeamState s{random_state(M, 1e-2, Weight::sobolev(1.0, M), 1), 1.37, 0.0};
  for (auto _ : st) {
    s = step(s, spec, 1e-2);
    benchmark::DoNotOptimize(s.u.data().data());
  }
}
BENCHMARK(BM_BeamStep)->Arg(5)->Arg(10)->Arg(15);

void BM_PolySystemStep(benchmark::State& st) {
  const int M = 4;
  FrequencyVector f(1.37, M);
  PolySystem sys(f, beam(M, 5));
  SeqState u = random_state(M, 1e-2, Weight::sobolev(1.0, M), 2);
  for (auto _ : st) {
    sys.step(u, 1e-2);
    benchmark::DoNotOptimize(u.data().data());
  }
}
BENCHMARK(BM_PolySystemStep);

}  // namespace

BENCHMARK_MAIN();
