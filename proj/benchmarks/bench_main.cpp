#include <benchmark/benchmark.h>

#include "nlch/dynamics.hpp"
#include "nlch/spectral.hpp"

namespace {

using namespace nlch;

Grid grid_1d(int n) {
  double len[] = {1.0};
  int cnt[] = {n};
  return make_grid(1, len, cnt);
}

Grid grid_2d(int n) {
  double len[] = {1.0, 1.0};
  int cnt[] = {n, n};
  return make_grid(2, len, cnt);
}

Field noise_field(const Grid& g, double amp) {
  Field f(g, 0.0);
  unsigned long long s = 12345;
  for (double& v : f.values) {
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    v = amp * (2.0 * double(s >> 11) * 0x1.0p-53 - 1.0);
  }
  return f;
}

void BM_ConvolveFFT(benchmark::State& state) {
  Grid g = grid_2d(static_cast<int>(state.range(0)));
  KernelSpec spec;
  spec.xi = 200.0;
  spec.normalize = true;
  Kernel k = build_kernel(spec, g);
  Field f = noise_field(g, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(k.convolve(f));
}
BENCHMARK(BM_ConvolveFFT)->Arg(32)->Arg(64)->Arg(128);

void BM_ConvolveDirect(benchmark::State& state) {
  Grid g = grid_2d(static_cast<int>(state.range(0)));
  KernelSpec spec;
  spec.xi = 200.0;
  spec.normalize = true;
  Kernel k = build_kernel(spec, g);
  Field f = noise_field(g, 0.5);
  const int n = g.nx();
  for (auto _ : state) {
    Field out(g);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j2 = 0; j2 < n; ++j2)
          for (int i2 = 0; i2 < n; ++i2)
            s += k.table_at(i - i2, j - j2) * f.at(i2, j2);
        out.at(i, j) = s * g.cell_volume();
      }
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_ConvolveDirect)->Arg(32)->Arg(64);

void BM_PoissonSolve(benchmark::State& state) {
  Grid g = grid_2d(static_cast<int>(state.range(0)));
  Spectral sp(g);
  Field f = noise_field(g, 1.0);
  double m = mean(f);
  for (double& v : f.values) v -= m;
  for (auto _ : state) benchmark::DoNotOptimize(sp.inv_neumann_laplacian(f));
}
BENCHMARK(BM_PoissonSolve)->Arg(64)->Arg(128)->Arg(256);

void BM_StepVariantA(benchmark::State& state) {
  Grid g = grid_1d(static_cast<int>(state.range(0)));
  KernelSpec spec;
  spec.xi = 100.0;
  spec.cj = 10.0 * std::sqrt(100.0 / M_PI);
  Kernel k = build_kernel(spec, g);
  Potential p = Potential::double_well();
  ModelConfig mc;
  mc.variant = Variant::A;
  mc.dt = 1e-4;
  Field phi0 = noise_field(g, 0.3);
  Simulator sim(mc, k, p, phi0);
  for (auto _ : state) benchmark::DoNotOptimize(sim.step());
}
BENCHMARK(BM_StepVariantA)->Arg(128)->Arg(256);

} // namespace

BENCHMARK_MAIN();
