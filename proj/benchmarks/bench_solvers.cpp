// bench_solvers.cpp — Liouvillian assembly and products, Hilbert transforms, one SCBA sweep
#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "cavitrans/fft.hpp"
#include "cavitrans/ngf.hpp"
#include "cavitrans/qme.hpp"

using namespace cavitrans;

namespace {

SystemParams standard_chain(int n) {
  SystemParams p;
  p.n_sites = n;
  p.t1 = 1e-4;
  p.t2 = 1e-2;
  p.gamma1 = p.gamma2 = 1e-3;
  p.kappa = 0.07;
  p.g = std::sqrt(0.1 * 1e-3 * 0.07);
  return p;
}

void BM_LiouvillianBuild(benchmark::State& state) {
  const SystemParams p = standard_chain(static_cast<int>(state.range(0)));
  const ManyBodyBasis basis(p.n_sites, static_cast<int>(state.range(1)));
  const SparseMatrixC h = build_hamiltonian(p, basis);
  for (auto _ : state) {
    Liouvillian l = build_liouvillian(h, p, basis);
    benchmark::DoNotOptimize(l.size());
  }
}
BENCHMARK(BM_LiouvillianBuild)->Args({2, 2})->Args({3, 2})->Args({3, 3})->Unit(benchmark::kMillisecond);

void BM_LiouvillianApply(benchmark::State& state) {
  const SystemParams p = standard_chain(static_cast<int>(state.range(0)));
  const ManyBodyBasis basis(p.n_sites, static_cast<int>(state.range(1)));
  const Liouvillian l = build_liouvillian(build_hamiltonian(p, basis), p, basis);
  const Eigen::VectorXcd v = Eigen::VectorXcd::Random(l.size());
  for (auto _ : state) benchmark::DoNotOptimize(l.apply(v));
  state.SetItemsProcessed(state.iterations() * l.matrix().nonZeros());
}
BENCHMARK(BM_LiouvillianApply)->Args({2, 2})->Args({3, 2})->Args({3, 3})->Unit(benchmark::kMicrosecond);

void BM_Hilbert(benchmark::State& state) {
  const long n = state.range(0);
  std::vector<cplx> f(n), out(n);
  for (long i = 0; i < n; ++i) {
    const double x = (i - 0.5 * n) / (0.05 * n);
    f[i] = 1.0 / (1.0 + x * x);
  }
  HilbertTransform h(n);
  for (auto _ : state) {
    h.apply(f.data(), 1, out.data(), 1);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Hilbert)->RangeMultiplier(4)->Range(1 << 12, 1 << 18)->Unit(benchmark::kMicrosecond);

// One pass of polarization, photon Dyson, electron self-energy and electron Dyson.
void BM_ScbaIteration(benchmark::State& state) {
  const SystemParams p = standard_chain(static_cast<int>(state.range(0)));
  GridOptions go;
  go.spacing = 1e-4;
  const FrequencyGrid grid = make_grid(p, go);
  const BlochBasis basis = bloch_basis(p);
  const LeadSelfEnergy leads = lead_self_energy(p, basis);
  NgfWorkspace ws(grid, p.n_sites);
  KeldyshSet electrons = g0_electron(grid, basis, default_occupations(p.n_sites));
  for (auto _ : state) {
    PhotonKeldysh photon = photon_polarization(electrons, p.g, ws);
    dyson_keldysh_photon(photon, p, ws);
    lm_electron_self_energy(electrons, photon, p.g, ws);
    for (int b = 0; b < 2; ++b) retarded_from_components(electrons.band[b], ws.hilbert_band(b));
    benchmark::DoNotOptimize(dyson_keldysh_electron(electrons, basis, leads, grid, Quadrature::Cell, 0.5));
  }
  state.counters["band_points"] = static_cast<double>(grid.band[1].count);
}
BENCHMARK(BM_ScbaIteration)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
