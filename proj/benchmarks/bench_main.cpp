#include "tbg/bm_model.hpp"
#include "tbg/hamiltonian.hpp"
#include "tbg/propagator.hpp"
#include "tbg/wavepacket.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>

namespace {

tbg::LatticeParams lattice() {
  tbg::LatticeParams p;
  p.theta = 1.05 * M_PI / 180.0;
  return p;
}

tbg::LatticeState random_state(std::shared_ptr<const tbg::SiteTable> table) {
  tbg::LatticeState psi{table, Eigen::VectorXcd::Random(static_cast<Eigen::Index>(table->size()))};
  psi.amplitudes.normalize();
  return psi;
}

void BM_Matvec(benchmark::State& state) {
  auto table = std::make_shared<const tbg::SiteTable>(tbg::enumerate_sites(lattice(), static_cast<double>(state.range(0))));
  const tbg::SparseHermitian h = tbg::assemble(table, tbg::HoppingModel{});
  const auto psi = random_state(table);
  Eigen::VectorXcd out(psi.amplitudes.size());
  for (auto _ : state) {
    h.apply(psi.amplitudes, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["sites"] = static_cast<double>(table->size());
  state.counters["nnz"] = static_cast<double>(h.full_nonzeros());
}
BENCHMARK(BM_Matvec)->Arg(30)->Arg(60)->Unit(benchmark::kMicrosecond);

void BM_ChebyshevEvolve(benchmark::State& state) {
  auto table = std::make_shared<const tbg::SiteTable>(tbg::enumerate_sites(lattice(), 40.0));
  const tbg::SparseHermitian h = tbg::assemble(table, tbg::HoppingModel{});
  const auto psi = random_state(table);
  tbg::PropagatorOptions opts;
  const double t = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(tbg::evolve(h, psi, t, opts).amplitudes.data());
  state.counters["sites"] = static_cast<double>(table->size());
}
BENCHMARK(BM_ChebyshevEvolve)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_StrangSteps(benchmark::State& state) {
  const tbg::BmParams bm = tbg::BmParams::make(6.6, 0.11, lattice());
  const int n = static_cast<int>(state.range(0));
  const tbg::Grid grid{2.0 * n, n};
  tbg::WavepacketSpec spec;
  spec.sigma_r = grid.box / 14.0;
  const tbg::Envelope f0 = tbg::make_envelope(spec, bm, grid, lattice().cell_area());
  for (auto _ : state) benchmark::DoNotOptimize(tbg::evolve_envelope_fixed(f0, 1.0, 10, bm).comp[0].data());
  state.counters["steps"] = benchmark::Counter(10.0, benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_StrangSteps)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
