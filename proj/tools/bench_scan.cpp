// Serial vs OpenMP-parallel detuning scan. Points are independent
// steady-state solves, so the parallel kernel should scale with threads
// while returning bit-identical results (asserted in the unit tests).

#include <benchmark/benchmark.h>

#include "cptclock/constants.hpp"
#include "cptclock/spectroscopy.hpp"

using namespace cptclock;

namespace {

ScanSpec demo_spec(int n_points) {
    ScanSpec spec;
    spec.species = find_species("Ca+");
    LaserParams& l = spec.lasers;
    l.omega_B = 2.0e6;
    l.omega_R = 3.5e4;
    l.omega_W = 2.5e4;
    l.delta_B = hz_to_angular(2.0e6);
    l.delta_R = 0.0;
    l.delta_W = l.delta_B;
    const DressedModel dm = make_dressed(l, spec.species);
    spec.axis = ScanAxis::W;
    spec.scan_center = l.delta_B - dm.light_shift;
    spec.scan_span = hz_to_angular(12.0);
    spec.n_points = n_points;
    return spec;
}

void bm_scan_serial(benchmark::State& state) {
    const ScanSpec spec = demo_spec(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(scan_spectrum_serial(spec));
    }
    state.SetItemsProcessed(state.iterations() * spec.n_points);
}

void bm_scan_parallel(benchmark::State& state) {
    const ScanSpec spec = demo_spec(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(scan_spectrum(spec));
    }
    state.SetItemsProcessed(state.iterations() * spec.n_points);
}

}  // namespace

BENCHMARK(bm_scan_serial)->Arg(51)->Arg(201)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_scan_parallel)->Arg(51)->Arg(201)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
