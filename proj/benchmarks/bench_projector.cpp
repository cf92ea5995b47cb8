#include <benchmark/benchmark.h>

#include "msct/geometry.hpp"
#include "msct/phantom.hpp"
#include "msct/types.hpp"

namespace {

msct::FanBeamGeometry desk_geometry() {
    msct::FanBeamGeometry g;
    g.n_views = 360;
    g.n_det = 256;
    g.det_cell = 4.6875;
    return g;
}

const msct::ImageShape kShape{128, 128, 3.0};

void BM_SystemMatrixBuild(benchmark::State& state) {
    const auto g = desk_geometry();
    for (auto _ : state) {
        msct::SystemMatrix r(g, kShape, msct::kMillimetresToCentimetres);
        benchmark::DoNotOptimize(r.nonzeros());
    }
}
BENCHMARK(BM_SystemMatrixBuild)->Unit(benchmark::kMillisecond);

void BM_Forward(benchmark::State& state) {
    const msct::SystemMatrix r(desk_geometry(), kShape, msct::kMillimetresToCentimetres);
    const auto f = msct::rasterize(msct::builtin_phantom("thorax2"), kShape)[0];
    for (auto _ : state) benchmark::DoNotOptimize(r.forward(f).data.data());
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(r.rows()));
}
BENCHMARK(BM_Forward)->Unit(benchmark::kMillisecond);

void BM_Back(benchmark::State& state) {
    const msct::SystemMatrix r(desk_geometry(), kShape, msct::kMillimetresToCentimetres);
    const auto f = msct::rasterize(msct::builtin_phantom("thorax2"), kShape)[0];
    const auto p = r.forward(f);
    for (auto _ : state) benchmark::DoNotOptimize(r.back(p).values.data());
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(r.rows()));
}
BENCHMARK(BM_Back)->Unit(benchmark::kMillisecond);

void BM_ArtSweep(benchmark::State& state) {
    const msct::SystemMatrix r(desk_geometry(), kShape, msct::kMillimetresToCentimetres);
    const auto f = msct::rasterize(msct::builtin_phantom("thorax2"), kShape)[0];
    const auto p = r.forward(f);
    for (auto _ : state) benchmark::DoNotOptimize(r.art(p, 1, 1.0).values.data());
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(r.rows()));
}
BENCHMARK(BM_ArtSweep)->Unit(benchmark::kMillisecond);

void BM_Trace(benchmark::State& state) {
    const auto g = desk_geometry();
    int v = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(msct::trace(msct::ray_path(g, v, 128), kShape).size());
        v = (v + 1) % g.n_views;
    }
}
BENCHMARK(BM_Trace);

} // namespace
