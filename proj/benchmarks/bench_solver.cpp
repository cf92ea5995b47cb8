#include <benchmark/benchmark.h>

#include <random>

#include "msct/forward.hpp"
#include "msct/soma.hpp"
#include "msct/spectra.hpp"

namespace {

std::vector<std::string> materials(int m) {
    const std::vector<std::string> all{"water", "bone", "gold"};
    return {all.begin(), all.begin() + m};
}

void BM_PolyProject(benchmark::State& state) {
    const auto t = msct::builtin::reference_table(materials(static_cast<int>(state.range(0))));
    const msct::PolyModel model(msct::builtin::named_spectrum("140kvp"), t);
    msct::Vec q = msct::Vec::Constant(state.range(0), 0.5);
    q[0] = 20.0;
    for (auto _ : state) benchmark::DoNotOptimize(model.project(q));
}
BENCHMARK(BM_PolyProject)->Arg(2)->Arg(3);

void BM_Linearize(benchmark::State& state) {
    const auto t = msct::builtin::reference_table(materials(static_cast<int>(state.range(0))));
    const msct::PolyModel model(msct::builtin::named_spectrum("140kvp"), t);
    msct::Vec q = msct::Vec::Constant(state.range(0), 0.5);
    q[0] = 20.0;
    for (auto _ : state) benchmark::DoNotOptimize(model.linearize(q, 3.0).b);
}
BENCHMARK(BM_Linearize)->Arg(2)->Arg(3);

void BM_SomaSweep(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    std::vector<msct::LinearizedEq> eqs(static_cast<std::size_t>(m));
    for (auto& eq : eqs) {
        eq.a_row = msct::Vec(m);
        for (int i = 0; i < m; ++i) eq.a_row[i] = u(rng);
        eq.b = u(rng);
    }
    msct::SolveOptions opts;
    for (auto _ : state) {
        auto st = msct::SolverState::start(msct::Vec::Zero(m), opts);
        msct::sweep_in_place(st, eqs, opts);
        benchmark::DoNotOptimize(st.x.data());
    }
}
BENCHMARK(BM_SomaSweep)->Arg(2)->Arg(3)->Arg(4);

void BM_ToySolve(benchmark::State& state) {
    const auto t = msct::builtin::toy_table();
    std::vector<msct::EquationBuilder> builders;
    msct::Vec truth(2);
    truth << 1.0, 4.0;
    for (int k = 0; k < 2; ++k) {
        const msct::PolyModel model(msct::builtin::toy_spectrum(k), t);
        builders.push_back([model, p = model.project(truth)](const msct::Vec& x) { return model.linearize(x, p); });
    }
    msct::SolveOptions opts;
    opts.beta0 = 1.0;
    for (auto _ : state) benchmark::DoNotOptimize(msct::solve_system(msct::Vec::Zero(2), builders, opts).x[0]);
}
BENCHMARK(BM_ToySolve)->Unit(benchmark::kMicrosecond);

} // namespace
