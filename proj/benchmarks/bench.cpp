#include <benchmark/benchmark.h>

#include <set>

#include "cascade/case_io.hpp"
#include "cascade/dynamics.hpp"
#include "cascade/opf.hpp"
#include "cascade/powerflow.hpp"
#include "cascade/qss.hpp"
#include "cascade/topology.hpp"

using namespace cascade;

namespace {

Network grid() {
    Network net = load_case(std::string(CASCADE_CASE_DIR) + "/synth200.m");
    apply_dynamic_sidecar(net, std::string(CASCADE_CASE_DIR) + "/synth200_dyn.txt");
    return attach_dynamic_defaults(net, {});
}

void bm_dc_power_flow(benchmark::State& state) {
    const Network net = grid();
    const IslandPartition part = find_islands(net, {});
    const DispatchResult dispatch = dc_opf_all(net);
    const auto inj = dispatch_injections(net, part.islands.front(), dispatch);
    for (auto _ : state) {
        DcSolution sol = dc_power_flow(net, part.islands.front(), inj);
        benchmark::DoNotOptimize(sol.angles);
    }
}
BENCHMARK(bm_dc_power_flow);

void bm_static_cascade(benchmark::State& state) {
    const Network net = grid();
    for (auto _ : state) {
        CascadeResult r = run_static_cascade(net, {3, 17});
        benchmark::DoNotOptimize(r.demand_lost_mw);
    }
}
BENCHMARK(bm_static_cascade);

void bm_dynamic_second(benchmark::State& state) {
    const Network net = grid();
    const DispatchResult dispatch = dc_opf_all(net);
    DynConfig cfg;
    cfg.dt = 0.1;
    cfg.t_end = 60.0;
    for (auto _ : state) {
        DynamicEngine engine(net, dispatch, cfg);
        engine.apply_initial_outages({3, 17});
        for (int i = 0; i < 10; ++i) engine.step();
        benchmark::DoNotOptimize(engine.time());
    }
}
BENCHMARK(bm_dynamic_second);

void bm_dynamic_full_scenario(benchmark::State& state) {
    const Network net = grid();
    const DispatchResult dispatch = dc_opf_all(net);
    DynConfig cfg;
    cfg.dt = 0.1;
    cfg.t_end = 60.0;
    for (auto _ : state) {
        CascadeResult r = run_dynamic_cascade(net, dispatch, {3, 17}, cfg);
        benchmark::DoNotOptimize(r.demand_lost_mw);
    }
}
BENCHMARK(bm_dynamic_full_scenario);

} // namespace

BENCHMARK_MAIN();
