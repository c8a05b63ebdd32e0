#include <doctest.h>

#include <cmath>

#include "cascade/case_io.hpp"
#include "cascade/dynamics.hpp"
#include "cascade/opf.hpp"
#include "cascade/powerflow.hpp"
#include "helpers.hpp"

using namespace cascade;

namespace {

/// Star: generators on buses 1 and 2, the 1.0 pu load on bus 3. Machine
/// bases equal the system base so machine and system per-unit coincide.
Network star3() {
    Network net;
    net.buses = {testgrid::bus(1), testgrid::bus(2), testgrid::bus(3)};
    net.branches = {testgrid::branch(1, 1, 3, 0.1, 10.0), testgrid::branch(2, 2, 3, 0.1, 10.0)};
    net.generators = {testgrid::gen(1, 1, 1.2), testgrid::gen(2, 2, 1.2)};
    net.loads = {testgrid::load(1, 3, 1.0)};
    net.validate();
    return attach_dynamic_defaults(net);
}

DispatchResult star3_dispatch(double g1, double g2) {
    DispatchResult d;
    d.feasible = true;
    d.gen_setpoints = {{1, g1}, {2, g2}};
    return d;
}

Network toy24() {
    Network net = load_case(testgrid::case_dir() + "/toy24.m");
    apply_dynamic_sidecar(net, testgrid::case_dir() + "/toy24_dyn.txt");
    return attach_dynamic_defaults(net);
}

} // namespace

TEST_CASE("undisturbed system holds its equilibrium") {
    const Network net = toy24();
    const DispatchResult dispatch = dc_opf_all(net);
    DynConfig cfg;
    cfg.dt = 0.01;
    cfg.t_end = 10.0;
    DynamicEngine engine(net, dispatch, cfg);

    // electrical power matches the dispatch at t = 0
    for (const auto& [gid, pe] : engine.current_electrical_power())
        CHECK(pe == doctest::Approx(dispatch.gen_setpoints.at(gid)).epsilon(1e-9));

    engine.run();
    for (const Generator& g : net.generators)
        CHECK(std::abs(engine.machine_state(g.id).omega) < 1e-6);
    const CascadeResult r = engine.result();
    CHECK(r.events.empty());
    CHECK(r.demand_lost_mw == doctest::Approx(0.0));
}

TEST_CASE("flows at equilibrium equal the dc solution") {
    const Network net = toy24();
    const DispatchResult dispatch = dc_opf_all(net);
    DynConfig cfg;
    cfg.dt = 0.01;
    cfg.t_end = 1.0;
    DynamicEngine engine(net, dispatch, cfg);

    std::vector<BusId> island;
    for (const Bus& b : net.buses) island.push_back(b.id);
    const DcSolution sol = dc_power_flow(net, island, dispatch_injections(net, island, dispatch));
    for (const auto& [bid, flow] : engine.current_flows())
        CHECK(flow == doctest::Approx(sol.branch_flows.at(bid)).epsilon(1e-8));
}

TEST_CASE("islanded deficit settles at the droop-predicted frequency") {
    const Network net = star3();
    // gen 2 exports 0.02 pu; losing the tie leaves that deficit on island {1,3}
    DynamicEngine engine(net, star3_dispatch(0.98, 0.02), [] {
        DynConfig c;
        c.dt = 0.01;
        c.t_end = 40.0;
        return c;
    }());
    engine.apply_initial_outages({2});
    engine.run();

    // omega_ss = -dP / (sum 1/R + sum D + sum kf * P_load)
    const double expected = -0.02 / (1.0 / 0.05 + 1.0 + 1.0 * 1.0);
    CHECK(engine.island_coi_omega(1) == doctest::Approx(expected).epsilon(1e-3));
    // governor picked up the deficit: p_mech = p_ref - omega / R
    CHECK(engine.machine_state(1).p_mech ==
          doctest::Approx(0.98 - expected / 0.05).epsilon(1e-3));
    CHECK(engine.result().events.size() == 2); // initial trip + separation only
}

TEST_CASE("large deficit drives underfrequency load shedding") {
    const Network net = star3();
    const CascadeResult r = run_dynamic_cascade(net, star3_dispatch(0.70, 0.30), {2}, [] {
        DynConfig c;
        c.dt = 0.01;
        c.t_end = 30.0;
        return c;
    }());

    int sheds = 0;
    double remaining = 100.0; // MW served on the deficit island before shedding
    for (const auto& ev : r.events)
        if (ev.kind == EventKind::load_shed_ufls) {
            ++sheds;
            CHECK(ev.detail_mw == doctest::Approx(remaining * 0.15));
            remaining *= 0.85;
        }
    CHECK(sheds >= 1);
    CHECK(sheds <= 3);
    CHECK(r.demand_lost_mw == doctest::Approx(100.0 - remaining));
    CHECK_FALSE(r.blackout);
}

TEST_CASE("stranded surplus generator trips on overfrequency") {
    const Network net = star3();
    const CascadeResult r = run_dynamic_cascade(net, star3_dispatch(0.20, 0.80), {2}, [] {
        DynConfig c;
        c.dt = 0.01;
        c.t_end = 30.0;
        return c;
    }());

    bool ofgt = false;
    for (const auto& ev : r.events)
        if (ev.kind == EventKind::gen_trip_ofgt) {
            ofgt = true;
            CHECK(ev.element == 2);
            CHECK(ev.time > 0.5); // needs the full 0.5 s dwell
        }
    CHECK(ofgt);
    CHECK(r.demand_lost_mw > 0.0); // the big island had to shed
}

TEST_CASE("sustained overload trips the line near the inverse-time prediction") {
    // single line carrying 1.0 pu against a 0.8 pu rating: m = 1.25,
    // predicted trip at K/(m-1) = 40 s
    Network net = testgrid::two_bus(/*rating_pu=*/0.8);
    net = attach_dynamic_defaults(net);
    DispatchResult d;
    d.feasible = true;
    d.gen_setpoints = {{1, 1.0}};
    DynConfig cfg;
    cfg.dt = 0.01;
    cfg.t_end = 60.0;
    DynamicEngine engine(net, d, cfg);
    engine.run();

    const CascadeResult r = engine.result();
    REQUIRE(!r.events.empty());
    CHECK(r.events[0].kind == EventKind::branch_trip);
    CHECK(r.events[0].element == 1);
    CHECK(r.events[0].time == doctest::Approx(40.0).epsilon(0.01));
    CHECK(r.blackout); // load bus is stranded afterwards
}

TEST_CASE("traces are recorded at every step when enabled") {
    const Network net = star3();
    DynConfig cfg;
    cfg.dt = 0.1;
    cfg.t_end = 2.0;
    cfg.record_traces = true;
    Traces traces;
    run_dynamic_cascade(net, star3_dispatch(0.5, 0.5), {}, cfg, &traces);
    REQUIRE(traces.machine_omega.count(1));
    CHECK(traces.machine_omega.at(1).size() == 21); // t = 0 .. 2.0
    REQUIRE(traces.branch_loading.count(1));
    CHECK(traces.branch_loading.at(1).size() == 21);
}

TEST_CASE("results repeat bit-for-bit") {
    const Network net = toy24();
    const DispatchResult dispatch = dc_opf_all(net);
    DynConfig cfg;
    cfg.dt = 0.05;
    cfg.t_end = 30.0;
    const CascadeResult a = run_dynamic_cascade(net, dispatch, {5, 17}, cfg);
    const CascadeResult b = run_dynamic_cascade(net, dispatch, {5, 17}, cfg);
    CHECK(a.demand_lost_mw == b.demand_lost_mw);
    REQUIRE(a.events.size() == b.events.size());
    for (size_t i = 0; i < a.events.size(); ++i)
        CHECK(format_event_line(0, a.events[i]) == format_event_line(0, b.events[i]));
}

TEST_CASE("missing dynamic data is an init failure") {
    Network net = testgrid::two_bus(); // defaults never attached
    DispatchResult d;
    d.feasible = true;
    d.gen_setpoints = {{1, 1.0}};
    DynConfig cfg;
    CHECK_THROWS_AS(DynamicEngine(net, d, cfg), InitFailure);
}

TEST_CASE("bad step configuration is rejected") {
    const Network net = star3();
    DispatchResult d = star3_dispatch(0.5, 0.5);
    DynConfig cfg;
    cfg.dt = 0.0;
    CHECK_THROWS_AS(DynamicEngine(net, d, cfg), Error);
    cfg.dt = 1.0;
    cfg.t_end = 0.5;
    CHECK_THROWS_AS(DynamicEngine(net, d, cfg), Error);
}

TEST_CASE("unknown initial outage throws") {
    const Network net = star3();
    DynConfig cfg;
    DynamicEngine engine(net, star3_dispatch(0.5, 0.5), cfg);
    CHECK_THROWS_AS(engine.apply_initial_outages({9}), MalformedCase);
}
