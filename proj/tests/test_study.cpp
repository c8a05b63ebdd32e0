#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <unistd.h>

#include "cascade/case_io.hpp"
#include "cascade/study.hpp"
#include "helpers.hpp"

using namespace cascade;
namespace fs = std::filesystem;

namespace {

Network toy24() { return load_case(testgrid::case_dir() + "/toy24.m"); }

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("study_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(reinterpret_cast<uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("samples are distinct ascending pairs of in-service branches") {
    const Network net = toy24();
    const auto scenarios = sample_scenarios(net, 100, 5);
    REQUIRE(scenarios.size() == 100);
    std::set<std::array<BranchId, 2>> seen;
    for (const auto& s : scenarios) {
        CHECK(s.pair[0] < s.pair[1]);
        CHECK(seen.insert(s.pair).second);
        net.branch(s.pair[0]);
        net.branch(s.pair[1]);
    }
    for (size_t i = 0; i < scenarios.size(); ++i)
        CHECK(scenarios[i].scenario_id == static_cast<int>(i));
}

TEST_CASE("sampling is seed-reproducible and seed-sensitive") {
    const Network net = toy24();
    const auto a = sample_scenarios(net, 50, 7);
    const auto b = sample_scenarios(net, 50, 7);
    const auto c = sample_scenarios(net, 50, 8);
    REQUIRE(a.size() == b.size());
    bool same = true, differs = false;
    for (size_t i = 0; i < a.size(); ++i) {
        same = same && a[i].pair == b[i].pair;
        if (a[i].pair != c[i].pair) differs = true;
    }
    CHECK(same);
    CHECK(differs);
}

TEST_CASE("oversampling clamps to the full enumeration with a warning") {
    const Network net = testgrid::three_bus_ring();
    std::vector<std::string> warnings;
    const auto scenarios = sample_scenarios(net, 100, 1, &warnings);
    CHECK(scenarios.size() == 3); // C(3,2)
    CHECK(!warnings.empty());
}

TEST_CASE("out-of-service branches are never sampled") {
    Network net = toy24();
    net.branch(5).in_service = false;
    for (const auto& s : sample_scenarios(net, 200, 3)) {
        CHECK(s.pair[0] != 5);
        CHECK(s.pair[1] != 5);
    }
}

TEST_CASE("sampling needs a workable scenario space") {
    CHECK_THROWS_AS(sample_scenarios(toy24(), 0, 1), EmptyStudy);
    CHECK_THROWS_AS(sample_scenarios(testgrid::two_bus(), 5, 1), EmptyStudy);
}

TEST_CASE("convergence curves end at the sample mean") {
    const std::vector<double> losses = {5.0, 0.0, 20.0, 15.0, 10.0};
    const auto curves = convergence_curve(losses, 4, 99);
    REQUIRE(curves.size() == 4);
    for (const auto& c : curves) {
        REQUIRE(c.size() == losses.size());
        CHECK(c.back() == doctest::Approx(10.0));
    }
    // permutations differ
    CHECK((curves[0] != curves[1] || curves[1] != curves[2]));
}

TEST_CASE("study config round-trips through json") {
    StudyConfig cfg;
    cfg.case_path = "a.m";
    cfg.engine = "both";
    cfg.scenario_count = 123;
    cfg.seed = 99;
    cfg.dt = 0.02;
    cfg.alphas = {0.9, 0.99};
    cfg.relays.overload.threshold_k = 12.0;
    cfg.relays.ufls.stages = {{0.98, 0.1, 0.2}};
    cfg.defaults.inertia_h = 6.0;

    TempDir tmp;
    const auto path = tmp.path / "cfg.json";
    std::ofstream(path) << study_config_to_json(cfg);
    const StudyConfig back = load_study_config(path.string());
    CHECK(back.case_path == "a.m");
    CHECK(back.engine == "both");
    CHECK(back.scenario_count == 123);
    CHECK(back.seed == 99);
    CHECK(back.dt == doctest::Approx(0.02));
    CHECK(back.alphas == std::vector<double>{0.9, 0.99});
    CHECK(back.relays.overload.threshold_k == doctest::Approx(12.0));
    REQUIRE(back.relays.ufls.stages.size() == 1);
    CHECK(back.relays.ufls.stages[0].freq_threshold == doctest::Approx(0.98));
    CHECK(back.defaults.inertia_h == doctest::Approx(6.0));
}

TEST_CASE("a full study writes records, logs and reports for both engines") {
    TempDir tmp;
    StudyConfig cfg;
    cfg.case_path = testgrid::case_dir() + "/toy24.m";
    cfg.sidecar_path = testgrid::case_dir() + "/toy24_dyn.txt";
    cfg.outdir = (tmp.path / "out").string();
    cfg.engine = "both";
    cfg.scenario_count = 12;
    cfg.seed = 4;
    cfg.dt = 0.05;
    cfg.t_end = 20.0;
    cfg.workers = 2;

    const StudyReport report = run_study(cfg);
    REQUIRE(report.static_report);
    REQUIRE(report.dynamic_report);
    CHECK(report.scenarios.size() == 12);
    CHECK(report.static_report->results.size() == 12);

    for (const char* engine : {"static", "dynamic"}) {
        const fs::path dir = fs::path(cfg.outdir) / engine;
        for (const char* f : {"events.log", "report.csv", "scenario_results.csv", "ccdf.csv",
                              "lambda.csv", "distance.csv", "convergence.csv"})
            CHECK(fs::exists(dir / f));
        int records = 0;
        for (const auto& e : fs::directory_iterator(dir / "records")) {
            (void)e;
            ++records;
        }
        CHECK(records == 12);
    }
    CHECK(fs::exists(fs::path(cfg.outdir) / "config.json"));
    CHECK(fs::exists(fs::path(cfg.outdir) / "scenarios.csv"));
    CHECK(report.wall_seconds > 0.0);

    SUBCASE("rebuilding from records reproduces the aggregate metrics") {
        Network net = load_case(cfg.case_path);
        apply_dynamic_sidecar(net, cfg.sidecar_path);
        net = attach_dynamic_defaults(net, cfg.defaults);
        for (const char* engine : {"static", "dynamic"}) {
            const bool ordinal = std::string(engine) == "static";
            const EngineReport& ref =
                ordinal ? *report.static_report : *report.dynamic_report;
            const EngineReport rebuilt = rebuild_report_from_records(
                net, (fs::path(cfg.outdir) / engine).string(), cfg, ordinal);
            CHECK(rebuilt.edns_mw == doctest::Approx(ref.edns_mw));
            CHECK(rebuilt.mean_line_outages == doctest::Approx(ref.mean_line_outages));
            CHECK(rebuilt.lambda == ref.lambda);
            CHECK(rebuilt.distance_hist == ref.distance_hist);
            REQUIRE(rebuilt.results.size() == ref.results.size());
            for (size_t i = 0; i < ref.results.size(); ++i)
                CHECK(rebuilt.results[i].demand_lost_mw ==
                      doctest::Approx(ref.results[i].demand_lost_mw));
        }
    }

    SUBCASE("resume reuses persisted records") {
        StudyConfig again = cfg;
        again.resume = true;
        const fs::path marker = fs::path(cfg.outdir) / "static" / "records" / "scn_000003.txt";
        const std::string before = slurp(marker);
        const StudyReport second = run_study(again);
        CHECK(slurp(marker) == before);
        CHECK(second.static_report->edns_mw == doctest::Approx(report.static_report->edns_mw));
    }

    SUBCASE("comparison pairs the two engines per scenario") {
        const ComparisonBundle b =
            compare_models(*report.static_report, *report.dynamic_report);
        REQUIRE(b.rows.size() == 12);
        double mean = 0.0;
        for (const auto& row : b.rows)
            mean += row.loss_static_mw - row.loss_dynamic_mw;
        mean /= 12.0;
        CHECK(b.mean_loss_delta_mw == doctest::Approx(mean));
    }
}

TEST_CASE("comparison rejects mismatched scenario sets") {
    EngineReport a, b;
    a.results.resize(2);
    b.results.resize(3);
    CHECK_THROWS_AS(compare_models(a, b), ScenarioMismatch);
    b.results.resize(2);
    a.results[0].scenario_id = 0;
    b.results[0].scenario_id = 5;
    CHECK_THROWS_AS(compare_models(a, b), ScenarioMismatch);
}

TEST_CASE("bad study configs fail fast") {
    StudyConfig cfg;
    cfg.case_path = testgrid::case_dir() + "/toy24.m";
    cfg.outdir = "/tmp/never_used";
    cfg.scenario_count = 0;
    CHECK_THROWS_AS(run_study(cfg), EmptyStudy);
    cfg.scenario_count = 5;
    cfg.engine = "quantum";
    CHECK_THROWS_AS(run_study(cfg), Error);
}
