#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cascade/case_io.hpp"
#include "cascade/study.hpp"

namespace fs = std::filesystem;
using namespace cascade;

namespace {

struct CliOverrides {
    std::string config_path;
    std::string case_path, sidecar_path, outdir, engine;
    int scenarios = -1;
    std::uint64_t seed = 0;
    bool seed_set = false;
    double dt = -1.0, t_end = -1.0, voll = -1.0;
    int workers = -1;
    bool resume = false;
};

void add_common_flags(CLI::App* app, CliOverrides& o) {
    app->add_option("--config", o.config_path, "study config JSON");
    app->add_option("--case", o.case_path, "grid case file");
    app->add_option("--sidecar", o.sidecar_path, "dynamic parameter sidecar");
    app->add_option("--outdir", o.outdir, "output directory");
    app->add_option("--engine", o.engine, "static | dynamic | both");
    app->add_option("--scenarios", o.scenarios, "number of N-2 scenarios");
    app->add_option("--seed", o.seed, "sampling seed")->each([&](const std::string&) {
        o.seed_set = true;
    });
    app->add_option("--dt", o.dt, "integration step, s");
    app->add_option("--t-end", o.t_end, "simulation horizon, s");
    app->add_option("--voll", o.voll, "value of lost load");
    app->add_option("--workers", o.workers, "worker threads (0: auto)");
    app->add_flag("--resume", o.resume, "reuse existing scenario records");
}

StudyConfig resolve_config(const CliOverrides& o) {
    StudyConfig cfg;
    if (!o.config_path.empty()) cfg = load_study_config(o.config_path);
    if (!o.case_path.empty()) cfg.case_path = o.case_path;
    if (!o.sidecar_path.empty()) cfg.sidecar_path = o.sidecar_path;
    if (!o.outdir.empty()) cfg.outdir = o.outdir;
    if (!o.engine.empty()) cfg.engine = o.engine;
    if (o.scenarios >= 0) cfg.scenario_count = o.scenarios;
    if (o.seed_set) cfg.seed = o.seed;
    if (o.dt > 0.0) cfg.dt = o.dt;
    if (o.t_end > 0.0) cfg.t_end = o.t_end;
    if (o.voll > 0.0) cfg.voll = o.voll;
    if (o.workers >= 0) cfg.workers = o.workers;
    if (o.resume) cfg.resume = true;
    return cfg;
}

void print_engine_summary(const std::string& name, const EngineReport& rep) {
    std::printf("%s: scenarios=%zu edns=%.3f MW mean_outages=%.3f failed=%d\n", name.c_str(),
                rep.results.size(), rep.edns_mw, rep.mean_line_outages, rep.failed_scenarios);
    for (const auto& [a, v] : rep.var_mw)
        std::printf("  var_%g=%.3f MW cvar_%g=%.3f MW\n", a, v, a, rep.cvar_mw.at(a));
}

Network load_network_for(const StudyConfig& cfg) {
    std::vector<std::string> warnings;
    Network net = load_case(cfg.case_path, {}, &warnings);
    if (!cfg.sidecar_path.empty()) apply_dynamic_sidecar(net, cfg.sidecar_path, &warnings);
    return attach_dynamic_defaults(net, cfg.defaults);
}

int cmd_run(const CliOverrides& o) {
    const StudyConfig cfg = resolve_config(o);
    StudyReport report = run_study(cfg);
    std::printf("study complete in %.2f s, outputs in %s\n", report.wall_seconds,
                cfg.outdir.c_str());
    if (report.static_report) print_engine_summary("static", *report.static_report);
    if (report.dynamic_report) print_engine_summary("dynamic", *report.dynamic_report);
    return 0;
}

int cmd_sweep_dt(const CliOverrides& o, const std::vector<double>& dts) {
    StudyConfig base = resolve_config(o);
    if (base.engine == "both") base.engine = "dynamic";
    const std::string root = base.outdir;
    std::printf("dt_s,edns_mw,mean_line_outages\n");
    for (double dt : dts) {
        StudyConfig cfg = base;
        cfg.dt = dt;
        char sub[48];
        std::snprintf(sub, sizeof(sub), "%s/dt_%g", root.c_str(), dt);
        cfg.outdir = sub;
        StudyReport report = run_study(cfg);
        const EngineReport& rep =
            report.dynamic_report ? *report.dynamic_report : *report.static_report;
        std::printf("%g,%.6f,%.6f\n", dt, rep.edns_mw, rep.mean_line_outages);
    }
    return 0;
}

int cmd_compare(const CliOverrides& o) {
    CliOverrides eff = o;
    if (eff.config_path.empty() && !eff.outdir.empty() &&
        fs::exists(eff.outdir + "/config.json"))
        eff.config_path = eff.outdir + "/config.json";
    const StudyConfig cfg = resolve_config(eff);
    const Network net = load_network_for(cfg);
    EngineReport rs = rebuild_report_from_records(net, cfg.outdir + "/static", cfg, true);
    EngineReport rd = rebuild_report_from_records(net, cfg.outdir + "/dynamic", cfg, false);
    ComparisonBundle b = compare_models(rs, rd);

    std::ofstream out(cfg.outdir + "/compare.csv");
    out << "scenario_id,loss_static_mw,loss_dynamic_mw,outages_static,outages_dynamic\n";
    char buf[128];
    for (const ComparisonRow& row : b.rows) {
        std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f,%d,%d", row.scenario_id,
                      row.loss_static_mw, row.loss_dynamic_mw, row.outages_static,
                      row.outages_dynamic);
        out << buf << "\n";
    }
    std::printf("scenarios=%zu mean_loss_delta=%.3f MW mean_outage_delta=%.3f\n", b.rows.size(),
                b.mean_loss_delta_mw, b.mean_outage_delta);
    std::printf("wrote %s/compare.csv\n", cfg.outdir.c_str());
    return 0;
}

int cmd_metrics(const CliOverrides& o) {
    CliOverrides eff = o;
    if (eff.config_path.empty() && !eff.outdir.empty() &&
        fs::exists(eff.outdir + "/config.json"))
        eff.config_path = eff.outdir + "/config.json";
    const StudyConfig cfg = resolve_config(eff);
    const Network net = load_network_for(cfg);
    const std::string engine = cfg.engine == "both" ? "dynamic" : cfg.engine;
    const std::string dir = cfg.outdir + "/" + engine;
    EngineReport rep = rebuild_report_from_records(net, dir, cfg, engine == "static");
    write_engine_outputs(dir, rep, cfg);
    print_engine_summary(engine, rep);
    return 0;
}

int cmd_sample(const CliOverrides& o) {
    const StudyConfig cfg = resolve_config(o);
    std::vector<std::string> warnings;
    const Network net = load_case(cfg.case_path, {}, &warnings);
    const auto scenarios = sample_scenarios(net, cfg.scenario_count, cfg.seed, &warnings);
    for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    std::printf("scenario_id,branch_a,branch_b\n");
    for (const ScenarioSpec& s : scenarios)
        std::printf("%d,%d,%d\n", s.scenario_id, s.pair[0], s.pair[1]);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cascading failure simulation for transmission grids"};
    app.require_subcommand(1);

    CliOverrides o;
    std::vector<double> dts;

    CLI::App* run = app.add_subcommand("run", "run an N-2 cascade study");
    add_common_flags(run, o);
    CLI::App* sweep = app.add_subcommand("sweep-dt", "repeat a study across step sizes");
    add_common_flags(sweep, o);
    sweep->add_option("--dts", dts, "step sizes to sweep")->required();
    CLI::App* compare = app.add_subcommand("compare", "compare static vs dynamic records");
    add_common_flags(compare, o);
    CLI::App* metrics = app.add_subcommand("metrics", "rebuild metrics from scenario records");
    add_common_flags(metrics, o);
    CLI::App* sample = app.add_subcommand("sample", "print the sampled scenario list");
    add_common_flags(sample, o);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(o);
        if (sweep->parsed()) return cmd_sweep_dt(o, dts);
        if (compare->parsed()) return cmd_compare(o);
        if (metrics->parsed()) return cmd_metrics(o);
        if (sample->parsed()) return cmd_sample(o);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
