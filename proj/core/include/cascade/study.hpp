#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cascade/dynamics.hpp"
#include "cascade/events.hpp"
#include "cascade/metrics.hpp"
#include "cascade/network.hpp"
#include "cascade/protection.hpp"

namespace cascade {

struct ScenarioSpec {
    int scenario_id = 0;
    std::array<BranchId, 2> pair{0, 0}; // unordered; stored ascending
};

struct StudyConfig {
    std::string case_path;
    std::string sidecar_path; // optional
    std::string outdir;
    std::string engine = "dynamic"; // static | dynamic | both
    int scenario_count = 100;
    std::uint64_t seed = 1;
    double dt = 0.1;
    double t_end = 60.0;
    double voll = 1e4;
    std::vector<double> alphas{0.95};
    int workers = 0; // 0: CASCADE_WORKERS env var, then hardware concurrency
    int convergence_curves = 5;
    bool resume = false;
    RelaySettings relays;
    DynDefaults defaults;
};

StudyConfig load_study_config(const std::string& json_path);
std::string study_config_to_json(const StudyConfig& cfg);

/// `count` distinct unordered in-service branch pairs, uniform without
/// replacement, reproducible from seed (own bounded-rand, so identical on
/// every platform). count >= C(n,2) yields the full enumeration with a
/// warning.
std::vector<ScenarioSpec> sample_scenarios(const Network& net, int count, std::uint64_t seed,
                                           std::vector<std::string>* warnings = nullptr);

/// Aggregated metrics for one engine over a scenario set.
struct EngineReport {
    std::vector<CascadeResult> results; // ascending scenario_id
    double total_demand_mw = 0.0;
    double edns_mw = 0.0;
    std::map<double, double> var_mw;  // alpha -> value
    std::map<double, double> cvar_mw;
    double mean_line_outages = 0.0;
    std::vector<double> lambda;
    std::map<int, int> distance_hist;
    std::vector<std::pair<double, double>> ccdf_points;
    std::vector<std::vector<double>> convergence; // running-mean curves
    int failed_scenarios = 0;
};

struct StudyReport {
    StudyConfig config;
    std::vector<ScenarioSpec> scenarios;
    std::optional<EngineReport> static_report;
    std::optional<EngineReport> dynamic_report;
    double wall_seconds = 0.0; // not persisted in deterministic outputs
};

/// Runs the configured study: scenario-parallel, per-scenario record files
/// persisted incrementally under outdir/<engine>/records/, deterministic
/// aggregate outputs (events.log, report.csv, point files) independent of
/// worker count. Per-scenario failures are logged and counted, never fatal.
/// Throws EmptyStudy when no scenarios result.
StudyReport run_study(const StudyConfig& cfg);

/// R running-mean curves of EDNS vs scenario count over random orderings.
std::vector<std::vector<double>> convergence_curve(const std::vector<double>& losses,
                                                   int permutations, std::uint64_t seed);

struct ComparisonRow {
    int scenario_id = 0;
    double loss_static_mw = 0.0;
    double loss_dynamic_mw = 0.0;
    int outages_static = 0;
    int outages_dynamic = 0;
};

struct ComparisonBundle {
    std::vector<ComparisonRow> rows;
    double mean_loss_delta_mw = 0.0;    // static - dynamic
    double mean_outage_delta = 0.0;     // static - dynamic
    std::vector<std::pair<double, double>> ccdf_loss_static, ccdf_loss_dynamic;
    std::vector<std::pair<double, double>> ccdf_outages_static, ccdf_outages_dynamic;
    std::vector<double> lambda_static, lambda_dynamic;
    std::map<int, int> distance_static, distance_dynamic;
};

/// Pairs two engine reports built from the identical scenario list.
/// Throws ScenarioMismatch otherwise.
ComparisonBundle compare_models(const EngineReport& static_report,
                                const EngineReport& dynamic_report);

/// Re-reads persisted per-scenario records from a study output directory
/// (one engine subdirectory) and rebuilds the EngineReport; used by the
/// `metrics` subcommand and the replay-identity contract.
EngineReport rebuild_report_from_records(const Network& net, const std::string& engine_dir,
                                         const StudyConfig& cfg, bool ordinal);

/// Deterministic aggregate files for one engine under `dir`.
void write_engine_outputs(const std::string& dir, const EngineReport& report,
                          const StudyConfig& cfg);

int default_worker_count(); // CASCADE_WORKERS env var, else hardware

} // namespace cascade
