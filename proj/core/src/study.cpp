#include "cascade/study.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cascade/case_io.hpp"
#include "cascade/opf.hpp"
#include "cascade/qss.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace cascade {

namespace {

std::uint64_t bounded_rand(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
        r = rng();
    } while (r >= limit);
    return r % bound;
}

std::array<BranchId, 2> unrank_pair(const std::vector<BranchId>& ids, std::uint64_t k) {
    const std::uint64_t n = ids.size();
    for (std::uint64_t a = 0; a + 1 < n; ++a) {
        const std::uint64_t row = n - 1 - a;
        if (k < row) return {ids[a], ids[a + 1 + k]};
        k -= row;
    }
    throw Error("unrank_pair: index out of range");
}

std::string record_path(const std::string& dir, int scenario_id) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "scn_%06d.txt", scenario_id);
    return dir + "/" + buf;
}

void write_record(const std::string& path, const CascadeResult& r) {
    std::ofstream out(path);
    for (const EventRecord& ev : r.events) out << format_event_line(r.scenario_id, ev) << "\n";
    out << format_result_line(r) << "\n";
}

CascadeResult read_record(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open record file: " + path);
    CascadeResult r;
    std::string line;
    bool have_result = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("result ", 0) == 0) {
            parse_result_line(line, r);
            have_result = true;
        } else {
            int sid = 0;
            r.events.push_back(parse_event_line(line, &sid));
            r.scenario_id = sid;
        }
    }
    if (!have_result) throw Error("record file missing result line: " + path);
    return r;
}

EngineReport build_report(const Network& intact, std::vector<CascadeResult> results,
                          const StudyConfig& cfg, bool ordinal) {
    std::sort(results.begin(), results.end(),
              [](const CascadeResult& a, const CascadeResult& b) {
                  return a.scenario_id < b.scenario_id;
              });
    EngineReport rep;
    rep.total_demand_mw = intact.mw(intact.total_demand_pu());

    std::vector<double> losses;
    std::vector<Cascade> all_cascades;
    double outage_sum = 0.0;
    for (const CascadeResult& r : results) {
        losses.push_back(r.demand_lost_mw);
        int n_outages = 0;
        for (const EventRecord& ev : r.events)
            if (ev.kind == EventKind::branch_trip) ++n_outages;
        outage_sum += n_outages;
        if (r.diverged) ++rep.failed_scenarios;
        auto cascades = group_into_iterations(r.events, 60.0, 3600.0, ordinal);
        all_cascades.insert(all_cascades.end(), cascades.begin(), cascades.end());
    }
    rep.edns_mw = edns_uniform(losses);
    for (double a : cfg.alphas) {
        rep.var_mw[a] = var_alpha(losses, a);
        rep.cvar_mw[a] = cvar_alpha(losses, a);
    }
    rep.mean_line_outages = outage_sum / static_cast<double>(results.size());
    rep.lambda = lambda_series(all_cascades);
    rep.distance_hist = distance_histogram(intact, all_cascades);
    rep.ccdf_points = ccdf(losses);
    rep.convergence = convergence_curve(losses, cfg.convergence_curves, cfg.seed);
    rep.results = std::move(results);
    return rep;
}

void write_csv_points(const std::string& path, const std::string& header,
                      const std::vector<std::pair<double, double>>& pts) {
    std::ofstream out(path);
    out << header << "\n";
    char buf[80];
    for (const auto& [x, y] : pts) {
        std::snprintf(buf, sizeof(buf), "%.6f,%.9f", x, y);
        out << buf << "\n";
    }
}

} // namespace

int default_worker_count() {
    if (const char* env = std::getenv("CASCADE_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

std::vector<ScenarioSpec> sample_scenarios(const Network& net, int count, std::uint64_t seed,
                                           std::vector<std::string>* warnings) {
    if (count < 1) throw EmptyStudy("scenario count must be >= 1");
    std::vector<BranchId> ids;
    for (const Branch& br : net.branches)
        if (br.in_service) ids.push_back(br.id);
    std::sort(ids.begin(), ids.end());
    const std::uint64_t n = ids.size();
    if (n < 2) throw EmptyStudy("fewer than two in-service branches");
    const std::uint64_t total = n * (n - 1) / 2;

    std::vector<std::uint64_t> chosen;
    if (static_cast<std::uint64_t>(count) >= total) {
        if (static_cast<std::uint64_t>(count) > total && warnings)
            warnings->push_back("scenario count " + std::to_string(count) +
                                " exceeds C(n,2)=" + std::to_string(total) +
                                ", clamped to full enumeration");
        chosen.resize(total);
        for (std::uint64_t k = 0; k < total; ++k) chosen[k] = k;
    } else {
        // Floyd's algorithm: uniform distinct sample of pair indices.
        std::mt19937_64 rng(seed);
        std::set<std::uint64_t> picked;
        for (std::uint64_t j = total - static_cast<std::uint64_t>(count); j < total; ++j) {
            const std::uint64_t t = bounded_rand(rng, j + 1);
            if (!picked.insert(t).second) picked.insert(j);
        }
        chosen.assign(picked.begin(), picked.end());
    }

    std::vector<ScenarioSpec> out;
    out.reserve(chosen.size());
    for (size_t i = 0; i < chosen.size(); ++i) {
        ScenarioSpec s;
        s.scenario_id = static_cast<int>(i);
        s.pair = unrank_pair(ids, chosen[i]);
        out.push_back(s);
    }
    return out;
}

std::vector<std::vector<double>> convergence_curve(const std::vector<double>& losses,
                                                   int permutations, std::uint64_t seed) {
    if (losses.size() < 2) throw Error("convergence_curve: need >= 2 outcomes");
    std::vector<std::vector<double>> curves;
    for (int r = 0; r < permutations; ++r) {
        std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * (r + 1)));
        std::vector<size_t> order(losses.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (size_t i = order.size() - 1; i > 0; --i)
            std::swap(order[i], order[bounded_rand(rng, i + 1)]);
        std::vector<double> curve(losses.size());
        double running = 0.0;
        for (size_t k = 0; k < order.size(); ++k) {
            running += losses[order[k]];
            curve[k] = running / static_cast<double>(k + 1);
        }
        curves.push_back(std::move(curve));
    }
    return curves;
}

StudyConfig load_study_config(const std::string& json_path) {
    std::ifstream in(json_path);
    if (!in) throw Error("cannot open config: " + json_path);
    json j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    StudyConfig cfg;
    cfg.case_path = j.value("case", cfg.case_path);
    cfg.sidecar_path = j.value("sidecar", cfg.sidecar_path);
    cfg.outdir = j.value("outdir", cfg.outdir);
    cfg.engine = j.value("engine", cfg.engine);
    cfg.scenario_count = j.value("scenarios", cfg.scenario_count);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.dt = j.value("dt", cfg.dt);
    cfg.t_end = j.value("t_end", cfg.t_end);
    cfg.voll = j.value("voll", cfg.voll);
    if (j.contains("alphas")) cfg.alphas = j["alphas"].get<std::vector<double>>();
    cfg.workers = j.value("workers", cfg.workers);
    cfg.convergence_curves = j.value("convergence_curves", cfg.convergence_curves);
    cfg.resume = j.value("resume", cfg.resume);
    if (j.contains("relays")) {
        const json& r = j["relays"];
        cfg.relays.overload.threshold_k = r.value("overload_k", cfg.relays.overload.threshold_k);
        if (r.contains("ufls")) {
            cfg.relays.ufls.stages.clear();
            for (const json& s : r["ufls"])
                cfg.relays.ufls.stages.push_back({s.at("threshold").get<double>(),
                                                  s.at("fraction").get<double>(),
                                                  s.at("delay").get<double>()});
        }
        if (r.contains("ofgt")) {
            cfg.relays.ofgt.freq_threshold =
                r["ofgt"].value("threshold", cfg.relays.ofgt.freq_threshold);
            cfg.relays.ofgt.delay = r["ofgt"].value("delay", cfg.relays.ofgt.delay);
        }
        if (r.contains("oos"))
            cfg.relays.oos.angle_limit = r["oos"].value("angle_limit", cfg.relays.oos.angle_limit);
    }
    if (j.contains("defaults")) {
        const json& d = j["defaults"];
        cfg.defaults.inertia_h = d.value("inertia_h", cfg.defaults.inertia_h);
        cfg.defaults.damping_d = d.value("damping_d", cfg.defaults.damping_d);
        cfg.defaults.droop_r = d.value("droop_r", cfg.defaults.droop_r);
        cfg.defaults.gov_tc = d.value("gov_tc", cfg.defaults.gov_tc);
        cfg.defaults.xd_prime = d.value("xd_prime", cfg.defaults.xd_prime);
        cfg.defaults.load_kf = d.value("load_kf", cfg.defaults.load_kf);
    }
    return cfg;
}

std::string study_config_to_json(const StudyConfig& cfg) {
    json j;
    j["case"] = cfg.case_path;
    j["sidecar"] = cfg.sidecar_path;
    j["outdir"] = cfg.outdir;
    j["engine"] = cfg.engine;
    j["scenarios"] = cfg.scenario_count;
    j["seed"] = cfg.seed;
    j["dt"] = cfg.dt;
    j["t_end"] = cfg.t_end;
    j["voll"] = cfg.voll;
    j["alphas"] = cfg.alphas;
    j["workers"] = cfg.workers;
    j["convergence_curves"] = cfg.convergence_curves;
    j["resume"] = cfg.resume;
    j["relays"]["overload_k"] = cfg.relays.overload.threshold_k;
    for (const UflsStage& s : cfg.relays.ufls.stages)
        j["relays"]["ufls"].push_back(
            {{"threshold", s.freq_threshold}, {"fraction", s.shed_fraction}, {"delay", s.delay}});
    j["relays"]["ofgt"] = {{"threshold", cfg.relays.ofgt.freq_threshold},
                           {"delay", cfg.relays.ofgt.delay}};
    j["relays"]["oos"] = {{"angle_limit", cfg.relays.oos.angle_limit}};
    j["defaults"] = {{"inertia_h", cfg.defaults.inertia_h}, {"damping_d", cfg.defaults.damping_d},
                     {"droop_r", cfg.defaults.droop_r},     {"gov_tc", cfg.defaults.gov_tc},
                     {"xd_prime", cfg.defaults.xd_prime},   {"load_kf", cfg.defaults.load_kf}};
    return j.dump(2) + "\n";
}

void write_engine_outputs(const std::string& dir, const EngineReport& rep,
                          const StudyConfig& cfg) {
    {
        std::ofstream out(dir + "/events.log");
        for (const CascadeResult& r : rep.results)
            for (const EventRecord& ev : r.events) out << format_event_line(r.scenario_id, ev) << "\n";
    }
    {
        std::ofstream out(dir + "/report.csv");
        char buf[96];
        out << "metric,value\n";
        auto row = [&](const std::string& name, double v) {
            std::snprintf(buf, sizeof(buf), "%s,%.6f", name.c_str(), v);
            out << buf << "\n";
        };
        row("scenario_count", static_cast<double>(rep.results.size()));
        row("total_demand_mw", rep.total_demand_mw);
        row("edns_mw", rep.edns_mw);
        for (const auto& [a, v] : rep.var_mw) {
            std::snprintf(buf, sizeof(buf), "var_%g_mw,%.6f", a, v);
            out << buf << "\n";
        }
        for (const auto& [a, v] : rep.cvar_mw) {
            std::snprintf(buf, sizeof(buf), "cvar_%g_mw,%.6f", a, v);
            out << buf << "\n";
        }
        row("mean_line_outages", rep.mean_line_outages);
        int blackouts = 0;
        for (const CascadeResult& r : rep.results)
            if (r.blackout) ++blackouts;
        row("blackout_count", static_cast<double>(blackouts));
        row("failed_scenarios", static_cast<double>(rep.failed_scenarios));
    }
    {
        std::ofstream out(dir + "/scenario_results.csv");
        out << "scenario_id,loss_mw,line_outages,blackout,diverged\n";
        char buf[96];
        for (const CascadeResult& r : rep.results) {
            int n_outages = 0;
            for (const EventRecord& ev : r.events)
                if (ev.kind == EventKind::branch_trip) ++n_outages;
            std::snprintf(buf, sizeof(buf), "%d,%.6f,%d,%d,%d", r.scenario_id, r.demand_lost_mw,
                          n_outages, r.blackout ? 1 : 0, r.diverged ? 1 : 0);
            out << buf << "\n";
        }
    }
    write_csv_points(dir + "/ccdf.csv", "loss_mw,prob_geq", rep.ccdf_points);
    {
        std::ofstream out(dir + "/lambda.csv");
        out << "k,lambda_k\n";
        char buf[64];
        for (size_t k = 0; k < rep.lambda.size(); ++k) {
            std::snprintf(buf, sizeof(buf), "%zu,%.9f", k + 1, rep.lambda[k]);
            out << buf << "\n";
        }
    }
    {
        std::ofstream out(dir + "/distance.csv");
        out << "d_bus,count\n";
        for (const auto& [d, c] : rep.distance_hist) out << d << "," << c << "\n";
    }
    {
        std::ofstream out(dir + "/convergence.csv");
        out << "k";
        for (size_t r = 0; r < rep.convergence.size(); ++r) out << ",curve_" << r;
        out << "\n";
        char buf[48];
        if (!rep.convergence.empty()) {
            for (size_t k = 0; k < rep.convergence.front().size(); ++k) {
                out << (k + 1);
                for (const auto& curve : rep.convergence) {
                    std::snprintf(buf, sizeof(buf), ",%.6f", curve[k]);
                    out << buf;
                }
                out << "\n";
            }
        }
    }
    (void)cfg;
}

namespace {

std::vector<CascadeResult> run_engine_scenarios(
    const Network& net, const std::vector<ScenarioSpec>& scenarios, const StudyConfig& cfg,
    bool dynamic, const DispatchResult& base_dispatch, const std::string& records_dir,
    std::vector<std::string>& failures) {
    const size_t n = scenarios.size();
    std::vector<CascadeResult> results(n);
    std::vector<std::string> failure_by_scn(n);
    std::atomic<size_t> next{0};
    const double total_mw = net.mw(net.total_demand_pu());

    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= n) break;
            const ScenarioSpec& s = scenarios[i];
            const std::string path = record_path(records_dir, s.scenario_id);
            if (cfg.resume && fs::exists(path)) {
                try {
                    results[i] = read_record(path);
                    continue;
                } catch (const Error&) {
                    // fall through and recompute
                }
            }
            CascadeResult r;
            try {
                const std::set<BranchId> outages{s.pair[0], s.pair[1]};
                if (dynamic) {
                    DynConfig dc;
                    dc.dt = cfg.dt;
                    dc.t_end = cfg.t_end;
                    dc.relays = cfg.relays;
                    r = run_dynamic_cascade(net, base_dispatch, outages, dc);
                } else {
                    QssOptions qopts;
                    qopts.voll = cfg.voll;
                    r = run_static_cascade(net, outages, qopts);
                }
            } catch (const std::exception& e) {
                // Conservative accounting: a failed scenario counts as a
                // full blackout and is reported, never fatal to the study.
                r = CascadeResult{};
                r.demand_lost_mw = total_mw;
                r.blackout = true;
                r.diverged = true;
                failure_by_scn[i] = e.what();
            }
            r.scenario_id = s.scenario_id;
            write_record(path, r);
            results[i] = r;
        }
    };

    int n_workers = cfg.workers > 0 ? cfg.workers : default_worker_count();
    n_workers = std::max(1, std::min<int>(n_workers, static_cast<int>(n)));
    std::vector<std::thread> pool;
    for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    for (size_t i = 0; i < n; ++i)
        if (!failure_by_scn[i].empty())
            failures.push_back("scenario " + std::to_string(scenarios[i].scenario_id) + ": " +
                               failure_by_scn[i]);
    return results;
}

} // namespace

StudyReport run_study(const StudyConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    if (cfg.scenario_count < 1) throw EmptyStudy("scenario count must be >= 1");
    if (cfg.engine != "static" && cfg.engine != "dynamic" && cfg.engine != "both")
        throw Error("engine must be static, dynamic or both");
    if (cfg.outdir.empty()) throw Error("outdir must be set");

    std::vector<std::string> warnings;
    Network net = load_case(cfg.case_path, {}, &warnings);
    if (!cfg.sidecar_path.empty()) apply_dynamic_sidecar(net, cfg.sidecar_path, &warnings);
    net = attach_dynamic_defaults(net, cfg.defaults);

    StudyReport report;
    report.config = cfg;
    report.scenarios = sample_scenarios(net, cfg.scenario_count, cfg.seed, &warnings);
    if (report.scenarios.empty()) throw EmptyStudy("no scenarios sampled");

    fs::create_directories(cfg.outdir);
    {
        std::ofstream out(cfg.outdir + "/config.json");
        out << study_config_to_json(cfg);
    }
    {
        std::ofstream out(cfg.outdir + "/scenarios.csv");
        out << "scenario_id,branch_a,branch_b\n";
        for (const ScenarioSpec& s : report.scenarios)
            out << s.scenario_id << "," << s.pair[0] << "," << s.pair[1] << "\n";
    }

    const bool want_static = cfg.engine == "static" || cfg.engine == "both";
    const bool want_dynamic = cfg.engine == "dynamic" || cfg.engine == "both";

    DispatchResult base_dispatch;
    if (want_dynamic) {
        OpfOptions oopts;
        oopts.voll = cfg.voll;
        base_dispatch = dc_opf_all(net, oopts);
    }

    std::vector<std::string> failures;
    if (want_static) {
        const std::string dir = cfg.outdir + "/static";
        fs::create_directories(dir + "/records");
        auto results = run_engine_scenarios(net, report.scenarios, cfg, /*dynamic=*/false,
                                            base_dispatch, dir + "/records", failures);
        report.static_report = build_report(net, std::move(results), cfg, /*ordinal=*/true);
        write_engine_outputs(dir, *report.static_report, cfg);
    }
    if (want_dynamic) {
        const std::string dir = cfg.outdir + "/dynamic";
        fs::create_directories(dir + "/records");
        auto results = run_engine_scenarios(net, report.scenarios, cfg, /*dynamic=*/true,
                                            base_dispatch, dir + "/records", failures);
        report.dynamic_report = build_report(net, std::move(results), cfg, /*ordinal=*/false);
        write_engine_outputs(dir, *report.dynamic_report, cfg);
    }

    if (!warnings.empty() || !failures.empty()) {
        std::ofstream out(cfg.outdir + "/warnings.log");
        for (const auto& w : warnings) out << "warning: " << w << "\n";
        for (const auto& f : failures) out << "scenario-failure: " << f << "\n";
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    {
        // Timing lives outside the deterministic report files.
        std::ofstream out(cfg.outdir + "/timing.txt");
        out << "wall_seconds=" << report.wall_seconds << "\n";
    }
    return report;
}

ComparisonBundle compare_models(const EngineReport& static_report,
                                const EngineReport& dynamic_report) {
    if (static_report.results.size() != dynamic_report.results.size())
        throw ScenarioMismatch("different scenario counts");
    ComparisonBundle b;
    std::vector<double> loss_s, loss_d, out_s, out_d;
    for (size_t i = 0; i < static_report.results.size(); ++i) {
        const CascadeResult& rs = static_report.results[i];
        const CascadeResult& rd = dynamic_report.results[i];
        if (rs.scenario_id != rd.scenario_id)
            throw ScenarioMismatch("scenario id mismatch at row " + std::to_string(i));
        ComparisonRow row;
        row.scenario_id = rs.scenario_id;
        row.loss_static_mw = rs.demand_lost_mw;
        row.loss_dynamic_mw = rd.demand_lost_mw;
        for (const EventRecord& ev : rs.events)
            if (ev.kind == EventKind::branch_trip) ++row.outages_static;
        for (const EventRecord& ev : rd.events)
            if (ev.kind == EventKind::branch_trip) ++row.outages_dynamic;
        b.rows.push_back(row);
        loss_s.push_back(row.loss_static_mw);
        loss_d.push_back(row.loss_dynamic_mw);
        out_s.push_back(row.outages_static);
        out_d.push_back(row.outages_dynamic);
        b.mean_loss_delta_mw += row.loss_static_mw - row.loss_dynamic_mw;
        b.mean_outage_delta += row.outages_static - row.outages_dynamic;
    }
    const double n = static_cast<double>(b.rows.size());
    b.mean_loss_delta_mw /= n;
    b.mean_outage_delta /= n;
    b.ccdf_loss_static = ccdf(loss_s);
    b.ccdf_loss_dynamic = ccdf(loss_d);
    b.ccdf_outages_static = ccdf(out_s);
    b.ccdf_outages_dynamic = ccdf(out_d);
    b.lambda_static = static_report.lambda;
    b.lambda_dynamic = dynamic_report.lambda;
    b.distance_static = static_report.distance_hist;
    b.distance_dynamic = dynamic_report.distance_hist;
    return b;
}

EngineReport rebuild_report_from_records(const Network& net, const std::string& engine_dir,
                                         const StudyConfig& cfg, bool ordinal) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(engine_dir + "/records"))
        if (entry.path().extension() == ".txt") files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw EmptyStudy("no scenario records in " + engine_dir);
    std::vector<CascadeResult> results;
    for (const auto& f : files) results.push_back(read_record(f));
    return build_report(net, std::move(results), cfg, ordinal);
}

} // namespace cascade
