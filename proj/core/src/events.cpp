#include "cascade/events.hpp"

#include <cstdio>
#include <cstring>
#include <map>
#include <sstream>

namespace cascade {

const char* to_string(EventKind kind) {
    switch (kind) {
    case EventKind::branch_trip: return "branch_trip";
    case EventKind::gen_trip_ofgt: return "gen_trip_ofgt";
    case EventKind::gen_trip_oos: return "gen_trip_oos";
    case EventKind::load_shed_ufls: return "load_shed_ufls";
    case EventKind::island_dead: return "island_dead";
    case EventKind::separation: return "separation";
    }
    return "unknown";
}

EventKind event_kind_from_string(const std::string& s) {
    static const std::map<std::string, EventKind> table = {
        {"branch_trip", EventKind::branch_trip},
        {"gen_trip_ofgt", EventKind::gen_trip_ofgt},
        {"gen_trip_oos", EventKind::gen_trip_oos},
        {"load_shed_ufls", EventKind::load_shed_ufls},
        {"island_dead", EventKind::island_dead},
        {"separation", EventKind::separation},
    };
    auto it = table.find(s);
    if (it == table.end()) throw Error("unknown event kind: " + s);
    return it->second;
}

std::string format_event_line(int scenario_id, const EventRecord& ev) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "scenario_id=%d time_s=%.6f kind=%s element=%d detail_mw=%.6f",
                  scenario_id, ev.time, to_string(ev.kind), ev.element, ev.detail_mw);
    return buf;
}

namespace {

std::map<std::string, std::string> parse_kv(const std::string& line) {
    std::map<std::string, std::string> kv;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) {
        auto eq = tok.find('=');
        if (eq != std::string::npos) kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return kv;
}

} // namespace

EventRecord parse_event_line(const std::string& line, int* scenario_id) {
    auto kv = parse_kv(line);
    EventRecord ev;
    try {
        if (scenario_id) *scenario_id = std::stoi(kv.at("scenario_id"));
        ev.time = std::stod(kv.at("time_s"));
        ev.kind = event_kind_from_string(kv.at("kind"));
        ev.element = std::stoi(kv.at("element"));
        ev.detail_mw = std::stod(kv.at("detail_mw"));
    } catch (const std::out_of_range&) {
        throw Error("malformed event line: " + line);
    }
    return ev;
}

std::string format_result_line(const CascadeResult& r) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "result scenario_id=%d loss_mw=%.6f blackout=%d diverged=%d",
                  r.scenario_id, r.demand_lost_mw, r.blackout ? 1 : 0, r.diverged ? 1 : 0);
    return buf;
}

void parse_result_line(const std::string& line, CascadeResult& r) {
    auto kv = parse_kv(line);
    try {
        r.scenario_id = std::stoi(kv.at("scenario_id"));
        r.demand_lost_mw = std::stod(kv.at("loss_mw"));
        r.blackout = kv.at("blackout") == "1";
        r.diverged = kv.at("diverged") == "1";
    } catch (const std::out_of_range&) {
        throw Error("malformed result line: " + line);
    }
}

} // namespace cascade
