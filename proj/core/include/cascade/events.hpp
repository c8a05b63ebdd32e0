#pragma once

#include <string>
#include <vector>

#include "cascade/errors.hpp"

namespace cascade {

enum class EventKind {
    branch_trip,
    gen_trip_ofgt,
    gen_trip_oos,
    load_shed_ufls,
    island_dead,
    separation,
};

const char* to_string(EventKind kind);
EventKind event_kind_from_string(const std::string& s);

struct EventRecord {
    double time = 0.0; // seconds (dynamic) or ordinal iteration (static)
    EventKind kind = EventKind::branch_trip;
    int element = 0;      // branch/gen/load/island id
    double detail_mw = 0.0;

    // Simultaneous events execute and sort as branch trips, then generator
    // trips, then load sheds; within a class ascending element id.
    friend bool operator<(const EventRecord& a, const EventRecord& b) {
        if (a.time != b.time) return a.time < b.time;
        if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
        return a.element < b.element;
    }
};

struct CascadeResult {
    int scenario_id = 0;
    std::vector<EventRecord> events; // sorted
    double demand_lost_mw = 0.0;
    std::vector<int> outages_per_iteration; // branch outages grouped into iterations
    bool diverged = false;
    bool blackout = false; // loss equals total case demand
};

/// One event per line, stable field order, fixed precision:
///   scenario_id=<i> time_s=<t> kind=<k> element=<e> detail_mw=<d>
std::string format_event_line(int scenario_id, const EventRecord& ev);
EventRecord parse_event_line(const std::string& line, int* scenario_id = nullptr);

/// Scenario footer line:
///   result scenario_id=<i> loss_mw=<l> blackout=<0|1> diverged=<0|1>
std::string format_result_line(const CascadeResult& r);
void parse_result_line(const std::string& line, CascadeResult& r);

} // namespace cascade
