#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cascade/errors.hpp"

namespace cascade {

using BusId = int;
using BranchId = int;
using GenId = int;
using LoadId = int;

struct Bus {
    BusId id = 0;
    double base_kv = 0.0;
    int area = 1;
};

struct Branch {
    BranchId id = 0;
    BusId from_bus = 0;
    BusId to_bus = 0;
    double reactance_x = 0.0; // pu on system base
    double rating = 0.0;      // pu MW flow limit
    bool in_service = true;
    bool rating_is_sentinel = false; // source gave 0 ("unlimited")
};

struct Generator {
    GenId id = 0;
    BusId bus = 0;
    double p_set = 0.0; // pu, system base
    double p_min = 0.0;
    double p_max = 0.0;
    double mbase = 100.0;      // MVA machine base
    double cost_linear = 1.0;  // currency / MWh
    bool in_service = true;

    // Dynamic data; unset until attach_dynamic_defaults.
    std::optional<double> inertia_h; // s, machine base
    std::optional<double> damping_d; // pu, machine base
    std::optional<double> droop_r;   // pu, machine base
    std::optional<double> gov_tc;    // s
    std::optional<double> xd_prime;  // pu, machine base
};

struct Load {
    LoadId id = 0;
    BusId bus = 0;
    double p_demand = 0.0; // pu, system base (nominal demand)
    std::optional<double> freq_sensitivity_kf;
    double served_fraction = 1.0;
};

/// Static grid model in per-unit on base_mva. Immutable after validate();
/// scenario engines work on value copies.
class Network {
  public:
    double base_mva = 100.0;
    double nominal_freq = 60.0;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Generator> generators;
    std::vector<Load> loads;

    /// Checks all structural invariants and builds the id lookup tables.
    /// Throws MalformedCase on any violation.
    void validate();

    int bus_index(BusId id) const;
    bool has_bus(BusId id) const { return bus_pos_.count(id) > 0; }
    const Branch& branch(BranchId id) const;
    Branch& branch(BranchId id);
    const Generator& generator(GenId id) const;
    Generator& generator(GenId id);
    const Load& load(LoadId id) const;
    Load& load(LoadId id);

    double total_demand_pu() const;        // nominal demand
    double total_served_demand_pu() const; // demand * served_fraction

    double mw(double pu) const { return pu * base_mva; }
    double pu(double mw) const { return mw / base_mva; }

  private:
    std::unordered_map<BusId, int> bus_pos_;
    std::unordered_map<BranchId, int> branch_pos_;
    std::unordered_map<GenId, int> gen_pos_;
    std::unordered_map<LoadId, int> load_pos_;
};

/// Configurable dynamic-parameter defaults applied where the case and
/// sidecar give no value.
struct DynDefaults {
    double inertia_h = 4.0;
    double damping_d = 1.0;
    double droop_r = 0.05;
    double gov_tc = 0.5;
    double xd_prime = 0.2;
    double load_kf = 1.0;
};

/// Fills every unset dynamic parameter with the given defaults; values
/// already present (case, sidecar) win. Idempotent. Throws InvalidDroop /
/// InvalidInertia on nonpositive supplied values.
Network attach_dynamic_defaults(Network net, const DynDefaults& defaults = {});

} // namespace cascade
