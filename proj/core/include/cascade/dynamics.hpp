#pragma once

#include <map>
#include <memory>
#include <set>
#include <vector>

#include "cascade/events.hpp"
#include "cascade/network.hpp"
#include "cascade/opf.hpp"
#include "cascade/protection.hpp"

namespace cascade {

struct DynConfig {
    double dt = 0.01;    // s
    double t_end = 60.0; // s
    RelaySettings relays;
    bool record_traces = false;

    void check() const {
        if (!(dt > 0.0 && dt <= 1.0)) throw Error("DynConfig: dt must be in (0,1]");
        if (t_end < dt) throw Error("DynConfig: t_end must be >= dt");
    }
};

struct MachineState {
    double delta = 0.0;   // rotor angle, rad
    double omega = 0.0;   // speed deviation, pu
    double p_mech = 0.0;  // pu, system base
    double e_prime = 1.0; // pu
    bool connected = true;
};

struct Traces {
    // Relay measurements sampled at step boundaries: (t, |flow|/rating) per
    // branch, (t, omega) and (t, |delta - delta_coi|) per machine. Enough to
    // replay overload, overfrequency and out-of-step decisions offline.
    std::map<BranchId, std::vector<std::pair<double, double>>> branch_loading;
    std::map<GenId, std::vector<std::pair<double, double>>> machine_omega;
    std::map<GenId, std::vector<std::pair<double, double>>> machine_angle_gap;
};

/// Reference machine: largest inertia_h * mbase among connected in-service
/// machines on the island, ties by lowest generator id. Returns -1 for a
/// dead island.
GenId select_reference(const Network& net, const std::vector<BusId>& island);

/// Time-domain cascade engine: classical 2nd-order machines behind transient
/// reactance, governor droop, frequency-dependent loads, fixed-step RK4 with
/// the linear network re-solved at each stage, relays checked at step
/// boundaries, island management per separation event.
class DynamicEngine {
  public:
    /// `dispatch` must be feasible and balanced on the intact network.
    DynamicEngine(const Network& net, const DispatchResult& dispatch, const DynConfig& cfg);
    ~DynamicEngine();
    DynamicEngine(DynamicEngine&&) noexcept;
    DynamicEngine& operator=(DynamicEngine&&) noexcept;

    /// Executes the initial outages at t = 0 (simultaneously).
    void apply_initial_outages(const std::set<BranchId>& outages);

    /// Advances one dt: integrate all live islands, then evaluate relays at
    /// the step boundary and execute any discrete events.
    void step();

    /// Steps until t_end.
    void run();

    CascadeResult result() const;
    const Traces& traces() const;

    // Inspection (tests).
    double time() const;
    const MachineState& machine_state(GenId id) const;
    double island_coi_omega(GenId member_gen) const;
    std::map<BranchId, double> current_flows() const;
    std::map<GenId, double> current_electrical_power() const;
    int live_island_count() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Convenience wrapper: build engine, apply outages, run to t_end.
CascadeResult run_dynamic_cascade(const Network& net, const DispatchResult& dispatch,
                                  const std::set<BranchId>& initial_outages,
                                  const DynConfig& cfg, Traces* traces_out = nullptr);

} // namespace cascade
