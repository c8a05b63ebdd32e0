#pragma once

#include <map>
#include <vector>

#include "cascade/network.hpp"

namespace cascade {

struct OpfOptions {
    double voll = 1e4;              // currency/MWh; floored at 100x max gen cost
    bool enforce_flow_limits = true;
};

struct DispatchResult {
    std::map<GenId, double> gen_setpoints; // pu
    std::map<LoadId, double> shed_per_load; // pu, relative to served demand
    double objective_value = 0.0;           // currency (powers in MW)
    bool feasible = false;
};

/// DC optimal power flow with load shedding over one island: minimizes
/// sum(cost * p_g) + VOLL * sum(shed) subject to generator limits, load shed
/// bounds, island balance and (optionally) |flow| <= rating. An island with
/// no in-service generator returns full shed with feasible = true. Throws
/// SolverFailure when no feasible dispatch exists even with relaxed p_min.
DispatchResult dc_opf(const Network& net, const std::vector<BusId>& island,
                      const OpfOptions& opts = {});

/// Convenience: per-island dc_opf over the whole network, merged.
DispatchResult dc_opf_all(const Network& net, const OpfOptions& opts = {});

/// Net pu injection per bus implied by a dispatch (gen setpoints minus
/// post-shed load withdrawals).
std::map<BusId, double> dispatch_injections(const Network& net,
                                            const std::vector<BusId>& island,
                                            const DispatchResult& dispatch);

} // namespace cascade
