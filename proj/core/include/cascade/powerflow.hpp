#pragma once

#include <map>
#include <vector>

#include "cascade/topology.hpp"

namespace cascade {

struct DcSolution {
    std::vector<BusId> buses;    // island buses, sorted
    Eigen::VectorXd angles;      // radians, aligned with `buses`; slack = 0
    std::map<BranchId, double> branch_flows; // pu, from->to positive
};

/// Solves B' theta = P on one island. `injections` maps bus id -> net pu MW
/// injection (missing buses inject 0); the sum must vanish to 1e-9 (caller
/// balances via the slack). Throws SingularTopology on a disconnected island.
DcSolution dc_power_flow(const Network& net, const std::vector<BusId>& island,
                         const std::map<BusId, double>& injections);

/// flow(i,j) = (theta_i - theta_j) / x for every in-service island branch.
std::map<BranchId, double> branch_flows(const Network& net, const std::vector<BusId>& buses,
                                        const Eigen::VectorXd& angles);

} // namespace cascade
