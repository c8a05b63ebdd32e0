#pragma once

#include <Eigen/Dense>
#include <set>
#include <vector>

#include "cascade/network.hpp"

namespace cascade {

struct IslandPartition {
    std::vector<std::vector<BusId>> islands; // each sorted by bus id
    std::vector<int> dead_islands;           // indices into islands with no in-service generator
};

/// Connected components of the graph on in-service branches minus the given
/// outage set. Every bus belongs to exactly one island; islands with no
/// in-service generator are flagged dead.
IslandPartition find_islands(const Network& net, const std::set<BranchId>& outaged_branches = {});

struct SusceptanceMatrix {
    std::vector<BusId> buses;   // island buses, sorted; row/col order
    Eigen::MatrixXd b;          // full nodal B' (1/x stamps)
    int slack_pos = 0;          // position of the slack bus in `buses`
};

/// Slack choice: bus of the in-service generator with largest inertia_h*mbase,
/// ties by lowest generator id; falls back to the lowest bus id when the
/// island has no generator.
BusId select_slack_bus(const Network& net, const std::vector<BusId>& island);

/// Nodal susceptance matrix over the island's buses from in-service branches
/// with both endpoints inside the island. Throws SingularTopology when the
/// reduced matrix (slack removed) is singular, i.e. the island is not
/// connected through in-service branches.
SusceptanceMatrix build_susceptance(const Network& net, const std::vector<BusId>& island);

} // namespace cascade
