#include "cascade/topology.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace cascade {

IslandPartition find_islands(const Network& net, const std::set<BranchId>& outaged_branches) {
    for (BranchId id : outaged_branches) net.branch(id); // existence check

    const int n = static_cast<int>(net.buses.size());
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    };
    for (const Branch& br : net.branches) {
        if (!br.in_service || outaged_branches.count(br.id)) continue;
        int a = find(net.bus_index(br.from_bus));
        int b = find(net.bus_index(br.to_bus));
        if (a != b) parent[a] = b;
    }

    std::map<int, std::vector<BusId>> groups; // root -> buses, deterministic order
    for (int i = 0; i < n; ++i) groups[find(i)].push_back(net.buses[i].id);

    IslandPartition part;
    for (auto& [root, buses] : groups) {
        std::sort(buses.begin(), buses.end());
        part.islands.push_back(std::move(buses));
    }
    // Order islands by smallest contained bus id so output is stable.
    std::sort(part.islands.begin(), part.islands.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });

    for (size_t i = 0; i < part.islands.size(); ++i) {
        bool has_gen = false;
        const auto& buses = part.islands[i];
        for (const Generator& g : net.generators) {
            if (g.in_service && std::binary_search(buses.begin(), buses.end(), g.bus)) {
                has_gen = true;
                break;
            }
        }
        if (!has_gen) part.dead_islands.push_back(static_cast<int>(i));
    }
    return part;
}

BusId select_slack_bus(const Network& net, const std::vector<BusId>& island) {
    GenId best_id = -1;
    double best_weight = -1.0;
    for (const Generator& g : net.generators) {
        if (!g.in_service) continue;
        if (!std::binary_search(island.begin(), island.end(), g.bus)) continue;
        double w = g.inertia_h.value_or(0.0) * g.mbase;
        if (w > best_weight || (w == best_weight && (best_id < 0 || g.id < best_id))) {
            best_weight = w;
            best_id = g.id;
        }
    }
    if (best_id >= 0) return net.generator(best_id).bus;
    return island.front();
}

SusceptanceMatrix build_susceptance(const Network& net, const std::vector<BusId>& island) {
    if (island.empty()) throw SingularTopology("empty island");

    SusceptanceMatrix out;
    out.buses = island;
    std::sort(out.buses.begin(), out.buses.end());
    const int n = static_cast<int>(out.buses.size());
    std::map<BusId, int> pos;
    for (int i = 0; i < n; ++i) pos[out.buses[i]] = i;

    out.b = Eigen::MatrixXd::Zero(n, n);
    for (const Branch& br : net.branches) {
        if (!br.in_service) continue;
        auto fi = pos.find(br.from_bus);
        auto ti = pos.find(br.to_bus);
        if (fi == pos.end() || ti == pos.end()) continue;
        const double y = 1.0 / br.reactance_x;
        out.b(fi->second, fi->second) += y;
        out.b(ti->second, ti->second) += y;
        out.b(fi->second, ti->second) -= y;
        out.b(ti->second, fi->second) -= y;
    }

    const BusId slack = select_slack_bus(net, out.buses);
    out.slack_pos = pos.at(slack);

    if (n > 1) {
        // Reduced matrix must be nonsingular, i.e. the island connected.
        Eigen::MatrixXd red(n - 1, n - 1);
        int ri = 0;
        for (int i = 0; i < n; ++i) {
            if (i == out.slack_pos) continue;
            int rj = 0;
            for (int j = 0; j < n; ++j) {
                if (j == out.slack_pos) continue;
                red(ri, rj++) = out.b(i, j);
            }
            ++ri;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(red);
        if (!lu.isInvertible())
            throw SingularTopology("island of " + std::to_string(n) + " buses is not connected");
    }
    return out;
}

} // namespace cascade
