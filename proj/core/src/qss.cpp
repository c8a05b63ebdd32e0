#include "cascade/qss.hpp"

#include <algorithm>
#include <cmath>

#include "cascade/opf.hpp"
#include "cascade/powerflow.hpp"
#include "cascade/topology.hpp"

namespace cascade {

std::set<BranchId> overloaded_set(const std::map<BranchId, double>& flows,
                                  const Network& net, double tol) {
    std::set<BranchId> over;
    for (const auto& [id, flow] : flows) {
        if (std::abs(flow) > net.branch(id).rating * (1.0 + tol)) over.insert(id);
    }
    return over;
}

namespace {

double island_served_pu(const Network& net, const std::vector<BusId>& island) {
    double served = 0.0;
    for (const Load& l : net.loads)
        if (std::binary_search(island.begin(), island.end(), l.bus))
            served += l.p_demand * l.served_fraction;
    return served;
}

void kill_island(Network& net, const std::vector<BusId>& island) {
    for (Load& l : net.loads)
        if (std::binary_search(island.begin(), island.end(), l.bus)) l.served_fraction = 0.0;
    for (Generator& g : net.generators)
        if (std::binary_search(island.begin(), island.end(), g.bus)) g.in_service = false;
}

} // namespace

CascadeResult run_static_cascade(const Network& base, const std::set<BranchId>& initial_outages,
                                 const QssOptions& opts) {
    Network net = base;
    for (BranchId id : initial_outages) net.branch(id); // existence check

    CascadeResult result;
    const double total_demand_pu = net.total_demand_pu();

    std::set<BranchId> pending = initial_outages;
    int iteration = 0;
    int n_islands_prev = static_cast<int>(find_islands(net).islands.size());

    while (!pending.empty()) {
        const double now = static_cast<double>(iteration);
        for (BranchId id : pending) {
            net.branch(id).in_service = false;
            result.events.push_back({now, EventKind::branch_trip, id, 0.0});
        }
        result.outages_per_iteration.push_back(static_cast<int>(pending.size()));
        pending.clear();

        IslandPartition part = find_islands(net);
        if (static_cast<int>(part.islands.size()) > n_islands_prev) {
            result.events.push_back({now, EventKind::separation, part.islands.front().front(),
                                     static_cast<double>(part.islands.size())});
        }
        n_islands_prev = static_cast<int>(part.islands.size());

        for (int di : part.dead_islands) {
            const auto& island = part.islands[static_cast<size_t>(di)];
            const double lost = island_served_pu(net, island);
            if (lost > 0.0) {
                result.events.push_back(
                    {now, EventKind::island_dead, island.front(), net.mw(lost)});
            }
            kill_island(net, island);
        }

        for (size_t ii = 0; ii < part.islands.size(); ++ii) {
            if (std::find(part.dead_islands.begin(), part.dead_islands.end(),
                          static_cast<int>(ii)) != part.dead_islands.end())
                continue;
            const auto& island = part.islands[ii];
            if (island_served_pu(net, island) <= 0.0 && island.size() == 1) continue;

            // Balance-only redispatch; line limits act through the thermal
            // trips below, not through the dispatch.
            OpfOptions oopts;
            oopts.voll = opts.voll;
            oopts.enforce_flow_limits = false;
            DispatchResult dispatch;
            try {
                dispatch = dc_opf(net, island, oopts);
            } catch (const SolverFailure&) {
                // Non-convergent island treated as blackout.
                const double lost = island_served_pu(net, island);
                if (lost > 0.0)
                    result.events.push_back(
                        {now, EventKind::island_dead, island.front(), net.mw(lost)});
                kill_island(net, island);
                continue;
            }

            // Bake shed into served fractions; shed never restores.
            double shed_total = 0.0;
            for (const auto& [lid, shed] : dispatch.shed_per_load) {
                if (shed <= 1e-12) continue;
                Load& l = net.load(lid);
                const double served = l.p_demand * l.served_fraction;
                if (served > 0.0)
                    l.served_fraction *= std::max(0.0, 1.0 - shed / served);
                shed_total += shed;
            }
            if (shed_total > 1e-12) {
                result.events.push_back(
                    {now, EventKind::load_shed_ufls, island.front(), net.mw(shed_total)});
            }

            if (island.size() < 2) continue;
            std::map<BusId, double> inj = dispatch_injections(net, island, dispatch);
            double residual = 0.0;
            for (const auto& [bus, p] : inj) residual += p;
            inj[island.front()] -= residual; // absorb LP rounding

            DcSolution flow_sol;
            try {
                flow_sol = dc_power_flow(net, island, inj);
            } catch (const Error&) {
                const double lost = island_served_pu(net, island);
                if (lost > 0.0)
                    result.events.push_back(
                        {now, EventKind::island_dead, island.front(), net.mw(lost)});
                kill_island(net, island);
                continue;
            }
            for (BranchId id : overloaded_set(flow_sol.branch_flows, net, opts.overload_tol))
                pending.insert(id);
        }
        ++iteration;
    }

    const double served = net.total_served_demand_pu();
    const double loss_pu = served <= 0.0 ? total_demand_pu : total_demand_pu - served;
    result.demand_lost_mw = net.mw(loss_pu);
    result.blackout = served <= 0.0;
    std::sort(result.events.begin(), result.events.end());
    return result;
}

} // namespace cascade
