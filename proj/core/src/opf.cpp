#include "cascade/opf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cascade/lp.hpp"
#include "cascade/powerflow.hpp"
#include "cascade/topology.hpp"

namespace cascade {

namespace {

struct IslandElements {
    std::vector<const Generator*> gens;
    std::vector<const Load*> loads;
    std::vector<const Branch*> branches;
};

IslandElements collect(const Network& net, const std::vector<BusId>& island) {
    IslandElements e;
    auto inside = [&](BusId b) { return std::binary_search(island.begin(), island.end(), b); };
    for (const Generator& g : net.generators)
        if (g.in_service && inside(g.bus)) e.gens.push_back(&g);
    for (const Load& l : net.loads)
        if (inside(l.bus)) e.loads.push_back(&l);
    for (const Branch& br : net.branches)
        if (br.in_service && inside(br.from_bus) && inside(br.to_bus)) e.branches.push_back(&br);
    return e;
}

DispatchResult solve_island(const Network& net, const std::vector<BusId>& island,
                            const IslandElements& e, const OpfOptions& opts,
                            bool relax_pmin) {
    const int ng = static_cast<int>(e.gens.size());
    const int nl = static_cast<int>(e.loads.size());
    const int nv = ng + nl; // gens then sheds
    const double max_cost =
        std::accumulate(e.gens.begin(), e.gens.end(), 1.0, [](double acc, const Generator* g) {
            return std::max(acc, g->cost_linear);
        });
    const double voll = std::max(opts.voll, 100.0 * max_cost);

    LpProblem lp;
    lp.c = Eigen::VectorXd::Zero(nv);
    lp.lower = Eigen::VectorXd::Zero(nv);
    lp.upper = Eigen::VectorXd::Zero(nv);
    double demand = 0.0;
    for (int i = 0; i < ng; ++i) {
        lp.c(i) = e.gens[i]->cost_linear * net.base_mva;
        lp.lower(i) = relax_pmin ? std::min(e.gens[i]->p_min, 0.0) : e.gens[i]->p_min;
        lp.upper(i) = e.gens[i]->p_max;
    }
    for (int i = 0; i < nl; ++i) {
        const double d = e.loads[i]->p_demand * e.loads[i]->served_fraction;
        lp.c(ng + i) = voll * net.base_mva;
        lp.upper(ng + i) = d;
        demand += d;
    }

    lp.a_eq = Eigen::MatrixXd::Ones(1, nv);
    lp.b_eq = Eigen::VectorXd::Constant(1, demand);

    if (opts.enforce_flow_limits && !e.branches.empty() && island.size() > 1) {
        SusceptanceMatrix sus = build_susceptance(net, island);
        const int n = static_cast<int>(sus.buses.size());
        std::map<BusId, int> pos;
        for (int i = 0; i < n; ++i) pos[sus.buses[i]] = i;

        Eigen::MatrixXd red(n - 1, n - 1);
        {
            int ri = 0;
            for (int i = 0; i < n; ++i) {
                if (i == sus.slack_pos) continue;
                int rj = 0;
                for (int j = 0; j < n; ++j) {
                    if (j == sus.slack_pos) continue;
                    red(ri, rj++) = sus.b(i, j);
                }
                ++ri;
            }
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(red);
        auto reduced_index = [&](int full) {
            return full < sus.slack_pos ? full : full - 1;
        };

        const int nb = static_cast<int>(e.branches.size());
        Eigen::MatrixXd ptdf = Eigen::MatrixXd::Zero(nb, n); // branch x bus
        for (int k = 0; k < nb; ++k) {
            const Branch* br = e.branches[k];
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n - 1);
            const int fi = pos.at(br->from_bus);
            const int ti = pos.at(br->to_bus);
            if (fi != sus.slack_pos) rhs(reduced_index(fi)) += 1.0;
            if (ti != sus.slack_pos) rhs(reduced_index(ti)) -= 1.0;
            Eigen::VectorXd y = lu.solve(rhs);
            int ri = 0;
            for (int i = 0; i < n; ++i) {
                if (i == sus.slack_pos) continue;
                ptdf(k, i) = y(ri++) / br->reactance_x;
            }
        }

        // flow_k = ptdf_k . (Cg p + Cl shed - demand); two rows per branch.
        lp.a_ub = Eigen::MatrixXd::Zero(2 * nb, nv);
        lp.b_ub = Eigen::VectorXd::Zero(2 * nb);
        Eigen::VectorXd base_inj = Eigen::VectorXd::Zero(n);
        for (const Load* l : e.loads)
            base_inj(pos.at(l->bus)) -= l->p_demand * l->served_fraction;
        for (int k = 0; k < nb; ++k) {
            Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(nv);
            for (int i = 0; i < ng; ++i) row(i) = ptdf(k, pos.at(e.gens[i]->bus));
            for (int i = 0; i < nl; ++i) row(ng + i) = ptdf(k, pos.at(e.loads[i]->bus));
            const double offset = ptdf.row(k).dot(base_inj);
            const double r = e.branches[k]->rating;
            lp.a_ub.row(2 * k) = row;
            lp.b_ub(2 * k) = r - offset;
            lp.a_ub.row(2 * k + 1) = -row;
            lp.b_ub(2 * k + 1) = r + offset;
        }
    } else {
        lp.a_ub = Eigen::MatrixXd::Zero(0, nv);
        lp.b_ub = Eigen::VectorXd::Zero(0);
    }

    LpResult res = solve_lp(lp);
    DispatchResult out;
    if (!res.feasible) return out;
    out.feasible = true;
    out.objective_value = res.objective;
    for (int i = 0; i < ng; ++i) out.gen_setpoints[e.gens[i]->id] = res.x(i);
    for (int i = 0; i < nl; ++i) out.shed_per_load[e.loads[i]->id] = res.x(ng + i);
    return out;
}

} // namespace

DispatchResult dc_opf(const Network& net, const std::vector<BusId>& island,
                      const OpfOptions& opts) {
    std::vector<BusId> sorted = island;
    std::sort(sorted.begin(), sorted.end());
    IslandElements e = collect(net, sorted);

    if (e.gens.empty()) {
        // Dead island: full shed by convention.
        DispatchResult out;
        out.feasible = true;
        const double max_cost = 1.0;
        const double voll = std::max(opts.voll, 100.0 * max_cost);
        for (const Load* l : e.loads) {
            const double d = l->p_demand * l->served_fraction;
            out.shed_per_load[l->id] = d;
            out.objective_value += voll * d * net.base_mva;
        }
        return out;
    }

    DispatchResult out = solve_island(net, sorted, e, opts, /*relax_pmin=*/false);
    if (!out.feasible) out = solve_island(net, sorted, e, opts, /*relax_pmin=*/true);
    if (!out.feasible) throw SolverFailure("dc_opf: no feasible dispatch for island");
    return out;
}

DispatchResult dc_opf_all(const Network& net, const OpfOptions& opts) {
    auto part = find_islands(net);
    DispatchResult merged;
    merged.feasible = true;
    for (const auto& island : part.islands) {
        DispatchResult r = dc_opf(net, island, opts);
        merged.gen_setpoints.insert(r.gen_setpoints.begin(), r.gen_setpoints.end());
        merged.shed_per_load.insert(r.shed_per_load.begin(), r.shed_per_load.end());
        merged.objective_value += r.objective_value;
        merged.feasible = merged.feasible && r.feasible;
    }
    return merged;
}

std::map<BusId, double> dispatch_injections(const Network& net,
                                            const std::vector<BusId>& island,
                                            const DispatchResult& dispatch) {
    std::map<BusId, double> inj;
    auto inside = [&](BusId b) { return std::binary_search(island.begin(), island.end(), b); };
    for (const Generator& g : net.generators) {
        if (!g.in_service || !inside(g.bus)) continue;
        auto it = dispatch.gen_setpoints.find(g.id);
        if (it != dispatch.gen_setpoints.end()) inj[g.bus] += it->second;
    }
    for (const Load& l : net.loads) {
        if (!inside(l.bus)) continue;
        double d = l.p_demand * l.served_fraction;
        auto it = dispatch.shed_per_load.find(l.id);
        if (it != dispatch.shed_per_load.end()) d -= it->second;
        inj[l.bus] -= d;
    }
    return inj;
}

} // namespace cascade
