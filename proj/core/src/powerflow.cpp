#include "cascade/powerflow.hpp"

#include <algorithm>
#include <cmath>

namespace cascade {

std::map<BranchId, double> branch_flows(const Network& net, const std::vector<BusId>& buses,
                                        const Eigen::VectorXd& angles) {
    std::map<BusId, int> pos;
    for (size_t i = 0; i < buses.size(); ++i) pos[buses[i]] = static_cast<int>(i);
    std::map<BranchId, double> flows;
    for (const Branch& br : net.branches) {
        if (!br.in_service) continue;
        auto fi = pos.find(br.from_bus);
        auto ti = pos.find(br.to_bus);
        if (fi == pos.end() || ti == pos.end()) continue;
        flows[br.id] = (angles(fi->second) - angles(ti->second)) / br.reactance_x;
    }
    return flows;
}

DcSolution dc_power_flow(const Network& net, const std::vector<BusId>& island,
                         const std::map<BusId, double>& injections) {
    SusceptanceMatrix sus = build_susceptance(net, island);
    const int n = static_cast<int>(sus.buses.size());

    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        auto it = injections.find(sus.buses[i]);
        if (it != injections.end()) p(i) = it->second;
    }
    if (std::abs(p.sum()) > 1e-9)
        throw SolverFailure("dc_power_flow: injections do not balance (sum " +
                            std::to_string(p.sum()) + ")");

    DcSolution sol;
    sol.buses = sus.buses;
    sol.angles = Eigen::VectorXd::Zero(n);
    if (n > 1) {
        Eigen::MatrixXd red(n - 1, n - 1);
        Eigen::VectorXd rhs(n - 1);
        int ri = 0;
        for (int i = 0; i < n; ++i) {
            if (i == sus.slack_pos) continue;
            rhs(ri) = p(i);
            int rj = 0;
            for (int j = 0; j < n; ++j) {
                if (j == sus.slack_pos) continue;
                red(ri, rj++) = sus.b(i, j);
            }
            ++ri;
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(red);
        Eigen::VectorXd theta_red = lu.solve(rhs);
        if ((red * theta_red - rhs).cwiseAbs().maxCoeff() > 1e-9)
            throw SingularTopology("dc_power_flow: residual too large");
        ri = 0;
        for (int i = 0; i < n; ++i) {
            if (i == sus.slack_pos) continue;
            sol.angles(i) = theta_red(ri++);
        }
    }
    sol.branch_flows = branch_flows(net, sol.buses, sol.angles);
    return sol;
}

} // namespace cascade
