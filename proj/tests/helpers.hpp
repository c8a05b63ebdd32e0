#pragma once

#include <string>

#include "cascade/network.hpp"

namespace testgrid {

inline cascade::Bus bus(int id) { return {id, 230.0, 1}; }

inline cascade::Branch branch(int id, int from, int to, double x, double rating_pu) {
    cascade::Branch b;
    b.id = id;
    b.from_bus = from;
    b.to_bus = to;
    b.reactance_x = x;
    b.rating = rating_pu;
    return b;
}

inline cascade::Generator gen(int id, int bus, double pmax, double cost = 10.0,
                              double pmin = 0.0) {
    cascade::Generator g;
    g.id = id;
    g.bus = bus;
    g.p_max = pmax;
    g.p_min = pmin;
    g.p_set = pmax / 2.0;
    g.cost_linear = cost;
    return g;
}

inline cascade::Load load(int id, int bus, double p_pu) {
    cascade::Load l;
    l.id = id;
    l.bus = bus;
    l.p_demand = p_pu;
    return l;
}

/// gen(2.0 pu max) at bus 1, 1.0 pu load at bus 2, one line x=0.1.
inline cascade::Network two_bus(double rating_pu = 1.5) {
    cascade::Network net;
    net.buses = {bus(1), bus(2)};
    net.branches = {branch(1, 1, 2, 0.1, rating_pu)};
    net.generators = {gen(1, 1, 2.0)};
    net.loads = {load(1, 2, 1.0)};
    net.validate();
    return net;
}

/// Triangle: gen at 1, 1.0 pu load at 3. Line 1-2 and 2-3 have x=0.1, the
/// direct line 1-3 has x=0.2, so the flow splits exactly 50/50.
inline cascade::Network three_bus_ring(double rating_pu = 1.0) {
    cascade::Network net;
    net.buses = {bus(1), bus(2), bus(3)};
    net.branches = {branch(1, 1, 2, 0.1, rating_pu), branch(2, 2, 3, 0.1, rating_pu),
                    branch(3, 1, 3, 0.2, rating_pu)};
    net.generators = {gen(1, 1, 2.0)};
    net.loads = {load(1, 3, 1.0)};
    net.validate();
    return net;
}

inline std::string case_dir() { return CASCADE_CASE_DIR; }

} // namespace testgrid
