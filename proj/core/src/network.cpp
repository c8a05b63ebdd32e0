#include "cascade/network.hpp"

#include <cmath>
#include <sstream>

namespace cascade {

namespace {

[[noreturn]] void fail(const std::string& what) { throw MalformedCase(what); }

} // namespace

void Network::validate() {
    bus_pos_.clear();
    branch_pos_.clear();
    gen_pos_.clear();
    load_pos_.clear();

    if (base_mva <= 0.0) fail("base_mva must be positive");
    if (nominal_freq <= 0.0) fail("nominal_freq must be positive");

    for (size_t i = 0; i < buses.size(); ++i) {
        const Bus& b = buses[i];
        if (!bus_pos_.emplace(b.id, static_cast<int>(i)).second)
            fail("duplicate bus id " + std::to_string(b.id));
        if (b.base_kv <= 0.0)
            fail("bus " + std::to_string(b.id) + ": base_kv must be positive");
    }
    for (size_t i = 0; i < branches.size(); ++i) {
        const Branch& br = branches[i];
        if (!branch_pos_.emplace(br.id, static_cast<int>(i)).second)
            fail("duplicate branch id " + std::to_string(br.id));
        if (!bus_pos_.count(br.from_bus) || !bus_pos_.count(br.to_bus))
            fail("branch " + std::to_string(br.id) + " references nonexistent bus");
        if (br.from_bus == br.to_bus)
            fail("branch " + std::to_string(br.id) + " endpoints must differ");
        if (!(br.reactance_x > 0.0))
            fail("branch " + std::to_string(br.id) + ": reactance must be positive");
        if (!(br.rating > 0.0))
            fail("branch " + std::to_string(br.id) + ": rating must be positive");
    }
    for (size_t i = 0; i < generators.size(); ++i) {
        const Generator& g = generators[i];
        if (!gen_pos_.emplace(g.id, static_cast<int>(i)).second)
            fail("duplicate generator id " + std::to_string(g.id));
        if (!bus_pos_.count(g.bus))
            fail("generator " + std::to_string(g.id) + " references nonexistent bus");
        if (g.p_min > g.p_set + 1e-9 || g.p_set > g.p_max + 1e-9)
            fail("generator " + std::to_string(g.id) + ": requires p_min <= p_set <= p_max");
        if (g.mbase <= 0.0)
            fail("generator " + std::to_string(g.id) + ": mbase must be positive");
        if (g.inertia_h && *g.inertia_h <= 0.0) throw InvalidInertia("generator " + std::to_string(g.id));
        if (g.droop_r && *g.droop_r <= 0.0) throw InvalidDroop("generator " + std::to_string(g.id));
        if (g.gov_tc && *g.gov_tc <= 0.0)
            fail("generator " + std::to_string(g.id) + ": gov_tc must be positive");
        if (g.xd_prime && *g.xd_prime <= 0.0)
            fail("generator " + std::to_string(g.id) + ": xd_prime must be positive");
    }
    for (size_t i = 0; i < loads.size(); ++i) {
        const Load& l = loads[i];
        if (!load_pos_.emplace(l.id, static_cast<int>(i)).second)
            fail("duplicate load id " + std::to_string(l.id));
        if (!bus_pos_.count(l.bus))
            fail("load " + std::to_string(l.id) + " references nonexistent bus");
        if (l.p_demand < 0.0)
            fail("load " + std::to_string(l.id) + ": demand must be nonnegative");
        if (l.served_fraction < 0.0 || l.served_fraction > 1.0)
            fail("load " + std::to_string(l.id) + ": served_fraction outside [0,1]");
    }
}

int Network::bus_index(BusId id) const {
    auto it = bus_pos_.find(id);
    if (it == bus_pos_.end()) fail("unknown bus id " + std::to_string(id));
    return it->second;
}

const Branch& Network::branch(BranchId id) const {
    auto it = branch_pos_.find(id);
    if (it == branch_pos_.end()) fail("unknown branch id " + std::to_string(id));
    return branches[it->second];
}

Branch& Network::branch(BranchId id) {
    return const_cast<Branch&>(static_cast<const Network*>(this)->branch(id));
}

const Generator& Network::generator(GenId id) const {
    auto it = gen_pos_.find(id);
    if (it == gen_pos_.end()) fail("unknown generator id " + std::to_string(id));
    return generators[it->second];
}

Generator& Network::generator(GenId id) {
    return const_cast<Generator&>(static_cast<const Network*>(this)->generator(id));
}

const Load& Network::load(LoadId id) const {
    auto it = load_pos_.find(id);
    if (it == load_pos_.end()) fail("unknown load id " + std::to_string(id));
    return loads[it->second];
}

Load& Network::load(LoadId id) {
    return const_cast<Load&>(static_cast<const Network*>(this)->load(id));
}

double Network::total_demand_pu() const {
    double total = 0.0;
    for (const Load& l : loads) total += l.p_demand;
    return total;
}

double Network::total_served_demand_pu() const {
    double total = 0.0;
    for (const Load& l : loads) total += l.p_demand * l.served_fraction;
    return total;
}

Network attach_dynamic_defaults(Network net, const DynDefaults& defaults) {
    if (defaults.droop_r <= 0.0) throw InvalidDroop("default droop_r must be positive");
    if (defaults.inertia_h <= 0.0) throw InvalidInertia("default inertia_h must be positive");
    for (Generator& g : net.generators) {
        if (g.droop_r && *g.droop_r <= 0.0)
            throw InvalidDroop("generator " + std::to_string(g.id));
        if (g.inertia_h && *g.inertia_h <= 0.0)
            throw InvalidInertia("generator " + std::to_string(g.id));
        if (!g.inertia_h) g.inertia_h = defaults.inertia_h;
        if (!g.damping_d) g.damping_d = defaults.damping_d;
        if (!g.droop_r) g.droop_r = defaults.droop_r;
        if (!g.gov_tc) g.gov_tc = defaults.gov_tc;
        if (!g.xd_prime) g.xd_prime = defaults.xd_prime;
    }
    for (Load& l : net.loads) {
        if (!l.freq_sensitivity_kf) l.freq_sensitivity_kf = defaults.load_kf;
    }
    net.validate();
    return net;
}

} // namespace cascade
