#include "cascade/dynamics.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

#include "cascade/metrics.hpp"
#include "cascade/powerflow.hpp"
#include "cascade/topology.hpp"

namespace cascade {

GenId select_reference(const Network& net, const std::vector<BusId>& island) {
    GenId best = -1;
    double best_w = -1.0;
    for (const Generator& g : net.generators) {
        if (!g.in_service) continue;
        if (!std::binary_search(island.begin(), island.end(), g.bus)) continue;
        const double w = g.inertia_h.value_or(0.0) * g.mbase;
        if (w > best_w || (w == best_w && best >= 0 && g.id < best)) {
            best_w = w;
            best = g.id;
        }
    }
    return best;
}

namespace {

struct Machine {
    GenId id = 0;
    BusId bus = 0;
    double h_sys = 0.0;     // 2H reserve: H * mbase / base, s
    double d_sys = 0.0;     // damping, system base
    double inv_r_sys = 0.0; // governor gain, system base
    double tg = 0.5;        // s
    double xd_sys = 0.1;    // pu, system base
    double p_ref = 0.0;     // pu
    double p_max = 0.0;     // pu
    MachineState st;
    OfgtState ofgt;
    bool oos_tripped = false;
};

struct LoadItem {
    LoadId id = 0;
    BusId bus = 0;
    double p_nom = 0.0;   // pu
    double kf = 0.0;
    double served = 0.0;  // pu actually served at nominal frequency
};

struct Island {
    std::vector<BusId> buses;
    std::map<BusId, int> pos;
    std::vector<int> machs; // indices into machines
    std::vector<int> lds;   // indices into loads
    std::vector<BranchId> branch_ids;
    Eigen::LDLT<Eigen::MatrixXd> factor;
    UflsState ufls;
    double coi_omega = 0.0;
    double coi_delta = 0.0;
    bool alive = true;
};

} // namespace

struct DynamicEngine::Impl {
    Network net;
    DynConfig cfg;
    double omega_s = 0.0; // rad/s
    std::vector<Machine> machines;
    std::map<GenId, size_t> mach_by_id;
    std::vector<LoadItem> loads;
    std::vector<Island> islands;
    std::map<BranchId, OverloadRelayState> overload;
    std::vector<EventRecord> events;
    Traces traces;
    std::map<BranchId, double> last_flows;
    std::map<GenId, double> last_pe;
    double t = 0.0;
    long step_count = 0;
    double total_demand_pu = 0.0;
    size_t prev_partition_size = 0;
    bool diverged = false;

    Impl(const Network& n, const DispatchResult& dispatch, const DynConfig& c)
        : net(n), cfg(c) {
        cfg.check();
        omega_s = 2.0 * M_PI * net.nominal_freq;
        total_demand_pu = net.total_demand_pu();

        for (const Generator& g : net.generators) {
            if (!g.in_service) continue;
            if (!g.inertia_h || !g.damping_d || !g.droop_r || !g.gov_tc || !g.xd_prime)
                throw InitFailure("generator " + std::to_string(g.id) +
                                  " is missing dynamic data");
            Machine m;
            m.id = g.id;
            m.bus = g.bus;
            const double scale = g.mbase / net.base_mva;
            m.h_sys = *g.inertia_h * scale;
            m.d_sys = *g.damping_d * scale;
            m.inv_r_sys = scale / *g.droop_r;
            m.tg = *g.gov_tc;
            m.xd_sys = *g.xd_prime / scale;
            m.p_max = g.p_max;
            auto it = dispatch.gen_setpoints.find(g.id);
            m.p_ref = it != dispatch.gen_setpoints.end() ? it->second : g.p_set;
            m.st.p_mech = m.p_ref;
            mach_by_id[m.id] = machines.size();
            machines.push_back(m);
        }

        for (const Load& l : net.loads) {
            LoadItem li;
            li.id = l.id;
            li.bus = l.bus;
            li.p_nom = l.p_demand;
            li.kf = l.freq_sensitivity_kf.value_or(0.0);
            li.served = l.p_demand * l.served_fraction;
            auto it = dispatch.shed_per_load.find(l.id);
            if (it != dispatch.shed_per_load.end())
                li.served = std::max(0.0, li.served - it->second);
            loads.push_back(li);
        }

        for (const Branch& br : net.branches)
            if (br.in_service) overload.emplace(br.id, OverloadRelayState{});

        prev_partition_size = find_islands(net).islands.size();
        rebuild_islands(0.0, /*emit_separation=*/false);

        // Equilibrium initialization: rotor angles from the balanced DC
        // solution, so P_e matches the dispatch exactly at t = 0.
        for (Island& isl : islands) {
            if (!isl.alive) continue;
            std::map<BusId, double> inj;
            for (int mi : isl.machs) inj[machines[mi].bus] += machines[mi].p_ref;
            for (int li : isl.lds) inj[loads[li].bus] -= loads[li].served;
            double residual = 0.0;
            for (auto& [b, p] : inj) residual += p;
            inj[isl.buses.front()] -= residual;
            DcSolution sol;
            try {
                sol = dc_power_flow(net, isl.buses, inj);
            } catch (const Error& e) {
                throw InitFailure(std::string("equilibrium init failed: ") + e.what());
            }
            for (int mi : isl.machs) {
                Machine& m = machines[mi];
                m.st.delta = sol.angles(isl.pos.at(m.bus)) + m.xd_sys * m.st.p_mech;
                m.st.omega = 0.0;
                m.st.e_prime = 1.0;
            }
        }
        measure();
    }

    double remaining_served_pu(const Island& isl) const {
        double s = 0.0;
        for (int li : isl.lds) s += loads[li].served;
        return s;
    }

    void blackout_island(Island& isl, double now) {
        const double lost = remaining_served_pu(isl);
        if (lost > 0.0)
            events.push_back({now, EventKind::island_dead, isl.buses.front(), net.mw(lost)});
        for (int li : isl.lds) loads[li].served = 0.0;
        for (int mi : isl.machs) {
            machines[mi].st.connected = false;
            net.generator(machines[mi].id).in_service = false;
        }
        isl.alive = false;
    }

    void rebuild_islands(double now, bool emit_separation = true) {
        IslandPartition part = find_islands(net);
        if (emit_separation && part.islands.size() > prev_partition_size) {
            events.push_back({now, EventKind::separation, part.islands.front().front(),
                              static_cast<double>(part.islands.size())});
        }
        prev_partition_size = part.islands.size();

        std::vector<Island> old = std::move(islands);
        islands.clear();
        for (const auto& buses : part.islands) {
            Island isl;
            isl.buses = buses;
            for (size_t i = 0; i < buses.size(); ++i) isl.pos[buses[i]] = static_cast<int>(i);
            for (size_t mi = 0; mi < machines.size(); ++mi)
                if (machines[mi].st.connected && isl.pos.count(machines[mi].bus))
                    isl.machs.push_back(static_cast<int>(mi));
            for (size_t li = 0; li < loads.size(); ++li)
                if (isl.pos.count(loads[li].bus)) isl.lds.push_back(static_cast<int>(li));
            for (const Branch& br : net.branches)
                if (br.in_service && isl.pos.count(br.from_bus) && isl.pos.count(br.to_bus))
                    isl.branch_ids.push_back(br.id);

            // Inherit UFLS latches/timers from the parent island.
            for (const Island& o : old) {
                if (o.pos.count(buses.front())) {
                    isl.ufls = o.ufls;
                    break;
                }
            }
            if (isl.ufls.timers.size() != cfg.relays.ufls.stages.size())
                isl.ufls.reset(cfg.relays.ufls.stages.size());

            if (isl.machs.empty()) {
                const double lost = remaining_served_pu(isl);
                if (lost > 0.0)
                    events.push_back(
                        {now, EventKind::island_dead, isl.buses.front(), net.mw(lost)});
                for (int li : isl.lds) loads[li].served = 0.0;
                isl.alive = false;
                islands.push_back(std::move(isl));
                continue;
            }

            const int n = static_cast<int>(buses.size());
            Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
            for (BranchId bid : isl.branch_ids) {
                const Branch& br = net.branch(bid);
                const double y = 1.0 / br.reactance_x;
                const int f = isl.pos.at(br.from_bus);
                const int tt = isl.pos.at(br.to_bus);
                a(f, f) += y;
                a(tt, tt) += y;
                a(f, tt) -= y;
                a(tt, f) -= y;
            }
            for (int mi : isl.machs) a(isl.pos.at(machines[mi].bus), isl.pos.at(machines[mi].bus)) +=
                1.0 / machines[mi].xd_sys;
            isl.factor.compute(a);
            if (isl.factor.info() != Eigen::Success) {
                blackout_island(isl, now);
                diverged = true;
            }
            islands.push_back(std::move(isl));
        }
    }

    double coi_omega_of(const Island& isl, const std::vector<double>& omega_by_mach) const {
        double hw = 0.0, sum = 0.0;
        for (int mi : isl.machs) {
            hw += machines[mi].h_sys;
            sum += machines[mi].h_sys * omega_by_mach[mi];
        }
        return hw > 0.0 ? sum / hw : 0.0;
    }

    /// Solves the island network for the given rotor angles / speeds and
    /// fills bus angles + per-machine electrical power. Returns false when
    /// the result is non-finite.
    bool solve_island(const Island& isl, const std::vector<double>& delta,
                      const std::vector<double>& omega, Eigen::VectorXd& theta,
                      std::vector<double>& pe) const {
        const int n = static_cast<int>(isl.buses.size());
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
        double hw = 0.0, wsum = 0.0;
        for (int mi : isl.machs) {
            hw += machines[mi].h_sys;
            wsum += machines[mi].h_sys * omega[mi];
        }
        const double coi = hw > 0.0 ? wsum / hw : 0.0;
        for (int li : isl.lds) {
            const LoadItem& l = loads[li];
            rhs(isl.pos.at(l.bus)) -= l.served * (1.0 + l.kf * coi);
        }
        for (int mi : isl.machs)
            rhs(isl.pos.at(machines[mi].bus)) += delta[mi] / machines[mi].xd_sys;
        theta = isl.factor.solve(rhs);
        if (!theta.allFinite()) return false;
        for (int mi : isl.machs)
            pe[mi] = (delta[mi] - theta(isl.pos.at(machines[mi].bus))) / machines[mi].xd_sys;
        return true;
    }

    bool derivs(const Island& isl, const std::vector<double>& delta,
                const std::vector<double>& omega, const std::vector<double>& pmech,
                std::vector<double>& dd, std::vector<double>& dw,
                std::vector<double>& dp) const {
        Eigen::VectorXd theta;
        std::vector<double> pe(machines.size(), 0.0);
        if (!solve_island(isl, delta, omega, theta, pe)) return false;
        for (int mi : isl.machs) {
            const Machine& m = machines[mi];
            dd[mi] = omega_s * omega[mi];
            dw[mi] = (pmech[mi] - pe[mi] - m.d_sys * omega[mi]) / (2.0 * m.h_sys);
            double g = (m.p_ref - pmech[mi] - m.inv_r_sys * omega[mi]) / m.tg;
            if ((pmech[mi] >= m.p_max && g > 0.0) || (pmech[mi] <= 0.0 && g < 0.0)) g = 0.0;
            dp[mi] = g;
        }
        return true;
    }

    void integrate_island(Island& isl, double now) {
        const size_t nm = machines.size();
        std::vector<double> d0(nm), w0(nm), p0(nm);
        for (int mi : isl.machs) {
            d0[mi] = machines[mi].st.delta;
            w0[mi] = machines[mi].st.omega;
            p0[mi] = machines[mi].st.p_mech;
        }
        auto stage_state = [&](const std::vector<double>& kd, const std::vector<double>& kw,
                               const std::vector<double>& kp, double h,
                               std::vector<double>& d, std::vector<double>& w,
                               std::vector<double>& p) {
            d = d0;
            w = w0;
            p = p0;
            for (int mi : isl.machs) {
                d[mi] += h * kd[mi];
                w[mi] += h * kw[mi];
                p[mi] += h * kp[mi];
            }
        };

        std::vector<double> kd1(nm), kw1(nm), kp1(nm), kd2(nm), kw2(nm), kp2(nm);
        std::vector<double> kd3(nm), kw3(nm), kp3(nm), kd4(nm), kw4(nm), kp4(nm);
        std::vector<double> ds(nm), ws(nm), ps(nm);
        const double dt = cfg.dt;

        bool ok = derivs(isl, d0, w0, p0, kd1, kw1, kp1);
        if (ok) {
            stage_state(kd1, kw1, kp1, dt / 2.0, ds, ws, ps);
            ok = derivs(isl, ds, ws, ps, kd2, kw2, kp2);
        }
        if (ok) {
            stage_state(kd2, kw2, kp2, dt / 2.0, ds, ws, ps);
            ok = derivs(isl, ds, ws, ps, kd3, kw3, kp3);
        }
        if (ok) {
            stage_state(kd3, kw3, kp3, dt, ds, ws, ps);
            ok = derivs(isl, ds, ws, ps, kd4, kw4, kp4);
        }
        if (ok) {
            for (int mi : isl.machs) {
                Machine& m = machines[mi];
                m.st.delta = d0[mi] + dt / 6.0 * (kd1[mi] + 2 * kd2[mi] + 2 * kd3[mi] + kd4[mi]);
                m.st.omega = w0[mi] + dt / 6.0 * (kw1[mi] + 2 * kw2[mi] + 2 * kw3[mi] + kw4[mi]);
                m.st.p_mech = std::clamp(
                    p0[mi] + dt / 6.0 * (kp1[mi] + 2 * kp2[mi] + 2 * kp3[mi] + kp4[mi]), 0.0,
                    m.p_max);
                if (!std::isfinite(m.st.delta) || !std::isfinite(m.st.omega) ||
                    !std::isfinite(m.st.p_mech))
                    ok = false;
            }
        }
        if (!ok) {
            diverged = true;
            blackout_island(isl, now);
        }
    }

    /// Resolves the network at the current state, refreshing flows, P_e and
    /// island COI values; appends traces when enabled.
    void measure() {
        last_flows.clear();
        last_pe.clear();
        std::vector<double> delta(machines.size()), omega(machines.size());
        for (size_t i = 0; i < machines.size(); ++i) {
            delta[i] = machines[i].st.delta;
            omega[i] = machines[i].st.omega;
        }
        for (Island& isl : islands) {
            if (!isl.alive) continue;
            Eigen::VectorXd theta;
            std::vector<double> pe(machines.size(), 0.0);
            if (!solve_island(isl, delta, omega, theta, pe)) {
                diverged = true;
                blackout_island(isl, t);
                continue;
            }
            double hw = 0.0, wsum = 0.0, dsum = 0.0;
            for (int mi : isl.machs) {
                hw += machines[mi].h_sys;
                wsum += machines[mi].h_sys * omega[mi];
                dsum += machines[mi].h_sys * delta[mi];
                last_pe[machines[mi].id] = pe[mi];
            }
            isl.coi_omega = hw > 0.0 ? wsum / hw : 0.0;
            isl.coi_delta = hw > 0.0 ? dsum / hw : 0.0;
            for (BranchId bid : isl.branch_ids) {
                const Branch& br = net.branch(bid);
                last_flows[bid] = (theta(isl.pos.at(br.from_bus)) - theta(isl.pos.at(br.to_bus))) /
                                  br.reactance_x;
            }
        }
        if (cfg.record_traces) {
            for (const auto& [bid, flow] : last_flows)
                traces.branch_loading[bid].emplace_back(t, std::abs(flow) / net.branch(bid).rating);
            for (const Island& isl : islands) {
                if (!isl.alive) continue;
                for (int mi : isl.machs) {
                    const Machine& m = machines[mi];
                    traces.machine_omega[m.id].emplace_back(t, m.st.omega);
                    traces.machine_angle_gap[m.id].emplace_back(
                        t, std::abs(m.st.delta - isl.coi_delta));
                }
            }
        }
    }

    void process_relays() {
        std::vector<BranchId> branch_trips;
        std::vector<GenId> ofgt_trips, oos_trips;
        struct Shed {
            BusId island_rep;
            size_t island_idx;
            int stage;
        };
        std::vector<Shed> sheds;

        for (size_t ii = 0; ii < islands.size(); ++ii) {
            Island& isl = islands[ii];
            if (!isl.alive) continue;
            for (BranchId bid : isl.branch_ids) {
                auto it = last_flows.find(bid);
                if (it == last_flows.end()) continue;
                const double m = std::abs(it->second) / net.branch(bid).rating;
                if (overload[bid].update(m, cfg.dt, cfg.relays.overload))
                    branch_trips.push_back(bid);
            }
            const double freq = 1.0 + isl.coi_omega;
            for (int stage : isl.ufls.evaluate(cfg.relays.ufls, freq, cfg.dt))
                sheds.push_back({isl.buses.front(), ii, stage});
            for (int mi : isl.machs) {
                Machine& m = machines[mi];
                if (m.ofgt.update(cfg.relays.ofgt, m.st.omega, cfg.dt))
                    ofgt_trips.push_back(m.id);
                if (!m.oos_tripped && oos_check(cfg.relays.oos, m.st.delta, isl.coi_delta)) {
                    m.oos_tripped = true;
                    oos_trips.push_back(m.id);
                }
            }
        }

        std::sort(branch_trips.begin(), branch_trips.end());
        std::sort(ofgt_trips.begin(), ofgt_trips.end());
        std::sort(oos_trips.begin(), oos_trips.end());

        bool topology_changed = false;
        for (BranchId bid : branch_trips) {
            Branch& br = net.branch(bid);
            br.in_service = false;
            const double mw = net.mw(std::abs(last_flows.count(bid) ? last_flows[bid] : 0.0));
            events.push_back({t, EventKind::branch_trip, bid, mw});
            topology_changed = true;
        }
        for (GenId gid : ofgt_trips) {
            Machine& m = machines[mach_by_id.at(gid)];
            if (!m.st.connected) continue;
            m.st.connected = false;
            net.generator(gid).in_service = false;
            events.push_back({t, EventKind::gen_trip_ofgt, gid, net.mw(m.st.p_mech)});
            topology_changed = true;
        }
        for (GenId gid : oos_trips) {
            Machine& m = machines[mach_by_id.at(gid)];
            if (!m.st.connected) continue;
            m.st.connected = false;
            net.generator(gid).in_service = false;
            events.push_back({t, EventKind::gen_trip_oos, gid, net.mw(m.st.p_mech)});
            topology_changed = true;
        }
        for (const Shed& s : sheds) {
            Island& isl = islands[s.island_idx];
            if (!isl.alive) continue;
            const double before = remaining_served_pu(isl);
            if (before <= 0.0) continue;
            const double frac = cfg.relays.ufls.stages[static_cast<size_t>(s.stage)].shed_fraction;
            for (int li : isl.lds) loads[li].served *= (1.0 - frac);
            events.push_back(
                {t, EventKind::load_shed_ufls, s.island_rep, net.mw(before * frac)});
        }

        if (topology_changed) rebuild_islands(t);
    }

    void step() {
        const double now = (step_count + 1) * cfg.dt;
        for (Island& isl : islands) {
            if (!isl.alive) continue;
            integrate_island(isl, now);
        }
        ++step_count;
        t = now;
        measure();
        process_relays();
    }

    CascadeResult make_result() const {
        CascadeResult r;
        double served = 0.0;
        for (const LoadItem& l : loads) served += l.served;
        r.demand_lost_mw = served <= 0.0 ? net.mw(total_demand_pu)
                                         : net.mw(total_demand_pu - served);
        r.blackout = served <= 0.0;
        r.diverged = diverged;
        r.events = events;
        std::sort(r.events.begin(), r.events.end());
        auto cascades = group_into_iterations(r.events);
        for (const auto& c : cascades)
            for (int cnt : c.iteration_counts) r.outages_per_iteration.push_back(cnt);
        return r;
    }
};

DynamicEngine::DynamicEngine(const Network& net, const DispatchResult& dispatch,
                             const DynConfig& cfg)
    : impl_(std::make_unique<Impl>(net, dispatch, cfg)) {}

DynamicEngine::~DynamicEngine() = default;
DynamicEngine::DynamicEngine(DynamicEngine&&) noexcept = default;
DynamicEngine& DynamicEngine::operator=(DynamicEngine&&) noexcept = default;

void DynamicEngine::apply_initial_outages(const std::set<BranchId>& outages) {
    if (outages.empty()) return;
    for (BranchId id : outages) impl_->net.branch(id); // existence check
    for (BranchId id : outages) {
        impl_->net.branch(id).in_service = false;
        impl_->events.push_back({0.0, EventKind::branch_trip, id, 0.0});
        impl_->overload.erase(id);
    }
    impl_->rebuild_islands(0.0);
    impl_->measure();
}

void DynamicEngine::step() { impl_->step(); }

void DynamicEngine::run() {
    const long steps = std::lround(impl_->cfg.t_end / impl_->cfg.dt);
    while (impl_->step_count < steps) {
        bool any_alive = false;
        for (const Island& isl : impl_->islands)
            if (isl.alive) any_alive = true;
        if (!any_alive) break;
        impl_->step();
    }
}

CascadeResult DynamicEngine::result() const { return impl_->make_result(); }
const Traces& DynamicEngine::traces() const { return impl_->traces; }
double DynamicEngine::time() const { return impl_->t; }

const MachineState& DynamicEngine::machine_state(GenId id) const {
    return impl_->machines[impl_->mach_by_id.at(id)].st;
}

double DynamicEngine::island_coi_omega(GenId member_gen) const {
    const Machine& m = impl_->machines[impl_->mach_by_id.at(member_gen)];
    for (const Island& isl : impl_->islands)
        if (isl.alive && isl.pos.count(m.bus)) return isl.coi_omega;
    throw Error("generator " + std::to_string(member_gen) + " not in a live island");
}

std::map<BranchId, double> DynamicEngine::current_flows() const { return impl_->last_flows; }
std::map<GenId, double> DynamicEngine::current_electrical_power() const { return impl_->last_pe; }

int DynamicEngine::live_island_count() const {
    int n = 0;
    for (const Island& isl : impl_->islands)
        if (isl.alive) ++n;
    return n;
}

CascadeResult run_dynamic_cascade(const Network& net, const DispatchResult& dispatch,
                                  const std::set<BranchId>& initial_outages,
                                  const DynConfig& cfg, Traces* traces_out) {
    DynamicEngine engine(net, dispatch, cfg);
    engine.apply_initial_outages(initial_outages);
    engine.run();
    if (traces_out) *traces_out = engine.traces();
    return engine.result();
}

} // namespace cascade
