#pragma once

#include <cmath>
#include <vector>

namespace cascade {

/// Inverse-time thermal overload relay. Linear-in-overload accumulator with
/// symmetric decay: trip time K/(m-1) for constant loading m > 1.
struct OverloadRelaySettings {
    double threshold_k = 10.0; // s * pu
};

struct OverloadRelayState {
    double accumulator = 0.0;
    bool tripped = false;

    /// loading_m = |flow| / rating. Returns true exactly once, at the update
    /// where the accumulator reaches the threshold.
    bool update(double loading_m, double dt, const OverloadRelaySettings& s) {
        if (tripped) return false;
        if (loading_m > 1.0)
            accumulator += (loading_m - 1.0) * dt;
        else
            accumulator = std::max(0.0, accumulator - (1.0 - loading_m) * dt);
        if (accumulator >= s.threshold_k) {
            tripped = true;
            return true;
        }
        return false;
    }
};

struct UflsStage {
    double freq_threshold; // pu of nominal
    double shed_fraction;  // of remaining served island load
    double delay;          // seconds of continuous violation
};

struct UflsScheme {
    std::vector<UflsStage> stages; // thresholds strictly decreasing

    static UflsScheme default_scheme() {
        return {{{0.9883, 0.15, 0.1}, {0.9833, 0.15, 0.1}, {0.9783, 0.15, 0.1}}};
    }
};

/// Per-island UFLS timers and latches. Copied into child islands on
/// separation so a stage still fires at most once along any island lineage.
struct UflsState {
    std::vector<double> timers;
    std::vector<bool> fired;

    void reset(size_t n_stages) {
        timers.assign(n_stages, 0.0);
        fired.assign(n_stages, false);
    }

    /// Returns indices of stages firing at this step, in stage order.
    std::vector<int> evaluate(const UflsScheme& scheme, double freq_pu, double dt) {
        if (timers.size() != scheme.stages.size()) reset(scheme.stages.size());
        std::vector<int> firing;
        for (size_t i = 0; i < scheme.stages.size(); ++i) {
            if (fired[i]) continue;
            if (freq_pu < scheme.stages[i].freq_threshold) {
                timers[i] += dt;
                if (timers[i] >= scheme.stages[i].delay - 1e-12) {
                    fired[i] = true;
                    firing.push_back(static_cast<int>(i));
                }
            } else {
                timers[i] = 0.0;
            }
        }
        return firing;
    }
};

struct OfgtSetting {
    double freq_threshold = 1.03; // pu
    double delay = 0.5;           // s
};

struct OfgtState {
    double timer = 0.0;
    bool tripped = false;

    bool update(const OfgtSetting& s, double omega, double dt) {
        if (tripped) return false;
        if (1.0 + omega > s.freq_threshold) {
            timer += dt;
            if (timer >= s.delay - 1e-12) {
                tripped = true;
                return true;
            }
        } else {
            timer = 0.0;
        }
        return false;
    }
};

struct OosSetting {
    double angle_limit = M_PI; // radians from island COI, unwrapped
};

inline bool oos_check(const OosSetting& s, double delta, double coi_delta) {
    return std::abs(delta - coi_delta) > s.angle_limit;
}

struct RelaySettings {
    OverloadRelaySettings overload;
    UflsScheme ufls = UflsScheme::default_scheme();
    OfgtSetting ofgt;
    OosSetting oos;
};

} // namespace cascade
