#pragma once

#include <map>
#include <utility>
#include <vector>

#include "cascade/events.hpp"
#include "cascade/network.hpp"

namespace cascade {

/// Expected demand not served: sum of P(s) * I(s). Throws EmptySet.
double edns(const std::vector<std::pair<double, double>>& prob_impact);

/// Sample-mean EDNS for uniform scenario probabilities.
double edns_uniform(const std::vector<double>& losses);

/// min{ x : empirical CDF(x) >= alpha }. Throws BadAlpha / EmptySet.
double var_alpha(std::vector<double> samples, double alpha);

/// Mean of samples >= VaR_alpha. Throws BadAlpha / EmptySet.
double cvar_alpha(std::vector<double> samples, double alpha);

/// One cascade: branch outages grouped into iterations.
struct Cascade {
    std::vector<std::vector<BranchId>> iterations; // branch ids, time order

    std::vector<int> iteration_counts;             // sizes of `iterations`
    std::vector<BranchId> ordered;                 // all outages, time order
};

/// Groups time-sorted branch-outage events: successive outages with gap <
/// iteration_gap share an iteration; gap >= cascade_gap starts a new
/// cascade. With ordinal = true (static engine logs) the timestamps are
/// iteration ordinals: equal times share an iteration, one cascade total.
std::vector<Cascade> group_into_iterations(const std::vector<EventRecord>& events,
                                           double iteration_gap = 60.0,
                                           double cascade_gap = 3600.0,
                                           bool ordinal = false);

/// z_k: mean outage count at iteration k across cascades (shorter cascades
/// contribute 0). Length is the longest cascade.
std::vector<double> z_series(const std::vector<Cascade>& cascades);

/// lambda_k = z_{k+1} / z_k, truncated at the first zero z_k.
std::vector<double> lambda_series(const std::vector<Cascade>& cascades);

/// Network distance d^bus between two lines on the pre-cascade graph:
/// 0 for the same line, otherwise min over endpoint pairs of
/// shortest-path-edge-count + 1. Returns -1 when disconnected (infinity).
int line_distance(const Network& net, BranchId li, BranchId lj);

/// Histogram of d^bus over successive outage pairs within each cascade.
/// Key -1 collects disconnected pairs.
std::map<int, int> distance_histogram(const Network& net, const std::vector<Cascade>& cascades);

/// (x, P(X >= x)) at each distinct sample value, ascending in x.
std::vector<std::pair<double, double>> ccdf(std::vector<double> samples);

} // namespace cascade
