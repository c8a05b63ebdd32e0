#include "cascade/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>

namespace cascade {

double edns(const std::vector<std::pair<double, double>>& prob_impact) {
    if (prob_impact.empty()) throw EmptySet("edns: no scenarios");
    double sum = 0.0;
    for (const auto& [p, impact] : prob_impact) sum += p * impact;
    return sum;
}

double edns_uniform(const std::vector<double>& losses) {
    if (losses.empty()) throw EmptySet("edns: no scenarios");
    double sum = 0.0;
    for (double l : losses) sum += l;
    return sum / static_cast<double>(losses.size());
}

double var_alpha(std::vector<double> samples, double alpha) {
    if (samples.empty()) throw EmptySet("var_alpha: no samples");
    if (!(alpha > 0.0 && alpha < 1.0)) throw BadAlpha("alpha must be in (0,1)");
    std::sort(samples.begin(), samples.end());
    const auto n = samples.size();
    // smallest x with CDF(x) = rank/n >= alpha
    for (size_t i = 0; i < n; ++i) {
        const double cdf = static_cast<double>(i + 1) / static_cast<double>(n);
        if (cdf >= alpha - 1e-15) return samples[i];
    }
    return samples.back();
}

double cvar_alpha(std::vector<double> samples, double alpha) {
    const double var = var_alpha(samples, alpha);
    double sum = 0.0;
    size_t count = 0;
    for (double x : samples) {
        if (x >= var) {
            sum += x;
            ++count;
        }
    }
    return sum / static_cast<double>(count);
}

std::vector<Cascade> group_into_iterations(const std::vector<EventRecord>& events,
                                           double iteration_gap, double cascade_gap,
                                           bool ordinal) {
    std::vector<EventRecord> outages;
    for (const EventRecord& ev : events)
        if (ev.kind == EventKind::branch_trip) outages.push_back(ev);
    std::sort(outages.begin(), outages.end());

    std::vector<Cascade> cascades;
    for (size_t i = 0; i < outages.size(); ++i) {
        bool new_cascade = cascades.empty();
        bool new_iteration = new_cascade;
        if (!new_cascade) {
            const double gap = outages[i].time - outages[i - 1].time;
            if (ordinal) {
                new_iteration = gap > 0.0;
            } else if (gap >= cascade_gap) {
                new_cascade = new_iteration = true;
            } else if (gap >= iteration_gap) {
                new_iteration = true;
            }
        }
        if (new_cascade) cascades.emplace_back();
        if (new_iteration) cascades.back().iterations.emplace_back();
        cascades.back().iterations.back().push_back(outages[i].element);
        cascades.back().ordered.push_back(outages[i].element);
    }
    for (Cascade& c : cascades)
        for (const auto& it : c.iterations)
            c.iteration_counts.push_back(static_cast<int>(it.size()));
    return cascades;
}

std::vector<double> z_series(const std::vector<Cascade>& cascades) {
    size_t longest = 0;
    for (const Cascade& c : cascades) longest = std::max(longest, c.iterations.size());
    std::vector<double> z(longest, 0.0);
    if (cascades.empty()) return z;
    for (const Cascade& c : cascades)
        for (size_t k = 0; k < c.iterations.size(); ++k)
            z[k] += static_cast<double>(c.iterations[k].size());
    for (double& v : z) v /= static_cast<double>(cascades.size());
    return z;
}

std::vector<double> lambda_series(const std::vector<Cascade>& cascades) {
    const std::vector<double> z = z_series(cascades);
    std::vector<double> lambda;
    for (size_t k = 1; k < z.size(); ++k) {
        if (z[k - 1] <= 0.0) break;
        lambda.push_back(z[k] / z[k - 1]);
    }
    return lambda;
}

namespace {

struct BusGraph {
    std::unordered_map<BusId, std::vector<BusId>> adj;

    explicit BusGraph(const Network& net) {
        for (const Branch& br : net.branches) {
            if (!br.in_service) continue;
            adj[br.from_bus].push_back(br.to_bus);
            adj[br.to_bus].push_back(br.from_bus);
        }
    }

    /// BFS edge distances from `source`; unreachable buses are absent.
    std::unordered_map<BusId, int> bfs(BusId source) const {
        std::unordered_map<BusId, int> dist;
        dist[source] = 0;
        std::deque<BusId> queue{source};
        while (!queue.empty()) {
            const BusId u = queue.front();
            queue.pop_front();
            auto it = adj.find(u);
            if (it == adj.end()) continue;
            for (BusId v : it->second) {
                if (!dist.count(v)) {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        return dist;
    }
};

int pair_distance(const Network& net, const BusGraph& graph,
                  std::map<BusId, std::unordered_map<BusId, int>>& cache, BranchId li,
                  BranchId lj) {
    if (li == lj) return 0;
    const Branch& a = net.branch(li);
    const Branch& b = net.branch(lj);
    int best = -1;
    for (BusId src : {a.from_bus, a.to_bus}) {
        auto it = cache.find(src);
        if (it == cache.end()) it = cache.emplace(src, graph.bfs(src)).first;
        for (BusId dst : {b.from_bus, b.to_bus}) {
            auto d = it->second.find(dst);
            if (d != it->second.end()) {
                const int cand = d->second + 1;
                if (best < 0 || cand < best) best = cand;
            }
        }
    }
    return best;
}

} // namespace

int line_distance(const Network& net, BranchId li, BranchId lj) {
    BusGraph graph(net);
    std::map<BusId, std::unordered_map<BusId, int>> cache;
    return pair_distance(net, graph, cache, li, lj);
}

std::map<int, int> distance_histogram(const Network& net,
                                      const std::vector<Cascade>& cascades) {
    BusGraph graph(net);
    std::map<BusId, std::unordered_map<BusId, int>> cache;
    std::map<int, int> hist;
    for (const Cascade& c : cascades) {
        for (size_t i = 1; i < c.ordered.size(); ++i)
            ++hist[pair_distance(net, graph, cache, c.ordered[i - 1], c.ordered[i])];
    }
    return hist;
}

std::vector<std::pair<double, double>> ccdf(std::vector<double> samples) {
    if (samples.empty()) throw EmptySet("ccdf: no samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    std::vector<std::pair<double, double>> points;
    for (size_t i = 0; i < samples.size(); ++i) {
        if (i == 0 || samples[i] != samples[i - 1]) {
            // P(X >= x) = fraction of samples at or above this value
            points.emplace_back(samples[i], static_cast<double>(samples.size() - i) / n);
        }
    }
    return points;
}

} // namespace cascade
