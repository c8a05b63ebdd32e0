#pragma once

#include <map>
#include <set>

#include "cascade/events.hpp"
#include "cascade/network.hpp"

namespace cascade {

struct QssOptions {
    double overload_tol = 1e-6; // trips require |flow| > rating * (1 + tol)
    double voll = 1e4;
};

/// Branches with |flow| strictly above rating * (1 + tol).
std::set<BranchId> overloaded_set(const std::map<BranchId, double>& flows,
                                  const Network& net, double tol = 1e-6);

/// Quasi-steady-state cascade: iterate island detection, per-island balance
/// redispatch with shedding, DC flow computation, and simultaneous tripping
/// of every overloaded line, until no further overload occurs or no live
/// island remains. Event times are ordinal iteration numbers. Deterministic.
CascadeResult run_static_cascade(const Network& net, const std::set<BranchId>& initial_outages,
                                 const QssOptions& opts = {});

} // namespace cascade
