#pragma once

#include <string>
#include <vector>

#include "cascade/network.hpp"

namespace cascade {

struct CaseOptions {
    /// Replacement (pu) for rateA = 0, which MATPOWER cases use for
    /// "unlimited". Flagged on the branch and warned about.
    double unlimited_rating_pu = 99.99;
};

/// Parses a MATPOWER-style plain-text case (mpc.baseMVA, mpc.bus, mpc.gen,
/// mpc.branch, mpc.gencost matrix blocks) into a validated per-unit Network.
/// Unknown columns are ignored; warnings are collected into `warnings` when
/// given. Throws MalformedCase on syntax or invariant violations.
Network load_case(const std::string& path, const CaseOptions& opts = {},
                  std::vector<std::string>* warnings = nullptr);

Network parse_case_text(const std::string& text, const CaseOptions& opts = {},
                        std::vector<std::string>* warnings = nullptr);

/// Applies a dynamic-data sidecar: plain text, one record per line,
///   gen=<id> inertia_h=<v> damping_d=<v> droop_r=<v> gov_tc=<v> xd_prime=<v>
///   load=<id> kf=<v>
/// '#' starts a comment. Unknown keys warn; values override case data and
/// take precedence over attach_dynamic_defaults. Throws InvalidDroop /
/// InvalidInertia on nonpositive values, MalformedCase on syntax errors.
void apply_dynamic_sidecar(Network& net, const std::string& path,
                           std::vector<std::string>* warnings = nullptr);

void apply_dynamic_sidecar_text(Network& net, const std::string& text,
                                std::vector<std::string>* warnings = nullptr);

} // namespace cascade
