#pragma once

#include <cstdint>
#include <vector>

#include "multistop/evaluation.hpp"
#include "multistop/family.hpp"

namespace multistop {

// Value family of the single optimal stopping problem over Bermudan
// strategies: the smallest supermartingale family (under the evaluation)
// dominating the reward, from one backward induction sweep.
struct SnellSolution {
    const ScenarioTree* tree = nullptr;
    AdaptedFamily value;                  // envelope u; u >= reward, u = reward at the terminal stage
    AdaptedFamily reward;                 // phi
    std::vector<std::uint8_t> stop_region; // |u - phi| <= tol*(1+|u|)
    double tol = 1e-9;

    // First entry into the stop region at-or-after S.
    StoppingTime optimal_from(const StoppingTime& S) const;
};

// Relative-absolute hybrid used for the stop-region membership.
inline bool envelope_touches(double u, double phi, double tol) {
    const double gap = u - phi;
    return (gap < 0 ? -gap : gap) <= tol * (1.0 + (u < 0 ? -u : u));
}

SnellSolution snell_envelope(const ScenarioTree& tree, const Evaluation& ev,
                             const AdaptedFamily& reward, double tol = 1e-9);

// Same backward induction restricted to the subtree of `root`. Entries of
// `reward` outside the subtree are ignored; value/stop_region are only
// meaningful inside it.
SnellSolution snell_envelope_below(const ScenarioTree& tree, const Evaluation& ev,
                                   const AdaptedFamily& reward, int root, double tol = 1e-9);

// Plug-in check: evaluates the reward at the solution's optimal stopping time
// from S and returns the largest deviation from the envelope on S's frontier.
double verify_snell_optimality(const Evaluation& ev, const SnellSolution& sol,
                               const StoppingTime& S);

} // namespace multistop
