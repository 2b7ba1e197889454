#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "multistop/evaluation.hpp"
#include "multistop/family.hpp"

namespace multistop {

struct EnumerationBudget {
    std::size_t max_stopping_times = 4096;
    std::size_t max_tuples = 1000000;
};

// Every Bermudan strategy >= S in canonical form, in a fixed deterministic
// order (stop-first, children left to right).
std::vector<StoppingTime> enumerate_stopping_times(const ScenarioTree& tree, const StoppingTime& S,
                                                   const EnumerationBudget& budget = {});

// Count without materializing (saturates at budget overflow checks).
std::size_t count_stopping_times(const ScenarioTree& tree, const StoppingTime& S,
                                 const EnumerationBudget& budget = {});

// Ground truth by exhaustion: max over all d-tuples of strategies >= S of the
// evaluation of the reward at the tuple, node-wise at S's stop frontier.
struct OracleResult {
    std::vector<int> frontier;                       // S's stop frontier
    std::vector<double> value;                       // max per frontier node (aligned)
    std::vector<std::vector<std::vector<int>>> argmax; // per frontier node: tuples (strategy indices), capped
    std::vector<std::size_t> argmax_count;           // total ties per frontier node
    std::size_t tuple_count = 0;
    std::size_t strategy_count = 0;
};

OracleResult brute_force_value(const ScenarioTree& tree, const Evaluation& ev,
                               const PayoffFamily& psi, int d, const StoppingTime& S,
                               const EnumerationBudget& budget = {},
                               std::size_t max_argmax_per_node = 16);

// For pairs of tuples, pastes them on the event where the first dominates and
// asserts the pasted plan evaluates to the node-wise maximum, exactly.
struct DirectedUpwardsReport {
    bool pass = true;
    std::size_t pairs_checked = 0;
    std::string counterexample;
};

DirectedUpwardsReport check_directed_upwards(const ScenarioTree& tree, const Evaluation& ev,
                                             const PayoffFamily& psi, int d, const StoppingTime& S,
                                             std::size_t samples, std::uint64_t seed,
                                             const EnumerationBudget& budget = {});

} // namespace multistop
