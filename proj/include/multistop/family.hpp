#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "multistop/stopping.hpp"
#include "multistop/tree.hpp"

namespace multistop {

// One value per node; the computational form of a family indexed by stopping
// times (the value of the family at tau is the node value where tau stops).
using AdaptedFamily = std::vector<double>;

// Node values of the tree itself, as a family.
AdaptedFamily node_values(const ScenarioTree& tree);

// max(value - strike, 0) per node.
AdaptedFamily call_payoff(const ScenarioTree& tree, double strike);

// Reward for a d-fold exercise plan. eval(m, stages) is the payoff when the
// exercises happen at the given stages along the path through m, with
// max(stages) == stage(m); measurability at the latest exercise holds by
// construction. Slots are 0-based. Families built by the named constructors
// keep a reference to the tree, which must outlive them.
class PayoffFamily {
public:
    using EvalFn = std::function<double(int node, std::span<const int> stages)>;

    PayoffFamily(int d, EvalFn eval, bool symmetric, bool additive, bool multiplicative);

    // psi = sum_i eta(exercise node i).
    static PayoffFamily additive(const ScenarioTree& tree, AdaptedFamily eta, int d);
    // psi = sum_i w_i * eta(exercise node i); asymmetric when weights differ.
    static PayoffFamily weighted_additive(const ScenarioTree& tree, AdaptedFamily eta,
                                          std::vector<double> weights);
    // psi = prod_i eta(exercise node i), eta >= 0.
    static PayoffFamily multiplicative(const ScenarioTree& tree, AdaptedFamily eta, int d);
    static PayoffFamily constant(double c, int d);
    // Explicit (node, stage-tuple) -> value table; missing entries are an error.
    struct TableEntry {
        int node = 0;
        std::vector<int> stages;
        double value = 0.0;
    };
    static PayoffFamily table(const ScenarioTree& tree, int d, std::vector<TableEntry> entries,
                              bool symmetric);
    // Deterministic pseudo-random total table driven by a seed; generally asymmetric.
    static PayoffFamily random_table(const ScenarioTree& tree, int d, std::uint64_t seed);

    double operator()(int node, std::span<const int> stages) const;

    int d() const { return d_; }
    bool symmetric() const { return symmetric_; }
    bool additive() const { return additive_; }
    bool multiplicative() const { return multiplicative_; }

    // View with `slot` exercised at a fixed stage; one slot fewer.
    PayoffFamily freeze(int slot, int stage) const;

    // Value of psi at a tuple of stopping times, as eta values on the join's
    // stop frontier (entries elsewhere are NaN).
    friend std::vector<double> payoff_at(const PayoffFamily& psi,
                                         const std::vector<StoppingTime>& tuple);

private:
    int d_;
    EvalFn eval_;
    bool symmetric_;
    bool additive_;
    bool multiplicative_;
};

std::vector<double> payoff_at(const PayoffFamily& psi, const std::vector<StoppingTime>& tuple);

} // namespace multistop
