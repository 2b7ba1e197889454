#pragma once

#include <cstdint>
#include <vector>

#include "multistop/family.hpp"
#include "multistop/stopping.hpp"
#include "multistop/tree.hpp"

namespace multistop {

// Deterministic generator with platform-independent draws (xorshift64*).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {
        for (int i = 0; i < 4; ++i) next();
    }

    std::uint64_t next() {
        state_ ^= state_ << 13;
        state_ ^= state_ >> 7;
        state_ ^= state_ << 17;
        return state_ * 0x2545f4914f6cdd1dull;
    }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; } // [0,1)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t below(std::uint64_t n) { return next() % n; }
    bool bernoulli(double p) { return uniform() < p; }

private:
    std::uint64_t state_;
};

// Random canonical strategy; joined with `floor` when given, so the result
// never stops earlier.
StoppingTime random_stopping_time(Rng& rng, const ScenarioTree& tree,
                                  const StoppingTime* floor = nullptr, double stop_prob = 0.4);

// Node values i.i.d. uniform on [-1,1] scaled by (1 + stage).
AdaptedFamily random_family(Rng& rng, const ScenarioTree& tree);

// Random subset of a node list.
std::vector<int> random_event(Rng& rng, const std::vector<int>& nodes, double keep_prob = 0.5);

// Random non-recombining binary tree: stages in [min_stages, max_stages],
// per-node branch probabilities in [0.15, 0.85], multiplicative node values.
ScenarioTree random_tree(Rng& rng, int min_stages, int max_stages);

} // namespace multistop
