#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "multistop/tree.hpp"

namespace multistop {

// Bermudan stopping strategy as node marks. Canonical form: the mark set is
// closed under descendants and every terminal node is marked, so a path stops
// at its first marked node and two strategies are pathwise equal iff their
// mark vectors are equal. Under this encoding the pathwise minimum of two
// strategies is the union of their marks and the maximum is the intersection.
class StoppingTime {
public:
    StoppingTime(const ScenarioTree& tree, std::vector<std::uint8_t> raw_marks);

    // Stop at the first node of stage k on every path (k == stages(): stop at T).
    static StoppingTime at_stage(const ScenarioTree& tree, int k);
    // Stop on entering the subtree of `node`; elsewhere stop at the terminal stage.
    static StoppingTime at_subtree(const ScenarioTree& tree, int node);

    const ScenarioTree& tree() const { return *tree_; }
    bool stops_at(int m) const { return stop_[static_cast<std::size_t>(m)] != 0; }
    // First stop on the path through m: m is marked and its parent is not.
    bool is_frontier(int m) const;
    std::vector<int> frontier() const;

    // Stage at which this strategy stops along the path from the root to m,
    // or -1 when it has not stopped at-or-before m.
    int stop_stage_at(int m) const;

    bool operator==(const StoppingTime& other) const { return stop_ == other.stop_; }

    friend StoppingTime meet(const StoppingTime& a, const StoppingTime& b);
    friend StoppingTime join(const StoppingTime& a, const StoppingTime& b);
    friend bool pathwise_leq(const StoppingTime& a, const StoppingTime& b);
    friend StoppingTime paste(const StoppingTime& tau, const StoppingTime& tau2,
                              const std::vector<int>& event);
    friend StoppingTime paste_at(const StoppingTime& S, const std::vector<int>& event,
                                 const StoppingTime& tau, const StoppingTime& tau2);
    friend StoppingTime first_hitting(const StoppingTime& S,
                                      const std::function<bool(int)>& hit);

private:
    StoppingTime(const ScenarioTree& tree) : tree_(&tree), stop_(tree.size(), 0) {}
    void canonicalize();           // close marks under descendants, mark terminals
    void require_same_tree(const StoppingTime& other) const;

    const ScenarioTree* tree_;
    std::vector<std::uint8_t> stop_;
};

// Pathwise min / max; both stay in the strategy set.
StoppingTime meet(const StoppingTime& a, const StoppingTime& b);
StoppingTime join(const StoppingTime& a, const StoppingTime& b);

// a(omega) <= b(omega) on every path.
bool pathwise_leq(const StoppingTime& a, const StoppingTime& b);

// Concatenation: follow tau on paths through `event`, tau2 elsewhere.
// `event` must be a set of nodes at which meet(tau, tau2) stops.
StoppingTime paste(const StoppingTime& tau, const StoppingTime& tau2,
                   const std::vector<int>& event);

// Generalized concatenation at an earlier frontier: `event` is a set of
// S-frontier nodes and both tau, tau2 are >= S. Result follows tau inside the
// event subtrees and tau2 elsewhere.
StoppingTime paste_at(const StoppingTime& S, const std::vector<int>& event,
                      const StoppingTime& tau, const StoppingTime& tau2);

// First node at-or-after S's stop where `hit` holds, terminal stage otherwise.
StoppingTime first_hitting(const StoppingTime& S, const std::function<bool(int)>& hit);

} // namespace multistop
