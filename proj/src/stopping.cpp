#include "multistop/stopping.hpp"

#include <algorithm>

namespace multistop {

StoppingTime::StoppingTime(const ScenarioTree& tree, std::vector<std::uint8_t> raw_marks)
    : tree_(&tree), stop_(std::move(raw_marks)) {
    if (stop_.size() != tree.size()) throw SpecError("mark vector size does not match the tree");
    canonicalize();
}

void StoppingTime::canonicalize() {
    // Node indices are topological, so one forward sweep closes the marks.
    const int n = tree_->stages();
    for (std::size_t m = 0; m < stop_.size(); ++m) {
        const TreeNode& node = tree_->node(static_cast<int>(m));
        if (node.stage == n) stop_[m] = 1;
        if (node.parent >= 0 && stop_[static_cast<std::size_t>(node.parent)]) stop_[m] = 1;
        stop_[m] = stop_[m] ? 1 : 0;
    }
}

StoppingTime StoppingTime::at_stage(const ScenarioTree& tree, int k) {
    if (k < 0 || k > tree.stages()) throw SpecError("stage out of range for constant stopping time");
    StoppingTime t(tree);
    for (std::size_t m = 0; m < tree.size(); ++m)
        t.stop_[m] = tree.node(static_cast<int>(m)).stage >= k ? 1 : 0;
    return t;
}

StoppingTime StoppingTime::at_subtree(const ScenarioTree& tree, int node) {
    StoppingTime t(tree);
    const int n = tree.stages();
    for (std::size_t m = 0; m < tree.size(); ++m) {
        const TreeNode& cur = tree.node(static_cast<int>(m));
        const bool inside =
            cur.stage >= tree.node(node).stage &&
            tree.ancestor_at(static_cast<int>(m), tree.node(node).stage) == node;
        t.stop_[m] = (inside || cur.stage == n) ? 1 : 0;
    }
    t.canonicalize();
    return t;
}

bool StoppingTime::is_frontier(int m) const {
    if (!stops_at(m)) return false;
    const int parent = tree_->node(m).parent;
    return parent < 0 || !stops_at(parent);
}

std::vector<int> StoppingTime::frontier() const {
    std::vector<int> out;
    for (std::size_t m = 0; m < stop_.size(); ++m)
        if (is_frontier(static_cast<int>(m))) out.push_back(static_cast<int>(m));
    return out;
}

int StoppingTime::stop_stage_at(int m) const {
    if (!stops_at(m)) return -1;
    int idx = m;
    while (!is_frontier(idx)) idx = tree_->node(idx).parent;
    return tree_->node(idx).stage;
}

void StoppingTime::require_same_tree(const StoppingTime& other) const {
    if (tree_ != other.tree_) throw SpecError("stopping times live on different trees");
}

StoppingTime meet(const StoppingTime& a, const StoppingTime& b) {
    a.require_same_tree(b);
    StoppingTime out(*a.tree_);
    for (std::size_t m = 0; m < out.stop_.size(); ++m)
        out.stop_[m] = (a.stop_[m] | b.stop_[m]);
    return out;
}

StoppingTime join(const StoppingTime& a, const StoppingTime& b) {
    a.require_same_tree(b);
    StoppingTime out(*a.tree_);
    for (std::size_t m = 0; m < out.stop_.size(); ++m)
        out.stop_[m] = (a.stop_[m] & b.stop_[m]);
    return out;
}

bool pathwise_leq(const StoppingTime& a, const StoppingTime& b) {
    a.require_same_tree(b);
    // a stops no later than b iff a's marks contain b's.
    for (std::size_t m = 0; m < a.stop_.size(); ++m)
        if (b.stop_[m] && !a.stop_[m]) return false;
    return true;
}

StoppingTime paste_at(const StoppingTime& S, const std::vector<int>& event,
                      const StoppingTime& tau, const StoppingTime& tau2) {
    S.require_same_tree(tau);
    S.require_same_tree(tau2);
    if (!pathwise_leq(S, tau) || !pathwise_leq(S, tau2))
        throw SpecError("paste_at requires both strategies >= the splitting time");
    for (int a : event)
        if (!S.is_frontier(a)) throw SpecError("paste event is not measurable at the splitting time");

    const ScenarioTree& tree = S.tree();
    std::vector<std::uint8_t> in_event(tree.size(), 0);
    for (int a : event) in_event[static_cast<std::size_t>(a)] = 1;
    // Propagate event membership down the subtrees.
    for (std::size_t m = 0; m < tree.size(); ++m) {
        const int parent = tree.node(static_cast<int>(m)).parent;
        if (parent >= 0 && in_event[static_cast<std::size_t>(parent)]) in_event[m] = 1;
    }

    std::vector<std::uint8_t> marks(tree.size(), 0);
    for (std::size_t m = 0; m < tree.size(); ++m)
        marks[m] = in_event[m] ? tau.stop_[m] : tau2.stop_[m];
    return StoppingTime(tree, std::move(marks));
}

StoppingTime paste(const StoppingTime& tau, const StoppingTime& tau2,
                   const std::vector<int>& event) {
    return paste_at(meet(tau, tau2), event, tau, tau2);
}

StoppingTime first_hitting(const StoppingTime& S, const std::function<bool(int)>& hit) {
    const ScenarioTree& tree = S.tree();
    StoppingTime out(tree);
    const int n = tree.stages();
    for (std::size_t m = 0; m < tree.size(); ++m) {
        const TreeNode& node = tree.node(static_cast<int>(m));
        const bool already =
            node.parent >= 0 && out.stop_[static_cast<std::size_t>(node.parent)];
        const bool candidate = S.stops_at(static_cast<int>(m)); // at-or-after S
        out.stop_[m] =
            (already || (candidate && (node.stage == n || hit(static_cast<int>(m))))) ? 1 : 0;
    }
    return out;
}

} // namespace multistop
