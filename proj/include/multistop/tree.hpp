#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "multistop/errors.hpp"

namespace multistop {

// Grid of exercise dates t_0 < t_1 < ... < t_n with t_0 = 0. Stage k of the
// tree lives at date t_k; t_n is the terminal horizon.
struct BermudanGrid {
    std::vector<double> dates;

    int stages() const { return static_cast<int>(dates.size()) - 1; }
    double date(int k) const { return dates[static_cast<std::size_t>(k)]; }
    double dt(int k) const { return dates[static_cast<std::size_t>(k) + 1] - dates[static_cast<std::size_t>(k)]; }
    double horizon() const { return dates.back(); }
    bool equidistant(double tol = 1e-12) const;

    static BermudanGrid uniform(int n, double step = 1.0);
    void validate() const;
};

struct TreeNode {
    std::string id;
    int stage = 0;
    int parent = -1;               // node index; -1 for the root
    double value = 0.0;            // per-node scalar (price / payoff base)
    std::vector<int> children;     // node indices, stage+1
    std::vector<double> child_probs; // strictly positive, sum to 1
};

// Finite filtered probability space: the stage-k nodes are the atoms of the
// stage-k sigma-algebra. Non-recombining by construction; immutable once built.
class ScenarioTree {
public:
    static constexpr std::size_t kDefaultNodeBudget = std::size_t{1} << 16;

    // Explicit node list. Nodes may arrive in any order; they are stored
    // sorted by (stage, insertion order) so parents precede children.
    struct NodeSpec {
        std::string id;
        int stage = 0;
        std::string parent; // empty for root
        double p = 1.0;     // one-step probability of reaching this node from parent
        double value = 0.0;
    };
    static ScenarioTree from_nodes(BermudanGrid grid, const std::vector<NodeSpec>& specs,
                                   std::size_t node_budget = kDefaultNodeBudget);

    // Full non-recombining binomial expansion: 2^n leaves, child values
    // parent*up / parent*down with probabilities p / 1-p.
    static ScenarioTree binomial(int n, double p, double root_value, double up, double down,
                                 std::vector<double> dates = {},
                                 std::size_t node_budget = kDefaultNodeBudget);

    // Single-branch chain (every node has one child), probabilities 1.
    static ScenarioTree chain(std::vector<double> values, std::vector<double> dates = {});

    const BermudanGrid& grid() const { return grid_; }
    int stages() const { return grid_.stages(); }
    std::size_t size() const { return nodes_.size(); }
    int root() const { return 0; }
    const TreeNode& node(int m) const { return nodes_[static_cast<std::size_t>(m)]; }
    bool is_terminal(int m) const { return node(m).stage == stages(); }

    int index_of(const std::string& id) const;       // SpecError if unknown
    const std::vector<int>& leaves() const { return leaves_; }

    // Unique stage-k ancestor of m (m itself when k == stage(m)).
    int ancestor_at(int m, int k) const;

    // Probability of the path from the root to m.
    double path_probability(int m) const { return path_prob_[static_cast<std::size_t>(m)]; }
    double min_leaf_probability() const;

    // 1 for nodes in the subtree of `root` (inclusive), 0 elsewhere.
    std::vector<std::uint8_t> subtree_mask(int root) const;

    // Node indices are topological: parent < child, stages non-decreasing.
    // Backward passes iterate indices in reverse.

private:
    ScenarioTree() = default;
    void finalize(std::size_t node_budget); // validates + computes caches

    BermudanGrid grid_;
    std::vector<TreeNode> nodes_;
    std::vector<int> leaves_;
    std::vector<double> path_prob_;
    std::unordered_map<std::string, int> by_id_;
};

} // namespace multistop
