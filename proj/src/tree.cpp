#include "multistop/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace multistop {

namespace {

constexpr double kProbSumTol = 1e-12;

std::string describe(const std::string& what, const std::string& id) {
    return what + " (node '" + id + "')";
}

} // namespace

BermudanGrid BermudanGrid::uniform(int n, double step) {
    BermudanGrid g;
    g.dates.resize(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) g.dates[static_cast<std::size_t>(k)] = step * k;
    return g;
}

bool BermudanGrid::equidistant(double tol) const {
    if (stages() < 1) return true;
    const double step = dt(0);
    for (int k = 1; k < stages(); ++k)
        if (std::fabs(dt(k) - step) > tol) return false;
    return true;
}

void BermudanGrid::validate() const {
    if (dates.size() < 2) throw SpecError("grid needs at least two dates (t_0 and T)");
    if (dates.front() != 0.0) throw SpecError("grid must start at t_0 = 0");
    for (std::size_t k = 1; k < dates.size(); ++k)
        if (!(dates[k] > dates[k - 1]))
            throw SpecError("grid dates must be strictly increasing");
}

ScenarioTree ScenarioTree::from_nodes(BermudanGrid grid, const std::vector<NodeSpec>& specs,
                                      std::size_t node_budget) {
    grid.validate();
    if (specs.empty()) throw SpecError("empty node list");
    if (specs.size() > node_budget) {
        std::ostringstream os;
        os << "node budget exceeded: " << specs.size() << " nodes > budget " << node_budget;
        throw BudgetError(os.str());
    }

    ScenarioTree tree;
    tree.grid_ = std::move(grid);

    // Stable sort by stage so parents land before children.
    std::vector<std::size_t> order(specs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return specs[a].stage < specs[b].stage;
    });

    tree.nodes_.reserve(specs.size());
    for (std::size_t pos : order) {
        const NodeSpec& s = specs[pos];
        if (s.id.empty()) throw SpecError("node with empty id");
        if (s.stage < 0 || s.stage > tree.grid_.stages())
            throw SpecError(describe("stage out of grid range", s.id));
        if (tree.by_id_.count(s.id)) throw SpecError(describe("duplicate node id", s.id));

        TreeNode n;
        n.id = s.id;
        n.stage = s.stage;
        n.value = s.value;
        if (s.parent.empty()) {
            if (s.stage != 0) throw SpecError(describe("parentless node must be at stage 0", s.id));
            n.parent = -1;
        } else {
            auto it = tree.by_id_.find(s.parent);
            if (it == tree.by_id_.end())
                throw SpecError(describe("parent '" + s.parent + "' unknown or out of order", s.id));
            n.parent = it->second;
            const TreeNode& par = tree.nodes_[static_cast<std::size_t>(n.parent)];
            if (par.stage + 1 != n.stage)
                throw SpecError(describe("child stage must be parent stage + 1", s.id));
            if (!(s.p > 0.0) || !std::isfinite(s.p))
                throw SpecError(describe("one-step probability must be strictly positive", s.id));
            tree.nodes_[static_cast<std::size_t>(n.parent)].children.push_back(
                static_cast<int>(tree.nodes_.size()));
            tree.nodes_[static_cast<std::size_t>(n.parent)].child_probs.push_back(s.p);
        }
        tree.by_id_.emplace(n.id, static_cast<int>(tree.nodes_.size()));
        tree.nodes_.push_back(std::move(n));
    }

    tree.finalize(node_budget);
    return tree;
}

ScenarioTree ScenarioTree::binomial(int n, double p, double root_value, double up, double down,
                                    std::vector<double> dates, std::size_t node_budget) {
    if (n < 1) throw SpecError("binomial generator needs n >= 1");
    if (!(p > 0.0 && p < 1.0)) throw SpecError("binomial probability must lie in (0,1)");
    if (!(up > 0.0) || !(down > 0.0)) throw SpecError("binomial factors must be positive");
    const std::size_t count = (std::size_t{1} << (n + 1)) - 1;
    if (count > node_budget) {
        std::ostringstream os;
        os << "binomial expansion needs " << count << " nodes > budget " << node_budget
           << " (non-recombining; lower n or raise the budget)";
        throw BudgetError(os.str());
    }

    ScenarioTree tree;
    if (dates.empty()) {
        tree.grid_ = BermudanGrid::uniform(n);
    } else {
        tree.grid_.dates = std::move(dates);
        tree.grid_.validate();
        if (tree.grid_.stages() != n) throw SpecError("grid has a different stage count than n");
    }

    tree.nodes_.reserve(count);
    TreeNode root;
    root.id = "0";
    root.stage = 0;
    root.value = root_value;
    tree.nodes_.push_back(root);
    tree.by_id_.emplace("0", 0);

    // Breadth-first expansion; ids encode the up/down path ("0u", "0ud", ...).
    for (std::size_t m = 0; m < tree.nodes_.size(); ++m) {
        if (tree.nodes_[m].stage == n) continue;
        for (int branch = 0; branch < 2; ++branch) {
            TreeNode child;
            child.id = tree.nodes_[m].id + (branch == 0 ? "u" : "d");
            child.stage = tree.nodes_[m].stage + 1;
            child.parent = static_cast<int>(m);
            child.value = tree.nodes_[m].value * (branch == 0 ? up : down);
            tree.nodes_[m].children.push_back(static_cast<int>(tree.nodes_.size()));
            tree.nodes_[m].child_probs.push_back(branch == 0 ? p : 1.0 - p);
            tree.by_id_.emplace(child.id, static_cast<int>(tree.nodes_.size()));
            tree.nodes_.push_back(std::move(child));
        }
    }

    tree.finalize(node_budget);
    return tree;
}

ScenarioTree ScenarioTree::chain(std::vector<double> values, std::vector<double> dates) {
    if (values.size() < 2) throw SpecError("chain needs at least two stages of values");
    const int n = static_cast<int>(values.size()) - 1;

    ScenarioTree tree;
    if (dates.empty()) {
        tree.grid_ = BermudanGrid::uniform(n);
    } else {
        tree.grid_.dates = std::move(dates);
        tree.grid_.validate();
        if (tree.grid_.stages() != n) throw SpecError("grid has a different stage count than the chain");
    }

    for (int k = 0; k <= n; ++k) {
        TreeNode node;
        node.id = "s" + std::to_string(k);
        node.stage = k;
        node.value = values[static_cast<std::size_t>(k)];
        node.parent = k - 1;
        if (k > 0) {
            tree.nodes_[static_cast<std::size_t>(k - 1)].children.push_back(k);
            tree.nodes_[static_cast<std::size_t>(k - 1)].child_probs.push_back(1.0);
        }
        tree.by_id_.emplace(node.id, k);
        tree.nodes_.push_back(std::move(node));
    }

    tree.finalize(kDefaultNodeBudget);
    return tree;
}

void ScenarioTree::finalize(std::size_t node_budget) {
    if (nodes_.size() > node_budget) throw BudgetError("node budget exceeded");
    if (nodes_.empty()) throw SpecError("empty tree");
    if (nodes_[0].parent != -1 || nodes_[0].stage != 0) throw SpecError("first node must be the root");

    const int n = stages();
    std::size_t roots = 0;
    path_prob_.assign(nodes_.size(), 0.0);
    for (std::size_t m = 0; m < nodes_.size(); ++m) {
        const TreeNode& node = nodes_[m];
        if (node.parent == -1) {
            ++roots;
            path_prob_[m] = 1.0;
        } else {
            const TreeNode& par = nodes_[static_cast<std::size_t>(node.parent)];
            const auto it = std::find(par.children.begin(), par.children.end(), static_cast<int>(m));
            const std::size_t slot = static_cast<std::size_t>(it - par.children.begin());
            path_prob_[m] = path_prob_[static_cast<std::size_t>(node.parent)] * par.child_probs[slot];
        }
        if (node.stage < n) {
            if (node.children.empty())
                throw SpecError(describe("interior node has no children", node.id));
            double sum = 0.0;
            for (double p : node.child_probs) {
                if (!(p > 0.0)) throw SpecError(describe("zero or negative child probability", node.id));
                sum += p;
            }
            if (std::fabs(sum - 1.0) > kProbSumTol)
                throw SpecError(describe("child probabilities do not sum to 1", node.id));
        } else {
            if (!node.children.empty())
                throw SpecError(describe("terminal-stage node has children", node.id));
            leaves_.push_back(static_cast<int>(m));
        }
        if (!std::isfinite(node.value)) throw SpecError(describe("non-finite node value", node.id));
    }
    if (roots != 1) throw SpecError("tree must have exactly one root");

    double leaf_sum = 0.0;
    for (int leaf : leaves_) leaf_sum += path_prob_[static_cast<std::size_t>(leaf)];
    if (std::fabs(leaf_sum - 1.0) > kProbSumTol)
        throw SpecError("leaf path probabilities do not sum to 1");
}

int ScenarioTree::index_of(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) throw SpecError("unknown node id '" + id + "'");
    return it->second;
}

int ScenarioTree::ancestor_at(int m, int k) const {
    const TreeNode* cur = &node(m);
    if (k < 0 || k > cur->stage) {
        std::ostringstream os;
        os << "ancestor stage " << k << " out of range for node '" << cur->id << "' at stage "
           << cur->stage;
        throw SpecError(os.str());
    }
    int idx = m;
    while (node(idx).stage > k) idx = node(idx).parent;
    return idx;
}

double ScenarioTree::min_leaf_probability() const {
    double best = 1.0;
    for (int leaf : leaves_) best = std::min(best, path_prob_[static_cast<std::size_t>(leaf)]);
    return best;
}

std::vector<std::uint8_t> ScenarioTree::subtree_mask(int root) const {
    std::vector<std::uint8_t> mask(nodes_.size(), 0);
    mask[static_cast<std::size_t>(root)] = 1;
    for (std::size_t m = 0; m < nodes_.size(); ++m) {
        const int parent = nodes_[m].parent;
        if (parent >= 0 && mask[static_cast<std::size_t>(parent)]) mask[m] = 1;
    }
    return mask;
}

} // namespace multistop
