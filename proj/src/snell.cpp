#include "multistop/snell.hpp"

#include <cmath>
#include <limits>

namespace multistop {

namespace {

SnellSolution backward_induction(const ScenarioTree& tree, const Evaluation& ev,
                                 const AdaptedFamily& reward,
                                 const std::vector<std::uint8_t>& region, double tol) {
    if (reward.size() != tree.size()) throw SpecError("reward size does not match the tree");
    SnellSolution sol;
    sol.tree = &tree;
    sol.tol = tol;
    sol.reward = reward;
    sol.value.assign(tree.size(), std::numeric_limits<double>::quiet_NaN());
    sol.stop_region.assign(tree.size(), 0);

    std::vector<double> buf;
    const int n = tree.stages();
    for (int m = static_cast<int>(tree.size()) - 1; m >= 0; --m) {
        if (!region[static_cast<std::size_t>(m)]) continue;
        const TreeNode& node = tree.node(m);
        const double phi = reward[static_cast<std::size_t>(m)];
        if (!std::isfinite(phi))
            throw SpecError("reward is missing a value at node '" + node.id + "'");
        double u;
        if (node.stage == n) {
            u = phi;
        } else {
            buf.resize(node.children.size());
            for (std::size_t c = 0; c < node.children.size(); ++c)
                buf[c] = sol.value[static_cast<std::size_t>(node.children[c])];
            const double continuation = ev.kernel(tree, m, buf);
            u = std::max(phi, continuation);
        }
        sol.value[static_cast<std::size_t>(m)] = u;
        sol.stop_region[static_cast<std::size_t>(m)] = envelope_touches(u, phi, tol) ? 1 : 0;
    }
    return sol;
}

} // namespace

SnellSolution snell_envelope(const ScenarioTree& tree, const Evaluation& ev,
                             const AdaptedFamily& reward, double tol) {
    std::vector<std::uint8_t> region(tree.size(), 1);
    return backward_induction(tree, ev, reward, region, tol);
}

SnellSolution snell_envelope_below(const ScenarioTree& tree, const Evaluation& ev,
                                   const AdaptedFamily& reward, int root, double tol) {
    return backward_induction(tree, ev, reward, tree.subtree_mask(root), tol);
}

StoppingTime SnellSolution::optimal_from(const StoppingTime& S) const {
    const auto& in_region = stop_region;
    return first_hitting(S, [&in_region](int m) { return in_region[static_cast<std::size_t>(m)] != 0; });
}

double verify_snell_optimality(const Evaluation& ev, const SnellSolution& sol,
                               const StoppingTime& S) {
    const StoppingTime theta = sol.optimal_from(S);
    const std::vector<double> plug = evaluate(ev, S, theta, sol.reward);
    double gap = 0.0;
    for (std::size_t m = 0; m < plug.size(); ++m) {
        if (!S.is_frontier(static_cast<int>(m))) continue;
        gap = std::max(gap, std::fabs(plug[m] - sol.value[m]));
    }
    return gap;
}

} // namespace multistop
