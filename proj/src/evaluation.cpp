#include "multistop/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace multistop {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double weighted_mean(std::span<const double> probs, std::span<const double> values) {
    double acc = 0.0;
    for (std::size_t c = 0; c < values.size(); ++c) acc += probs[c] * values[c];
    return acc;
}

} // namespace

Evaluation make_linear() {
    Evaluation::Flags flags{true, true, true};
    auto kernel = [](const ScenarioTree& tree, int node, std::span<const double> y) {
        return weighted_mean(tree.node(node).child_probs, y);
    };
    return Evaluation("linear", std::move(kernel), flags);
}

Evaluation make_entropic(double gamma) {
    if (!(gamma > 0.0)) throw SpecError("entropic evaluation needs gamma > 0");
    Evaluation::Flags flags{true, false, true};
    auto kernel = [gamma](const ScenarioTree& tree, int node, std::span<const double> y) {
        const auto& probs = tree.node(node).child_probs;
        double shift = -gamma * y[0];
        for (std::size_t c = 1; c < y.size(); ++c) shift = std::max(shift, -gamma * y[c]);
        double acc = 0.0;
        for (std::size_t c = 0; c < y.size(); ++c)
            acc += probs[c] * std::exp(-gamma * y[c] - shift);
        return -(shift + std::log(acc)) / gamma;
    };
    std::ostringstream label;
    label << "entropic(gamma=" << gamma << ")";
    return Evaluation(label.str(), std::move(kernel), flags);
}

Evaluation make_discrete_g(std::string label, GDriver driver, double lipschitz,
                           Evaluation::Flags flags) {
    if (!(lipschitz >= 0.0)) throw SpecError("driver Lipschitz constant must be >= 0");
    auto kernel = [driver = std::move(driver), lipschitz](const ScenarioTree& tree, int node,
                                                          std::span<const double> y) {
        const TreeNode& cur = tree.node(node);
        const double dt = tree.grid().dt(cur.stage);
        if (lipschitz * dt >= 1.0) {
            std::ostringstream os;
            os << "explicit scheme constraint violated at node '" << cur.id
               << "': Lipschitz * dt = " << lipschitz * dt << " >= 1";
            throw SpecError(os.str());
        }
        const double mean = weighted_mean(cur.child_probs, y);
        double stack[16];
        std::vector<double> heap;
        std::span<double> dev;
        if (y.size() <= 16) {
            dev = std::span<double>(stack, y.size());
        } else {
            heap.resize(y.size());
            dev = heap;
        }
        for (std::size_t c = 0; c < y.size(); ++c) dev[c] = y[c] - mean;
        return mean + driver(tree.grid().date(cur.stage), mean, dev) * dt;
    };
    return Evaluation(std::move(label), std::move(kernel), flags);
}

Evaluation make_discount_g(double r) {
    if (!(r >= 0.0)) throw SpecError("discount rate must be >= 0");
    std::ostringstream label;
    label << "g-discount(r=" << r << ")";
    // Not translation invariant (the drift acts on the level), but positively
    // homogeneous and strictly monotone while r*dt < 1.
    return make_discrete_g(
        label.str(),
        [r](double, double ybar, std::span<const double>) { return -r * ybar; }, r,
        Evaluation::Flags{false, true, true});
}

Evaluation make_zabs_g(double kappa) {
    if (!(kappa >= 0.0)) throw SpecError("deviation loading must be >= 0");
    std::ostringstream label;
    label << "g-zabs(kappa=" << kappa << ")";
    return make_discrete_g(
        label.str(),
        [kappa](double, double, std::span<const double> dev) {
            double acc = 0.0;
            for (double z : dev) acc += std::fabs(z);
            return kappa * acc;
        },
        kappa, Evaluation::Flags{true, true, true});
}

Evaluation make_penalized_robust(const ScenarioTree& tree, RobustTable table) {
    if (table.size() != tree.size()) throw SpecError("robust table size does not match the tree");
    bool zero_penalty = true;
    for (std::size_t m = 0; m < table.size(); ++m) {
        const TreeNode& node = tree.node(static_cast<int>(m));
        for (const RobustAlternative& alt : table[m]) {
            if (alt.q.size() != node.children.size())
                throw SpecError("robust alternative arity mismatch at node '" + node.id + "'");
            double sum = 0.0;
            for (double q : alt.q) {
                if (!(q > 0.0))
                    throw SpecError("robust alternative with a zero entry at node '" + node.id +
                                    "' breaks measure equivalence");
                sum += q;
            }
            if (std::fabs(sum - 1.0) > 1e-12)
                throw SpecError("robust alternative does not sum to 1 at node '" + node.id + "'");
            if (!(alt.penalty >= 0.0))
                throw SpecError("negative penalty at node '" + node.id + "'");
            if (alt.penalty != 0.0) zero_penalty = false;
        }
    }

    Evaluation::Flags flags{true, zero_penalty, true};
    auto shared = std::make_shared<const RobustTable>(std::move(table));
    const ScenarioTree* bound = &tree;
    auto kernel = [shared, bound](const ScenarioTree& t, int node, std::span<const double> y) {
        if (&t != bound) throw SpecError("robust evaluation applied to a different tree");
        const TreeNode& cur = t.node(node);
        const double dt = t.grid().dt(cur.stage);
        double best = weighted_mean(cur.child_probs, y); // baseline, zero penalty
        for (const RobustAlternative& alt : (*shared)[static_cast<std::size_t>(node)]) {
            const double cand = weighted_mean(alt.q, y) + alt.penalty * dt;
            if (cand < best) best = cand;
        }
        return best;
    };
    std::ostringstream label;
    label << "robust(" << (zero_penalty ? "coherent" : "penalized") << ")";
    return Evaluation(label.str(), std::move(kernel), flags);
}

Evaluation make_tilted_robust(const ScenarioTree& tree, double lambda, double penalty) {
    RobustTable table(tree.size());
    for (std::size_t m = 0; m < tree.size(); ++m) {
        const TreeNode& node = tree.node(static_cast<int>(m));
        const std::size_t arity = node.children.size();
        if (arity < 2) continue;
        for (double sign : {+1.0, -1.0}) {
            RobustAlternative alt;
            alt.q.resize(arity);
            double sum = 0.0;
            for (std::size_t c = 0; c < arity; ++c) {
                const double x = static_cast<double>(c) - 0.5 * static_cast<double>(arity - 1);
                alt.q[c] = node.child_probs[c] * std::exp(sign * lambda * x);
                sum += alt.q[c];
            }
            for (double& q : alt.q) q /= sum;
            alt.penalty = penalty;
            table[m].push_back(std::move(alt));
        }
    }
    return make_penalized_robust(tree, std::move(table));
}

namespace {

// Backward pass over `region` (a node mask closed under children), clipped at
// tau's marks. Shared by evaluate() and evaluate_below().
std::vector<double> backward_pass(const Evaluation& ev, const ScenarioTree& tree,
                                  const std::vector<std::uint8_t>& region, const StoppingTime& tau,
                                  const std::vector<double>& eta) {
    if (eta.size() != tree.size()) throw SpecError("eta size does not match the tree");
    std::vector<double> out(tree.size(), kNaN);
    std::vector<double> buf;
    for (int m = static_cast<int>(tree.size()) - 1; m >= 0; --m) {
        if (!region[static_cast<std::size_t>(m)]) continue;
        if (tau.stops_at(m)) {
            if (tau.is_frontier(m)) {
                if (!std::isfinite(eta[static_cast<std::size_t>(m)]))
                    throw SpecError("eta is missing a value at stop-frontier node '" +
                                    tree.node(m).id + "'");
                out[static_cast<std::size_t>(m)] = eta[static_cast<std::size_t>(m)];
            }
            continue; // strictly below the frontier: never needed
        }
        const TreeNode& node = tree.node(m);
        buf.resize(node.children.size());
        for (std::size_t c = 0; c < node.children.size(); ++c)
            buf[c] = out[static_cast<std::size_t>(node.children[c])];
        out[static_cast<std::size_t>(m)] = ev.kernel(tree, m, buf);
    }
    return out;
}

} // namespace

std::vector<double> evaluate(const Evaluation& ev, const StoppingTime& S, const StoppingTime& tau,
                             const std::vector<double>& eta) {
    if (!pathwise_leq(S, tau))
        throw SpecError("evaluate requires the assessment time <= the horizon pathwise");
    const ScenarioTree& tree = S.tree();
    std::vector<std::uint8_t> region(tree.size());
    for (std::size_t m = 0; m < tree.size(); ++m)
        region[m] = S.stops_at(static_cast<int>(m)) ? 1 : 0;
    return backward_pass(ev, tree, region, tau, eta);
}

std::vector<double> evaluate_below(const Evaluation& ev, int root, const StoppingTime& tau,
                                   const std::vector<double>& eta) {
    const ScenarioTree& tree = tau.tree();
    if (tau.stops_at(root) && !tau.is_frontier(root))
        throw SpecError("horizon stops strictly above the subtree root");
    return backward_pass(ev, tree, tree.subtree_mask(root), tau, eta);
}

} // namespace multistop
