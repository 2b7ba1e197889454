#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "multistop/family.hpp"
#include "multistop/stopping.hpp"
#include "multistop/tree.hpp"

namespace multistop {

// Two-time-index evaluation operator, generated by composing a one-step node
// kernel backward over the not-yet-stopped region. Time consistency, the
// zero-one law and its pair/tuple variants then hold by construction: both
// sides of each law execute the identical kernel sequence.
class Evaluation {
public:
    // Child probabilities, dates and step sizes come from the tree.
    using Kernel =
        std::function<double(const ScenarioTree& tree, int node, std::span<const double> child_values)>;

    struct Flags {
        bool translation_invariant = false;
        bool positively_homogeneous = false;
        bool strictly_monotone = false;
    };

    Evaluation(std::string label, Kernel kernel, Flags flags)
        : label_(std::move(label)), kernel_(std::move(kernel)), flags_(flags) {}

    const std::string& label() const { return label_; }
    const Flags& flags() const { return flags_; }
    double kernel(const ScenarioTree& tree, int node, std::span<const double> child_values) const {
        return kernel_(tree, node, child_values);
    }

private:
    std::string label_;
    Kernel kernel_;
    Flags flags_;
};

// Conditional expectation under the tree's probabilities.
Evaluation make_linear();

// Entropic certainty equivalent -(1/gamma) log E[exp(-gamma * .)], gamma > 0.
// Translation invariant and strictly monotone, not positively homogeneous.
Evaluation make_entropic(double gamma);

// Explicit one-step scheme for a driver-generated evaluation:
//   kernel = m + driver(t_k, m, (y_c - m)_c) * dt_k,  m = E[y | node].
// Requires lipschitz * max step < 1. Flags are supplied by the caller and are
// validated numerically by the axioms module.
using GDriver = std::function<double(double t, double ybar, std::span<const double> deviations)>;
Evaluation make_discrete_g(std::string label, GDriver driver, double lipschitz,
                           Evaluation::Flags flags);
// g(t,y,z) = -r*y: one-step discounting.
Evaluation make_discount_g(double r);
// g(t,y,z) = kappa * sum_c |z_c|: deviation-loading driver.
Evaluation make_zabs_g(double kappa);

// Worst case over a per-node finite set of equivalent one-step measures with a
// penalty: kernel = min_q [ E_q[y] + c(q) * dt ]. The baseline measure always
// participates with zero penalty.
struct RobustAlternative {
    std::vector<double> q; // strictly positive, sums to 1, same arity as the node's children
    double penalty = 0.0;  // c(q) >= 0, charged per unit of time step
};
using RobustTable = std::vector<std::vector<RobustAlternative>>; // indexed by node
Evaluation make_penalized_robust(const ScenarioTree& tree, RobustTable table);

// Convenience builder: at every interior node, exponential tilts of the
// baseline by +/- lambda across the child ordering, each with the given penalty.
Evaluation make_tilted_robust(const ScenarioTree& tree, double lambda, double penalty);

// rho_{S,tau}[eta]: backward pass from tau's stop frontier to S's stop
// frontier. eta holds values at tau's frontier nodes (NaN elsewhere is fine);
// the result holds values on every node between the two frontiers, NaN
// outside. Requires S <= tau pathwise.
std::vector<double> evaluate(const Evaluation& ev, const StoppingTime& S, const StoppingTime& tau,
                             const std::vector<double>& eta);

// Same backward pass restricted to the subtree of `root`, clipped at the
// marks of `tau` (only tau's behaviour inside the subtree matters). Returns
// values on the region between `root` and tau's frontier within the subtree.
std::vector<double> evaluate_below(const Evaluation& ev, int root, const StoppingTime& tau,
                                   const std::vector<double>& eta);

} // namespace multistop
