#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "multistop/evaluation.hpp"
#include "multistop/family.hpp"
#include "multistop/snell.hpp"

namespace multistop {

struct SolveBudget {
    int max_d = 4;
    int max_stages = 5;
    std::size_t max_nested_states = 200000;
};

// d-fold solution via reduction: value = envelope of phi = max_i aux[i];
// aux[i](m) is the value of the (d-1)-fold problem on the subtree of m with
// exercise i taken at m. theta is the first time the envelope touches phi;
// regions[i] lists the theta-frontier nodes where slot i exercises (smallest
// index attaining phi); tuple is the exercise plan pasted from the per-node
// sub-solutions.
struct MultiSolution {
    int d = 2;
    AdaptedFamily value;    // V, equal node-wise to the envelope by the reduction
    AdaptedFamily phi;
    AdaptedFamily envelope; // u
    std::vector<AdaptedFamily> aux;
    StoppingTime theta;
    std::vector<std::vector<int>> regions;
    std::vector<StoppingTime> tuple;
    double plugin_gap = 0.0; // | rho_{S, join(tuple)}[psi(tuple)] - V | at S's frontier
};

// Double-stopping view of the same engine. v1 continues the first exercise
// with the second taken at the assessment node; v2 the reverse. On the split
// (v1 <= v2, ties included) the first right exercises at theta.
struct DoubleSolution {
    AdaptedFamily value;
    AdaptedFamily v1, v2, phi, envelope;
    StoppingTime theta, theta1, theta2;
    std::vector<int> split; // theta-frontier nodes with v1 <= v2
    std::pair<StoppingTime, StoppingTime> pair;
    double plugin_gap = 0.0;
};

struct DoubleReduction {
    AdaptedFamily v1, v2, phi, envelope;
};

// Cascade of single stopping problems (symmetric rewards). stage_values holds
// the intermediate families in backward order (index 0 is the deepest); value
// is the final value family over the whole tree.
struct CascadeSolution {
    std::vector<AdaptedFamily> stage_values;
    AdaptedFamily value;
};

DoubleReduction reduce_double(const ScenarioTree& tree, const Evaluation& ev,
                              const PayoffFamily& psi, double tol = 1e-9);

DoubleSolution solve_double(const ScenarioTree& tree, const Evaluation& ev,
                            const PayoffFamily& psi, const StoppingTime& S, double tol = 1e-10,
                            const SolveBudget& budget = {});

MultiSolution solve_d(const ScenarioTree& tree, const Evaluation& ev, const PayoffFamily& psi,
                      int d, const StoppingTime& S, double tol = 1e-10,
                      const SolveBudget& budget = {});

// Nested recursion over ordered exercise plans for symmetric rewards; the
// state space is (node, sorted stage tuple of the earlier exercises).
CascadeSolution solve_symmetric_nested(const ScenarioTree& tree, const Evaluation& ev,
                                       const PayoffFamily& psi, int d, double tol = 1e-10,
                                       const SolveBudget& budget = {});

// Additive reward eta summed over exercises; needs a translation invariant
// evaluation (flag spot-checked). Deepest family is the plain envelope of eta,
// each shallower one re-solves with reward eta + previous.
CascadeSolution solve_cascade_additive(const ScenarioTree& tree, const Evaluation& ev,
                                       const AdaptedFamily& eta, int d, double tol = 1e-9);

// Multiplicative reward, eta >= 0, positively homogeneous evaluation.
CascadeSolution solve_cascade_multiplicative(const ScenarioTree& tree, const Evaluation& ev,
                                             const AdaptedFamily& eta, int d, double tol = 1e-9);

// Necessary-condition certificate for a claimed optimal plan: (a) the
// pathwise-earliest exercise attains the reduced envelope from S; (b) at every
// node of the earliest-exercise frontier, the remaining plan attains the
// matching aux value. Strictly monotone evaluations only.
struct NecessaryCertificate {
    bool pass = false;
    bool meet_optimal = false;
    double meet_gap = 0.0;
    struct RegionCheck {
        int node = 0;
        int slot = 0;
        double gap = 0.0;
        bool pass = false;
    };
    std::vector<RegionCheck> region_checks;
};

NecessaryCertificate verify_necessary(const ScenarioTree& tree, const Evaluation& ev,
                                      const PayoffFamily& psi, int d,
                                      const std::vector<StoppingTime>& tuple,
                                      const StoppingTime& S, double tol = 1e-10,
                                      const SolveBudget& budget = {});

// Exhaustively (or with a deterministic stride once past the budget) checks
// rho_{sigma,tau}[V(tau)] <= V(sigma) + tol over ordered strategy pairs.
struct SupermartingaleReport {
    bool pass = true;
    std::size_t pairs_checked = 0;
    double worst_violation = 0.0; // max of lhs - rhs over all checks
    std::string counterexample;
};

SupermartingaleReport check_supermartingale(const ScenarioTree& tree, const Evaluation& ev,
                                            const AdaptedFamily& V, std::size_t max_pairs = 100000,
                                            double tol = 1e-10);

} // namespace multistop
