#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "multistop/evaluation.hpp"
#include "multistop/family.hpp"
#include "multistop/random.hpp"

namespace multistop {

// Raw two-index operator interface. Kernel-generated evaluations adapt via
// under_test(); the planted defect below exists as a negative control.
struct OperatorUnderTest {
    std::string label;
    std::function<std::vector<double>(const StoppingTime& S, const StoppingTime& tau,
                                      const std::vector<double>& eta)>
        apply;
    std::optional<Evaluation> evaluation; // present for kernel-generated operators
};

OperatorUnderTest under_test(const Evaluation& ev);

// Linear evaluation plus 0.1 * stage at the assessment frontier: breaks
// knowledge preservation and consistency while keeping locality.
OperatorUnderTest make_broken_operator();

struct CheckResult {
    std::string name;
    bool pass = true;
    int samples = 0;
    double tolerance = 0.0;
    std::string detail; // replayable counterexample on failure, notes otherwise
};

struct AxiomReport {
    std::string op_label;
    std::uint64_t seed = 0;
    std::vector<CheckResult> checks;

    bool all_pass() const {
        for (const CheckResult& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

// Randomized certification of the operator laws on a fixed tree. Structural
// laws are required to hold bitwise (both sides run the same kernel
// sequence); algebraic identities at 1e-12. Every check is deterministic
// given the seed, so failures replay exactly.
class AxiomChecker {
public:
    AxiomChecker(const ScenarioTree& tree, std::uint64_t seed = 42, int samples = 200)
        : tree_(&tree), seed_(seed), samples_(samples) {}

    // Outputs agree where two assessment times coincide.
    CheckResult check_admissibility(const OperatorUnderTest& op) const;
    // Evaluating a payoff already known at the assessment time returns it.
    CheckResult check_knowledge_preservation(const OperatorUnderTest& op) const;
    // Componentwise monotone in the terminal values, tolerance 0.
    CheckResult check_monotonicity(const OperatorUnderTest& op) const;
    // Composition over an intermediate stopping time changes nothing.
    CheckResult check_consistency(const OperatorUnderTest& op) const;
    // Localization on events where two horizons coincide.
    CheckResult check_zero_one_law(const OperatorUnderTest& op) const;
    // Per-index localization and the ordered-pair reduction laws for
    // two-exercise rewards, plus their pasted-pair consequence.
    CheckResult check_pair_localization(const OperatorUnderTest& op, const PayoffFamily& psi) const;
    // d-tuple pasting law.
    CheckResult check_tuple_pasting(const OperatorUnderTest& op, const PayoffFamily& psi,
                                    int d) const;
    // Declared capability flags: identity tests at 1e-12; strict monotonicity
    // via single-coordinate bumps (delta = 1e-6, increase required to reach
    // delta * min path-probability * 0.5). Undeclared flags are probed anyway
    // and the violation magnitude reported without failing.
    std::vector<CheckResult> check_flags(const Evaluation& ev) const;

    AxiomReport run_all(const OperatorUnderTest& op, const PayoffFamily& psi_pair,
                        const PayoffFamily* psi_tuple = nullptr, int d = 3) const;

private:
    const ScenarioTree* tree_;
    std::uint64_t seed_;
    int samples_;
};

} // namespace multistop
