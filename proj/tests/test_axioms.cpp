#include "doctest.h"

#include "multistop/axioms.hpp"
#include "multistop/jsonio.hpp"

using namespace multistop;

namespace {

ScenarioTree make_fixb() { return ScenarioTree::binomial(2, 0.5, 1.0, 2.0, 0.5); }

std::vector<Evaluation> builtin_ops(const ScenarioTree& tree) {
    std::vector<Evaluation> ops;
    ops.push_back(make_linear());
    ops.push_back(make_entropic(0.5));
    ops.push_back(make_entropic(1.0));
    ops.push_back(make_discount_g(0.1));
    ops.push_back(make_tilted_robust(tree, 0.15, 0.05));
    return ops;
}

} // namespace

TEST_CASE("built-in operators pass the full law suite") {
    const ScenarioTree b = make_fixb();
    const PayoffFamily psi2 = PayoffFamily::additive(b, node_values(b), 2);
    const PayoffFamily psi3 = PayoffFamily::additive(b, node_values(b), 3);
    const AxiomChecker checker(b, 42, 80);
    for (const Evaluation& ev : builtin_ops(b)) {
        const AxiomReport report = checker.run_all(under_test(ev), psi2, &psi3, 3);
        INFO("operator ", ev.label());
        for (const CheckResult& c : report.checks) {
            INFO(c.name, ": ", c.detail);
            CHECK(c.pass);
        }
    }
}

TEST_CASE("asymmetric rewards exercise the pair laws too") {
    const ScenarioTree b = make_fixb();
    const PayoffFamily psi =
        PayoffFamily::weighted_additive(b, node_values(b), {1.0, 0.4});
    const AxiomChecker checker(b, 42, 80);
    CHECK(checker.check_pair_localization(under_test(make_entropic(1.0)), psi).pass);
    const PayoffFamily table = PayoffFamily::random_table(b, 3, 555);
    CHECK(checker.check_tuple_pasting(under_test(make_tilted_robust(b, 0.15, 0.05)), table, 3).pass);
}

TEST_CASE("tuple pasting on a three-stage chain") {
    const ScenarioTree chain = ScenarioTree::chain({1.0, 2.0, 1.5, 0.8});
    const PayoffFamily psi = PayoffFamily::additive(chain, node_values(chain), 3);
    const AxiomChecker checker(chain, 42, 100);
    CHECK(checker.check_tuple_pasting(under_test(make_linear()), psi, 3).pass);
}

TEST_CASE("the planted broken operator fails with a replayable counterexample") {
    const ScenarioTree b = make_fixb();
    const PayoffFamily psi2 = PayoffFamily::additive(b, node_values(b), 2);
    const PayoffFamily psi3 = PayoffFamily::additive(b, node_values(b), 3);
    const AxiomChecker checker(b, 42, 200);
    const AxiomReport first = checker.run_all(make_broken_operator(), psi2, &psi3, 3);
    CHECK_FALSE(first.all_pass());

    int failures = 0;
    for (const CheckResult& c : first.checks) {
        if (c.pass) continue;
        ++failures;
        CHECK_FALSE(c.detail.empty());
        CHECK(c.detail.find("seed=42") != std::string::npos);
    }
    CHECK(failures >= 1);

    // replay: identical seed reproduces the identical report
    const AxiomReport second = checker.run_all(make_broken_operator(), psi2, &psi3, 3);
    CHECK(axiom_report_json(first).dump() == axiom_report_json(second).dump());
}

TEST_CASE("degenerate inputs are vacuous or trivially consistent") {
    const ScenarioTree b = make_fixb();
    const Evaluation lin = make_linear();
    const OperatorUnderTest op = under_test(lin);
    const StoppingTime s1 = StoppingTime::at_stage(b, 1);
    const StoppingTime s2 = StoppingTime::at_stage(b, 2);
    const AdaptedFamily eta = node_values(b);

    // identical assessment times agree everywhere, trivially
    const std::vector<double> out1 = op.apply(s1, s2, eta);
    const std::vector<double> out2 = op.apply(s1, s2, eta);
    for (int a : s1.frontier()) CHECK(out1[static_cast<std::size_t>(a)] == out2[static_cast<std::size_t>(a)]);

    // an empty localization event constrains nothing: pasting on it returns
    // the alternative strategy wholesale
    CHECK(paste_at(s1, {}, s2, s1) == s1);
}

TEST_CASE("capability flags") {
    const ScenarioTree b = make_fixb();
    const AxiomChecker checker(b, 42, 120);
    SUBCASE("linear declares and passes all three") {
        const std::vector<CheckResult> flags = checker.check_flags(make_linear());
        REQUIRE(flags.size() == 3);
        for (const CheckResult& c : flags) {
            CHECK(c.pass);
            CHECK(c.detail.empty()); // declared and satisfied
        }
    }
    SUBCASE("entropic: invariance holds, homogeneity absent but measured") {
        const std::vector<CheckResult> flags = checker.check_flags(make_entropic(1.0));
        CHECK(flags[0].pass); // translation invariance, declared
        CHECK(flags[0].detail.empty());
        CHECK(flags[1].pass); // homogeneity not declared: informational
        CHECK(flags[1].detail.find("not declared") != std::string::npos);
        CHECK(flags[2].pass); // strict monotonicity
    }
    SUBCASE("coherent robust is positively homogeneous") {
        const std::vector<CheckResult> flags = checker.check_flags(make_tilted_robust(b, 0.15, 0.0));
        CHECK(flags[0].pass);
        CHECK(flags[1].pass);
        CHECK(flags[1].detail.empty());
        CHECK(flags[2].pass);
    }
    SUBCASE("discounting driver is homogeneous but not invariant") {
        const std::vector<CheckResult> flags = checker.check_flags(make_discount_g(0.1));
        CHECK(flags[0].pass);
        CHECK(flags[0].detail.find("not declared") != std::string::npos);
        CHECK(flags[1].pass);
        CHECK(flags[1].detail.empty());
        CHECK(flags[2].pass);
    }
}

TEST_CASE("reports are deterministic given the seed") {
    const ScenarioTree b = make_fixb();
    const PayoffFamily psi2 = PayoffFamily::additive(b, node_values(b), 2);
    const AxiomChecker checker(b, 7, 60);
    const AxiomReport a = checker.run_all(under_test(make_entropic(1.0)), psi2);
    const AxiomReport b2 = checker.run_all(under_test(make_entropic(1.0)), psi2);
    CHECK(axiom_report_json(a).dump(2) == axiom_report_json(b2).dump(2));

    const AxiomChecker other(b, 8, 60);
    const AxiomReport c = other.run_all(under_test(make_entropic(1.0)), psi2);
    CHECK(axiom_report_json(a).dump(2) != axiom_report_json(c).dump(2)); // seed is recorded
}
