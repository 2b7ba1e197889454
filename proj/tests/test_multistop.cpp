#include "doctest.h"

#include <cmath>

#include "multistop/multistop.hpp"
#include "multistop/oracle.hpp"
#include "multistop/random.hpp"

using namespace multistop;

namespace {

ScenarioTree make_fixb() { return ScenarioTree::binomial(2, 0.5, 1.0, 2.0, 0.5); }
ScenarioTree make_fixd() { return ScenarioTree::chain({1.0, 2.0, 1.5}); }

} // namespace

TEST_CASE("reduce_double on the chain fixture") {
    const ScenarioTree d = make_fixd();
    const PayoffFamily psi = PayoffFamily::additive(d, node_values(d), 2);
    const DoubleReduction red = reduce_double(d, make_linear(), psi);
    // v1(root) = max over tau of E[eta(tau) + eta(root)] = 1 + 2 = 3
    CHECK(std::fabs(red.v1[0] - (3.0)) <= 1e-12);
    CHECK(std::fabs(red.phi[0] - (3.0)) <= 1e-12);
    CHECK(std::fabs(red.phi[1] - (4.0)) <= 1e-12);
    CHECK(std::fabs(red.envelope[0] - (4.0)) <= 1e-12);
    // symmetric reward: both frozen-slot families coincide
    for (std::size_t m = 0; m < d.size(); ++m) CHECK(red.v1[m] == red.v2[m]);
}

TEST_CASE("constant rewards collapse everything") {
    const ScenarioTree b = make_fixb();
    const PayoffFamily psi = PayoffFamily::constant(2.5, 2);
    const DoubleReduction red = reduce_double(b, make_linear(), psi);
    for (std::size_t m = 0; m < b.size(); ++m) {
        CHECK(std::fabs(red.v1[m] - 2.5) <= 1e-12);
        CHECK(std::fabs(red.v2[m] - 2.5) <= 1e-12);
        CHECK(std::fabs(red.envelope[m] - 2.5) <= 1e-12);
    }
    const StoppingTime s0 = StoppingTime::at_stage(b, 0);
    const DoubleSolution sol = solve_double(b, make_linear(), psi, s0);
    for (std::size_t m = 0; m < b.size(); ++m) CHECK(std::fabs(sol.value[m] - 2.5) <= 1e-12);
    // everything is optimal; the constructed pair exercises at the assessment time
    CHECK(sol.pair.first == s0);
    CHECK(sol.pair.second == s0);
}

TEST_CASE("solve_double on the fixtures") {
    SUBCASE("chain: both rights at stage 1") {
        const ScenarioTree d = make_fixd();
        const PayoffFamily psi = PayoffFamily::additive(d, node_values(d), 2);
        const DoubleSolution sol = solve_double(d, make_linear(), psi, StoppingTime::at_stage(d, 0));
        CHECK(std::fabs(sol.value[0] - (4.0)) <= 1e-12); // brute force over 9 pairs
        CHECK(sol.pair.first == StoppingTime::at_stage(d, 1));
        CHECK(sol.pair.second == StoppingTime::at_stage(d, 1));
        CHECK(sol.plugin_gap <= 1e-10);
    }
    SUBCASE("binomial: twice the single value") {
        const ScenarioTree b = make_fixb();
        const PayoffFamily psi = PayoffFamily::additive(b, node_values(b), 2);
        const DoubleSolution sol = solve_double(b, make_linear(), psi, StoppingTime::at_stage(b, 0));
        CHECK(std::fabs(sol.value[0] - (3.125)) <= 1e-12); // brute force over 25 pairs
        CHECK(sol.plugin_gap <= 1e-10);
        // split region covers the whole frontier for a symmetric reward
        CHECK(sol.split.size() == sol.theta.frontier().size());
    }
}

TEST_CASE("solve_d specializes to solve_double at d=2, exactly") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        Rng rng(seed);
        const ScenarioTree t = random_tree(rng, 2, 4);
        const StoppingTime s0 = StoppingTime::at_stage(t, 0);
        const PayoffFamily psi =
            seed % 2 ? PayoffFamily::additive(t, random_family(rng, t), 2)
                     : PayoffFamily::weighted_additive(t, random_family(rng, t), {1.0, 0.35});
        const Evaluation ev = seed % 3 ? make_entropic(1.0) : make_linear();
        const MultiSolution generic = solve_d(t, ev, psi, 2, s0);
        const DoubleSolution special = solve_double(t, ev, psi, s0);
        for (std::size_t m = 0; m < t.size(); ++m) {
            CHECK(generic.value[m] == special.value[m]);
            CHECK(generic.aux[1][m] == special.v1[m]);
            CHECK(generic.aux[0][m] == special.v2[m]);
        }
        CHECK(generic.tuple[0] == special.pair.first);
        CHECK(generic.tuple[1] == special.pair.second);
    }
}

TEST_CASE("the paper pair construction: split between theta and the frozen stops") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        Rng rng(seed);
        const ScenarioTree t = random_tree(rng, 2, 3);
        const StoppingTime s0 = StoppingTime::at_stage(t, 0);
        const PayoffFamily psi =
            PayoffFamily::weighted_additive(t, random_family(rng, t), {1.0, 0.6});
        const DoubleSolution sol = solve_double(t, make_linear(), psi, s0);
        const StoppingTime expected_first = paste_at(sol.theta, sol.split, sol.theta, sol.theta1);
        const StoppingTime expected_second = paste_at(sol.theta, sol.split, sol.theta2, sol.theta);
        CHECK(sol.pair.first == expected_first);
        CHECK(sol.pair.second == expected_second);
    }
}

TEST_CASE("triple stopping") {
    const ScenarioTree d = make_fixd();
    const StoppingTime s0 = StoppingTime::at_stage(d, 0);
    SUBCASE("chain additive: three times the single value") {
        const PayoffFamily psi = PayoffFamily::additive(d, node_values(d), 3);
        const MultiSolution sol = solve_d(d, make_linear(), psi, 3, s0);
        CHECK(std::fabs(sol.value[0] - (6.0)) <= 1e-12); // brute force over 27 triples
        const OracleResult oracle = brute_force_value(d, make_linear(), psi, 3, s0);
        CHECK(std::fabs(sol.value[0] - oracle.value[0]) <= 1e-10);
    }
    SUBCASE("constant reward on a 3-stage chain") {
        const ScenarioTree c3 = ScenarioTree::chain({1.0, 1.0, 1.0, 1.0});
        const PayoffFamily psi = PayoffFamily::constant(0.7, 3);
        const MultiSolution sol = solve_d(c3, make_linear(), psi, 3, StoppingTime::at_stage(c3, 0));
        for (std::size_t m = 0; m < c3.size(); ++m) CHECK(std::fabs(sol.value[m] - 0.7) <= 1e-12);
    }
}

TEST_CASE("sandwich: immediate exercise <= frozen-slot value <= total value") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        Rng rng(seed);
        const ScenarioTree t = random_tree(rng, 2, 3);
        const PayoffFamily psi = PayoffFamily::random_table(t, 2, seed * 101);
        for (const Evaluation& ev : {make_linear(), make_entropic(1.0)}) {
            const MultiSolution sol = solve_d(t, ev, psi, 2, StoppingTime::at_stage(t, 0));
            for (std::size_t m = 0; m < t.size(); ++m) {
                const int stage = t.node(static_cast<int>(m)).stage;
                const std::vector<int> diag{stage, stage};
                const double immediate = psi(static_cast<int>(m), diag);
                for (int i = 0; i < 2; ++i) {
                    CHECK(immediate <= sol.aux[static_cast<std::size_t>(i)][m] + 1e-10);
                    CHECK(sol.aux[static_cast<std::size_t>(i)][m] <= sol.value[m] + 1e-10);
                }
            }
        }
    }
}

TEST_CASE("solver budgets are enforced") {
    const ScenarioTree d = make_fixd();
    const PayoffFamily psi5 = PayoffFamily::additive(d, node_values(d), 5);
    CHECK_THROWS_AS(
        solve_d(d, make_linear(), psi5, 5, StoppingTime::at_stage(d, 0)), BudgetError);
    const ScenarioTree tall = ScenarioTree::chain({1, 2, 3, 4, 5, 6, 7});
    const PayoffFamily psi2 = PayoffFamily::additive(tall, node_values(tall), 2);
    CHECK_THROWS_AS(
        solve_d(tall, make_linear(), psi2, 2, StoppingTime::at_stage(tall, 0)), BudgetError);
}

TEST_CASE("additive cascade") {
    SUBCASE("linear: value is rights times the single value") {
        const ScenarioTree b = make_fixb();
        const AdaptedFamily eta = node_values(b);
        const CascadeSolution cas = solve_cascade_additive(b, make_linear(), eta, 2);
        const double single = snell_envelope(b, make_linear(), eta).value[0];
        CHECK(std::fabs(cas.value[0] - (3.125)) <= 1e-12);
        CHECK(std::fabs(cas.value[0] - 2.0 * single) <= 1e-12);
    }
    SUBCASE("entropic cascade agrees with the reduction solver") {
        const ScenarioTree b = make_fixb();
        const AdaptedFamily eta = node_values(b);
        const CascadeSolution cas = solve_cascade_additive(b, make_entropic(1.0), eta, 2);
        const PayoffFamily psi = PayoffFamily::additive(b, eta, 2);
        const DoubleSolution sol =
            solve_double(b, make_entropic(1.0), psi, StoppingTime::at_stage(b, 0));
        CHECK(std::fabs(cas.value[0] - sol.value[0]) <= 1e-10);
    }
    SUBCASE("depth one is the plain envelope") {
        const ScenarioTree d = make_fixd();
        const CascadeSolution cas = solve_cascade_additive(d, make_entropic(0.5), node_values(d), 1);
        const SnellSolution single = snell_envelope(d, make_entropic(0.5), node_values(d));
        for (std::size_t m = 0; m < d.size(); ++m) CHECK(cas.value[m] == single.value[m]);
        CHECK(cas.stage_values.empty());
    }
    SUBCASE("requires the translation-invariance flag") {
        const ScenarioTree b = make_fixb();
        CHECK_THROWS_AS(solve_cascade_additive(b, make_discount_g(0.1), node_values(b), 2),
                        SpecError);
    }
}

TEST_CASE("multiplicative cascade") {
    SUBCASE("chain fixture: both rights at the peak") {
        const ScenarioTree d = make_fixd();
        const CascadeSolution cas = solve_cascade_multiplicative(d, make_linear(), node_values(d), 2);
        CHECK(std::fabs(cas.value[0] - (4.0)) <= 1e-12); // brute force over 9 pairs
    }
    SUBCASE("coherent robust cascade agrees with the reduction solver") {
        const ScenarioTree b = make_fixb();
        const Evaluation rob = make_tilted_robust(b, 0.15, 0.0);
        const AdaptedFamily eta = node_values(b);
        const CascadeSolution cas = solve_cascade_multiplicative(b, rob, eta, 2);
        const PayoffFamily psi = PayoffFamily::multiplicative(b, eta, 2);
        const MultiSolution sol = solve_d(b, rob, psi, 2, StoppingTime::at_stage(b, 0));
        CHECK(std::fabs(cas.value[0] - sol.value[0]) <= 1e-10);
    }
    SUBCASE("unit reward stays unit") {
        const ScenarioTree b = make_fixb();
        const CascadeSolution cas =
            solve_cascade_multiplicative(b, make_linear(), AdaptedFamily(b.size(), 1.0), 3);
        for (std::size_t m = 0; m < b.size(); ++m) CHECK(std::fabs(cas.value[m] - 1.0) <= 1e-12);
    }
    SUBCASE("negative rewards and missing homogeneity are rejected") {
        const ScenarioTree b = make_fixb();
        AdaptedFamily neg(b.size(), 1.0);
        neg[3] = -0.5;
        CHECK_THROWS_AS(solve_cascade_multiplicative(b, make_linear(), neg, 2), SpecError);
        CHECK_THROWS_AS(
            solve_cascade_multiplicative(b, make_entropic(1.0), AdaptedFamily(b.size(), 1.0), 2),
            SpecError);
    }
}

TEST_CASE("nested recursion over ordered plans") {
    const ScenarioTree b = make_fixb();
    const ScenarioTree d = make_fixd();
    SUBCASE("matches the reduction solver for symmetric rewards") {
        const PayoffFamily psi = PayoffFamily::additive(b, node_values(b), 2);
        const CascadeSolution nested = solve_symmetric_nested(b, make_entropic(1.0), psi, 2);
        const DoubleSolution sol =
            solve_double(b, make_entropic(1.0), psi, StoppingTime::at_stage(b, 0));
        CHECK(std::fabs(nested.value[0] - sol.value[0]) <= 1e-10);
    }
    SUBCASE("multiplicative chain fixture") {
        const PayoffFamily psi = PayoffFamily::multiplicative(d, node_values(d), 2);
        const CascadeSolution nested = solve_symmetric_nested(d, make_linear(), psi, 2);
        CHECK(std::fabs(nested.value[0] - (4.0)) <= 1e-12);
    }
    SUBCASE("three rights on the binomial fixture") {
        const PayoffFamily psi = PayoffFamily::additive(b, node_values(b), 3);
        const CascadeSolution nested = solve_symmetric_nested(b, make_linear(), psi, 3);
        const MultiSolution sol = solve_d(b, make_linear(), psi, 3, StoppingTime::at_stage(b, 0));
        CHECK(std::fabs(nested.value[0] - sol.value[0]) <= 1e-10);
        // linear additive case collapses to rights times the single value
        const double single = snell_envelope(b, make_linear(), node_values(b)).value[0];
        CHECK(std::fabs(nested.value[0] - 3.0 * single) <= 1e-12);
    }
    SUBCASE("asymmetric rewards are rejected") {
        const PayoffFamily psi =
            PayoffFamily::weighted_additive(b, node_values(b), {1.0, 0.5});
        CHECK_THROWS_AS(solve_symmetric_nested(b, make_linear(), psi, 2), SpecError);
    }
}

TEST_CASE("necessary-condition certificate") {
    const ScenarioTree d = make_fixd();
    const PayoffFamily psi = PayoffFamily::additive(d, node_values(d), 2);
    const StoppingTime s0 = StoppingTime::at_stage(d, 0);

    SUBCASE("solver output passes") {
        const DoubleSolution sol = solve_double(d, make_linear(), psi, s0);
        const NecessaryCertificate cert = verify_necessary(
            d, make_linear(), psi, 2, {sol.pair.first, sol.pair.second}, s0);
        CHECK(cert.pass);
        CHECK(cert.meet_gap <= 1e-10);
    }
    SUBCASE("a deliberately late pair fails the envelope condition") {
        const StoppingTime late = StoppingTime::at_stage(d, 2);
        const NecessaryCertificate cert =
            verify_necessary(d, make_linear(), psi, 2, {late, late}, s0);
        CHECK_FALSE(cert.pass);
        CHECK_FALSE(cert.meet_optimal);
        CHECK(std::fabs(cert.meet_gap - (1.0)) <= 1e-12); // 4 - 2*1.5
    }
    SUBCASE("constant rewards accept any plan") {
        const PayoffFamily flat = PayoffFamily::constant(1.0, 2);
        Rng rng(5);
        const StoppingTime t1 = random_stopping_time(rng, d, &s0);
        const StoppingTime t2 = random_stopping_time(rng, d, &s0);
        CHECK(verify_necessary(d, make_linear(), flat, 2, {t1, t2}, s0).pass);
    }
    SUBCASE("requires the strict-monotonicity flag") {
        Evaluation weak("weak-linear",
                        [](const ScenarioTree& t, int node, std::span<const double> y) {
                            double acc = 0.0;
                            const auto& p = t.node(node).child_probs;
                            for (std::size_t c = 0; c < y.size(); ++c) acc += p[c] * y[c];
                            return acc;
                        },
                        Evaluation::Flags{true, true, false});
        CHECK_THROWS_AS(verify_necessary(d, weak, psi, 2, {s0, s0}, s0), SpecError);
    }
}

TEST_CASE("solver tuples pass the necessary condition across operators") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        Rng rng(seed);
        const ScenarioTree t = random_tree(rng, 2, 3);
        const StoppingTime s0 = StoppingTime::at_stage(t, 0);
        const PayoffFamily psi =
            PayoffFamily::weighted_additive(t, random_family(rng, t), {1.0, 0.45});
        for (const Evaluation& ev : {make_linear(), make_entropic(0.5)}) {
            const MultiSolution sol = solve_d(t, ev, psi, 2, s0);
            CHECK(verify_necessary(t, ev, psi, 2, sol.tuple, s0).pass);
        }
    }
}

TEST_CASE("supermartingale checker") {
    const ScenarioTree b = make_fixb();
    const PayoffFamily psi = PayoffFamily::additive(b, node_values(b), 2);
    SUBCASE("solved value families pass exhaustively") {
        const DoubleSolution sol = solve_double(b, make_linear(), psi, StoppingTime::at_stage(b, 0));
        const SupermartingaleReport report = check_supermartingale(b, make_linear(), sol.value);
        CHECK(report.pass);
        CHECK(report.pairs_checked > 0);
    }
    SUBCASE("constant families are martingales under normalized kernels") {
        const SupermartingaleReport report =
            check_supermartingale(b, make_linear(), AdaptedFamily(b.size(), 1.0));
        CHECK(report.pass);
        CHECK(std::fabs(report.worst_violation) <= 1e-12);
    }
    SUBCASE("a dominated reward family is flagged") {
        // node values are not an envelope here: continuation beats the reward
        const SupermartingaleReport report =
            check_supermartingale(b, make_linear(), node_values(b));
        CHECK_FALSE(report.pass);
        CHECK(report.worst_violation > 1e-10);
        CHECK_FALSE(report.counterexample.empty());
    }
}
