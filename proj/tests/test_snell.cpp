#include "doctest.h"

#include <cmath>

#include "multistop/oracle.hpp"
#include "multistop/random.hpp"
#include "multistop/snell.hpp"

using namespace multistop;

namespace {

ScenarioTree make_fixb() { return ScenarioTree::binomial(2, 0.5, 1.0, 2.0, 0.5); }
ScenarioTree make_fixd() { return ScenarioTree::chain({1.0, 2.0, 1.5}); }

// Independent oracle for the single stopping value: maximize the plug-in
// evaluation over every enumerated strategy.
double single_stop_oracle(const ScenarioTree& tree, const Evaluation& ev,
                          const AdaptedFamily& reward, const StoppingTime& S) {
    double best = -std::numeric_limits<double>::infinity();
    for (const StoppingTime& tau : enumerate_stopping_times(tree, S))
        best = std::max(best, evaluate(ev, S, tau, reward)[static_cast<std::size_t>(S.frontier().front())]);
    return best;
}

} // namespace

TEST_CASE("chain fixture: deterministic maximum over the remaining dates") {
    const ScenarioTree d = make_fixd();
    const Evaluation lin = make_linear();
    const SnellSolution sol = snell_envelope(d, lin, {1.0, 2.0, 1.5});
    CHECK(sol.value[0] == 2.0);
    CHECK(sol.value[1] == 2.0);
    CHECK(sol.value[2] == 1.5);
    CHECK(sol.optimal_from(StoppingTime::at_stage(d, 0)) == StoppingTime::at_stage(d, 1));
}

TEST_CASE("binomial fixture matches the strategy-enumeration oracle") {
    const ScenarioTree b = make_fixb();
    const Evaluation lin = make_linear();
    const AdaptedFamily phi = node_values(b);
    const SnellSolution sol = snell_envelope(b, lin, phi);
    CHECK(std::fabs(sol.value[0] - (1.5625)) <= 1e-12);
    CHECK(std::fabs(sol.value[static_cast<std::size_t>(b.index_of("0u"))] - (2.5)) <= 1e-12);
    CHECK(std::fabs(sol.value[static_cast<std::size_t>(b.index_of("0d"))] - (0.625)) <= 1e-12);

    const StoppingTime s0 = StoppingTime::at_stage(b, 0);
    CHECK(std::fabs(sol.value[0] - single_stop_oracle(b, lin, phi, s0)) <= 1e-10);
}

TEST_CASE("oracle equivalence for every built-in operator") {
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
        Rng rng(seed);
        const ScenarioTree t = random_tree(rng, 2, 4);
        const AdaptedFamily phi = random_family(rng, t);
        const StoppingTime s0 = StoppingTime::at_stage(t, 0);
        std::vector<Evaluation> ops;
        ops.push_back(make_linear());
        ops.push_back(make_entropic(1.0));
        ops.push_back(make_discount_g(0.1));
        ops.push_back(make_tilted_robust(t, 0.15, 0.05));
        for (const Evaluation& ev : ops) {
            const SnellSolution sol = snell_envelope(t, ev, phi);
            CHECK(std::fabs(sol.value[0] - single_stop_oracle(t, ev, phi, s0)) <= 1e-10);
            CHECK(verify_snell_optimality(ev, sol, s0) <= 1e-12);
            // envelope dominates the reward, exactly at the horizon
            for (std::size_t m = 0; m < t.size(); ++m) {
                CHECK(sol.value[m] >= phi[m]);
                if (t.is_terminal(static_cast<int>(m))) CHECK(sol.value[m] == phi[m]);
            }
        }
    }
}

TEST_CASE("constant rewards stop immediately under normalized kernels") {
    const ScenarioTree b = make_fixb();
    std::vector<Evaluation> ops;
    ops.push_back(make_linear());
    ops.push_back(make_entropic(0.7));
    ops.push_back(make_zabs_g(0.05));
    ops.push_back(make_tilted_robust(b, 0.15, 0.0));
    for (const Evaluation& ev : ops) {
        const SnellSolution sol = snell_envelope(b, ev, AdaptedFamily(b.size(), 2.5));
        for (std::size_t m = 0; m < b.size(); ++m) CHECK(std::fabs(sol.value[m] - 2.5) <= 1e-12);
        const StoppingTime s0 = StoppingTime::at_stage(b, 0);
        CHECK(sol.optimal_from(s0) == s0);
    }
}

TEST_CASE("plug-in optimality at the first touch") {
    const ScenarioTree d = make_fixd();
    const ScenarioTree b = make_fixb();
    const StoppingTime d0 = StoppingTime::at_stage(d, 0);
    const StoppingTime b0 = StoppingTime::at_stage(b, 0);
    CHECK(verify_snell_optimality(make_linear(), snell_envelope(d, make_linear(), node_values(d)), d0) == 0.0);
    CHECK(verify_snell_optimality(make_linear(), snell_envelope(b, make_linear(), node_values(b)), b0) <= 1e-12);
    CHECK(verify_snell_optimality(make_entropic(1.0), snell_envelope(b, make_entropic(1.0), node_values(b)), b0) <= 1e-12);
}

TEST_CASE("envelope family is a supermartingale under its own evaluation") {
    const ScenarioTree b = make_fixb();
    for (const Evaluation& ev : {make_linear(), make_entropic(1.0)}) {
        const SnellSolution sol = snell_envelope(b, ev, node_values(b));
        const std::vector<StoppingTime> all =
            enumerate_stopping_times(b, StoppingTime::at_stage(b, 0));
        for (const StoppingTime& sigma : all)
            for (const StoppingTime& tau : all) {
                if (!pathwise_leq(sigma, tau)) continue;
                const std::vector<double> out = evaluate(ev, sigma, tau, sol.value);
                for (int a : sigma.frontier())
                    CHECK(out[static_cast<std::size_t>(a)] <=
                          sol.value[static_cast<std::size_t>(a)] + 1e-10);
            }
    }
}

TEST_CASE("stopping earlier at a strictly dominated node is strictly suboptimal") {
    for (const Evaluation& ev : {make_linear(), make_entropic(1.0)}) {
        for (int which : {0, 1}) {
            const ScenarioTree t = which == 0 ? make_fixb() : make_fixd();
            const AdaptedFamily phi = node_values(t);
            const SnellSolution sol = snell_envelope(t, ev, phi);
            const StoppingTime s0 = StoppingTime::at_stage(t, 0);
            for (const StoppingTime& tau : enumerate_stopping_times(t, s0)) {
                bool stops_dominated = false;
                for (std::size_t m = 0; m < t.size(); ++m)
                    if (tau.is_frontier(static_cast<int>(m)) &&
                        sol.value[m] - phi[m] > sol.tol * (1.0 + std::fabs(sol.value[m])))
                        stops_dominated = true;
                if (!stops_dominated) continue;
                CHECK(evaluate(ev, s0, tau, phi)[0] < sol.value[0]);
            }
        }
    }
}
