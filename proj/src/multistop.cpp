#include "multistop/multistop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "multistop/oracle.hpp"

namespace multistop {

namespace {

constexpr double kHitTol = 1e-9; // stop-region tolerance, hybrid (see snell)

std::string node_id(const ScenarioTree& tree, int m) { return tree.node(m).id; }

// psi at a tuple, as eta values on the frontier of `last` = join(tuple),
// restricted to `region` when given.
std::vector<double> payoff_on_frontier(const PayoffFamily& psi,
                                       const std::vector<StoppingTime>& tuple,
                                       const StoppingTime& last,
                                       const std::vector<std::uint8_t>* region) {
    const ScenarioTree& tree = last.tree();
    std::vector<double> eta(tree.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<int> stages(tuple.size());
    for (std::size_t m = 0; m < tree.size(); ++m) {
        if (region && !(*region)[m]) continue;
        if (!last.is_frontier(static_cast<int>(m))) continue;
        for (std::size_t i = 0; i < tuple.size(); ++i)
            stages[i] = tuple[i].stop_stage_at(static_cast<int>(m));
        eta[m] = psi(static_cast<int>(m), stages);
    }
    return eta;
}

StoppingTime join_all(const std::vector<StoppingTime>& tuple) {
    StoppingTime out = tuple.front();
    for (std::size_t i = 1; i < tuple.size(); ++i) out = join(out, tuple[i]);
    return out;
}

StoppingTime meet_all(const std::vector<StoppingTime>& tuple) {
    StoppingTime out = tuple.front();
    for (std::size_t i = 1; i < tuple.size(); ++i) out = meet(out, tuple[i]);
    return out;
}

struct SubSolve {
    double value = 0.0;
    std::vector<StoppingTime> tuple;
};

// Recursive reduction on the subtree of `root`. The returned stopping times
// are only meaningful inside that subtree (outside they stop at the horizon).
SubSolve solve_subtree(const ScenarioTree& tree, const Evaluation& ev, const PayoffFamily& psi,
                       int root, double tol) {
    const int d = psi.d();
    const std::vector<std::uint8_t> mask = tree.subtree_mask(root);

    if (d == 1) {
        AdaptedFamily reward(tree.size(), std::numeric_limits<double>::quiet_NaN());
        int single[1];
        for (std::size_t m = 0; m < tree.size(); ++m) {
            if (!mask[m]) continue;
            single[0] = tree.node(static_cast<int>(m)).stage;
            reward[m] = psi(static_cast<int>(m), single);
        }
        SnellSolution sol = snell_envelope_below(tree, ev, reward, root, kHitTol);
        StoppingTime theta = sol.optimal_from(StoppingTime::at_subtree(tree, root));
        const std::vector<double> plug = evaluate_below(ev, root, theta, reward);
        const double gap = std::fabs(plug[static_cast<std::size_t>(root)] -
                                     sol.value[static_cast<std::size_t>(root)]);
        if (gap > tol) {
            std::ostringstream os;
            os << "single-stop plug-in gap " << gap << " at node '" << node_id(tree, root)
               << "' exceeds " << tol << " (operator likely violates a required axiom)";
            throw ViolationError(os.str());
        }
        SubSolve out;
        out.value = sol.value[static_cast<std::size_t>(root)];
        out.tuple.push_back(std::move(theta));
        return out;
    }

    // aux[i][m]: slot i exercised at m, the rest solved on the subtree of m.
    std::vector<AdaptedFamily> aux(static_cast<std::size_t>(d),
                                   AdaptedFamily(tree.size(), std::numeric_limits<double>::quiet_NaN()));
    for (std::size_t m = 0; m < tree.size(); ++m) {
        if (!mask[m]) continue;
        const int stage = tree.node(static_cast<int>(m)).stage;
        for (int i = 0; i < d; ++i)
            aux[static_cast<std::size_t>(i)][m] =
                solve_subtree(tree, ev, psi.freeze(i, stage), static_cast<int>(m), tol).value;
    }
    AdaptedFamily phi(tree.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t m = 0; m < tree.size(); ++m) {
        if (!mask[m]) continue;
        double best = aux[0][m];
        for (int i = 1; i < d; ++i) best = std::max(best, aux[static_cast<std::size_t>(i)][m]);
        phi[m] = best;
    }

    SnellSolution sol = snell_envelope_below(tree, ev, phi, root, kHitTol);
    StoppingTime theta = sol.optimal_from(StoppingTime::at_subtree(tree, root));

    std::vector<std::vector<std::uint8_t>> marks(static_cast<std::size_t>(d),
                                                 std::vector<std::uint8_t>(tree.size(), 0));
    for (std::size_t a = 0; a < tree.size(); ++a) {
        if (!mask[a] || !theta.is_frontier(static_cast<int>(a))) continue;
        int chosen = 0;
        while (phi[a] != aux[static_cast<std::size_t>(chosen)][a]) ++chosen;
        const int stage = tree.node(static_cast<int>(a)).stage;
        SubSolve inner =
            solve_subtree(tree, ev, psi.freeze(chosen, stage), static_cast<int>(a), tol);
        const std::vector<std::uint8_t> amask = tree.subtree_mask(static_cast<int>(a));
        int free_slot = 0;
        for (int j = 0; j < d; ++j) {
            if (j == chosen) {
                for (std::size_t m = 0; m < tree.size(); ++m)
                    if (amask[m]) marks[static_cast<std::size_t>(j)][m] = 1;
            } else {
                const StoppingTime& comp = inner.tuple[static_cast<std::size_t>(free_slot++)];
                for (std::size_t m = 0; m < tree.size(); ++m)
                    if (amask[m]) marks[static_cast<std::size_t>(j)][m] =
                        comp.stops_at(static_cast<int>(m)) ? 1 : 0;
            }
        }
    }

    SubSolve out;
    out.value = sol.value[static_cast<std::size_t>(root)];
    out.tuple.reserve(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j)
        out.tuple.emplace_back(tree, std::move(marks[static_cast<std::size_t>(j)]));

    const StoppingTime last = join_all(out.tuple);
    const std::vector<double> eta = payoff_on_frontier(psi, out.tuple, last, &mask);
    const std::vector<double> plug = evaluate_below(ev, root, last, eta);
    const double gap =
        std::fabs(plug[static_cast<std::size_t>(root)] - out.value);
    if (gap > tol) {
        std::ostringstream os;
        os << "plug-in gap " << gap << " for the assembled " << d << "-fold plan at node '"
           << node_id(tree, root) << "' exceeds " << tol
           << " (operator likely violates a required axiom)";
        throw ViolationError(os.str());
    }
    return out;
}

// aux families and their max over the whole tree.
struct Reduction {
    std::vector<AdaptedFamily> aux;
    AdaptedFamily phi;
};

Reduction reduce_all(const ScenarioTree& tree, const Evaluation& ev, const PayoffFamily& psi,
                     double tol) {
    const int d = psi.d();
    Reduction red;
    red.aux.assign(static_cast<std::size_t>(d), AdaptedFamily(tree.size(), 0.0));
    red.phi.assign(tree.size(), 0.0);
    for (std::size_t m = 0; m < tree.size(); ++m) {
        const int stage = tree.node(static_cast<int>(m)).stage;
        double best = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < d; ++i) {
            const double v =
                solve_subtree(tree, ev, psi.freeze(i, stage), static_cast<int>(m), tol).value;
            red.aux[static_cast<std::size_t>(i)][m] = v;
            best = std::max(best, v);
        }
        red.phi[m] = best;
    }
    return red;
}

void check_budget(const ScenarioTree& tree, int d, const SolveBudget& budget) {
    if (d > budget.max_d) {
        std::ostringstream os;
        os << "d = " << d << " exceeds the recursion budget (max " << budget.max_d << ")";
        throw BudgetError(os.str());
    }
    if (tree.stages() > budget.max_stages) {
        std::ostringstream os;
        os << tree.stages() << " stages exceed the recursion budget (max " << budget.max_stages
           << ")";
        throw BudgetError(os.str());
    }
}

void spot_check_flag(const ScenarioTree& tree, const Evaluation& ev, bool translation) {
    if (translation && !ev.flags().translation_invariant)
        throw SpecError("evaluation does not declare translation invariance");
    if (!translation && !ev.flags().positively_homogeneous)
        throw SpecError("evaluation does not declare positive homogeneity");
    // Cheap numeric confirmation on every interior node.
    std::uint64_t state = 0x9e3779b97f4a7c15ull;
    auto next_unit = [&state]() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return static_cast<double>(state >> 11) * 0x1.0p-53;
    };
    std::vector<double> y, y2;
    for (std::size_t m = 0; m < tree.size(); ++m) {
        const TreeNode& node = tree.node(static_cast<int>(m));
        if (node.children.empty()) continue;
        y.resize(node.children.size());
        y2.resize(node.children.size());
        for (std::size_t c = 0; c < y.size(); ++c) y[c] = 2.0 * next_unit() - 1.0;
        const double scale = translation ? (2.0 * next_unit() - 1.0) : 2.0 * next_unit();
        for (std::size_t c = 0; c < y.size(); ++c)
            y2[c] = translation ? y[c] + scale : scale * y[c];
        const double base = ev.kernel(tree, static_cast<int>(m), y);
        const double moved = ev.kernel(tree, static_cast<int>(m), y2);
        const double want = translation ? base + scale : scale * base;
        if (std::fabs(moved - want) > 1e-10 * (1.0 + std::fabs(want))) {
            std::ostringstream os;
            os << "declared " << (translation ? "translation invariance" : "positive homogeneity")
               << " fails a spot check at node '" << node.id << "' (|" << moved << " - " << want
               << "|)";
            throw SpecError(os.str());
        }
    }
}

} // namespace

DoubleReduction reduce_double(const ScenarioTree& tree, const Evaluation& ev,
                              const PayoffFamily& psi, double tol) {
    if (psi.d() != 2) throw SpecError("reduce_double needs a 2-exercise payoff family");
    Reduction red = reduce_all(tree, ev, psi, tol);
    DoubleReduction out;
    out.v1 = std::move(red.aux[1]); // second exercise taken at the assessment node
    out.v2 = std::move(red.aux[0]);
    out.phi = std::move(red.phi);
    out.envelope = snell_envelope(tree, ev, out.phi, kHitTol).value;
    return out;
}

MultiSolution solve_d(const ScenarioTree& tree, const Evaluation& ev, const PayoffFamily& psi,
                      int d, const StoppingTime& S, double tol, const SolveBudget& budget) {
    if (psi.d() != d) throw SpecError("payoff family arity does not match d");
    if (d < 2) throw SpecError("solve_d needs d >= 2");
    check_budget(tree, d, budget);

    Reduction red = reduce_all(tree, ev, psi, tol);
    SnellSolution sol = snell_envelope(tree, ev, red.phi, kHitTol);

    MultiSolution out{.d = d,
                      .value = sol.value,
                      .phi = red.phi,
                      .envelope = sol.value,
                      .aux = std::move(red.aux),
                      .theta = sol.optimal_from(S),
                      .regions = {},
                      .tuple = {},
                      .plugin_gap = 0.0};
    out.regions.assign(static_cast<std::size_t>(d), {});

    std::vector<std::vector<std::uint8_t>> marks(static_cast<std::size_t>(d),
                                                 std::vector<std::uint8_t>(tree.size(), 0));
    for (std::size_t a = 0; a < tree.size(); ++a) {
        if (!out.theta.is_frontier(static_cast<int>(a))) continue;
        int chosen = 0;
        while (out.phi[a] != out.aux[static_cast<std::size_t>(chosen)][a]) ++chosen;
        out.regions[static_cast<std::size_t>(chosen)].push_back(static_cast<int>(a));
        const int stage = tree.node(static_cast<int>(a)).stage;
        SubSolve inner =
            solve_subtree(tree, ev, psi.freeze(chosen, stage), static_cast<int>(a), tol);
        const std::vector<std::uint8_t> amask = tree.subtree_mask(static_cast<int>(a));
        int free_slot = 0;
        for (int j = 0; j < d; ++j) {
            if (j == chosen) {
                for (std::size_t m = 0; m < tree.size(); ++m)
                    if (amask[m]) marks[static_cast<std::size_t>(j)][m] = 1;
            } else {
                const StoppingTime& comp = inner.tuple[static_cast<std::size_t>(free_slot++)];
                for (std::size_t m = 0; m < tree.size(); ++m)
                    if (amask[m]) marks[static_cast<std::size_t>(j)][m] =
                        comp.stops_at(static_cast<int>(m)) ? 1 : 0;
            }
        }
    }
    for (int j = 0; j < d; ++j)
        out.tuple.emplace_back(tree, std::move(marks[static_cast<std::size_t>(j)]));

    const StoppingTime last = join_all(out.tuple);
    const std::vector<double> eta = payoff_on_frontier(psi, out.tuple, last, nullptr);
    const std::vector<double> plug = evaluate(ev, S, last, eta);
    for (std::size_t m = 0; m < tree.size(); ++m) {
        if (!S.is_frontier(static_cast<int>(m))) continue;
        out.plugin_gap = std::max(out.plugin_gap, std::fabs(plug[m] - out.envelope[m]));
    }
    if (out.plugin_gap > tol) {
        std::ostringstream os;
        os << "plug-in optimality failed: gap " << out.plugin_gap << " > " << tol
           << " at the assessment frontier (operator likely violates a required axiom)";
        throw ViolationError(os.str());
    }
    return out;
}

DoubleSolution solve_double(const ScenarioTree& tree, const Evaluation& ev,
                            const PayoffFamily& psi, const StoppingTime& S, double tol,
                            const SolveBudget& budget) {
    if (psi.d() != 2) throw SpecError("solve_double needs a 2-exercise payoff family");
    MultiSolution core = solve_d(tree, ev, psi, 2, S, tol, budget);

    DoubleSolution out{.value = std::move(core.value),
                       .v1 = std::move(core.aux[1]),
                       .v2 = std::move(core.aux[0]),
                       .phi = std::move(core.phi),
                       .envelope = std::move(core.envelope),
                       .theta = core.theta,
                       .theta1 = core.theta, // replaced below
                       .theta2 = core.theta,
                       .split = std::move(core.regions[0]),
                       .pair = {core.tuple[0], core.tuple[1]},
                       .plugin_gap = core.plugin_gap};

    // Optimal stops of the two frozen problems from theta, on every branch.
    std::vector<std::uint8_t> marks1(tree.size(), 0), marks2(tree.size(), 0);
    for (std::size_t a = 0; a < tree.size(); ++a) {
        if (!out.theta.is_frontier(static_cast<int>(a))) continue;
        const int stage = tree.node(static_cast<int>(a)).stage;
        SubSolve inner1 = solve_subtree(tree, ev, psi.freeze(1, stage), static_cast<int>(a), tol);
        SubSolve inner2 = solve_subtree(tree, ev, psi.freeze(0, stage), static_cast<int>(a), tol);
        const std::vector<std::uint8_t> amask = tree.subtree_mask(static_cast<int>(a));
        for (std::size_t m = 0; m < tree.size(); ++m) {
            if (!amask[m]) continue;
            marks1[m] = inner1.tuple[0].stops_at(static_cast<int>(m)) ? 1 : 0;
            marks2[m] = inner2.tuple[0].stops_at(static_cast<int>(m)) ? 1 : 0;
        }
    }
    out.theta1 = StoppingTime(tree, std::move(marks1));
    out.theta2 = StoppingTime(tree, std::move(marks2));
    return out;
}

CascadeSolution solve_symmetric_nested(const ScenarioTree& tree, const Evaluation& ev,
                                       const PayoffFamily& psi, int d, double tol,
                                       const SolveBudget& budget) {
    if (psi.d() != d) throw SpecError("payoff family arity does not match d");
    if (d < 1) throw SpecError("d must be >= 1");
    check_budget(tree, d, budget);
    if (!psi.symmetric()) throw SpecError("nested recursion needs a symmetric payoff family");

    // Spot-check the symmetry flag by sampling permutations.
    {
        std::uint64_t state = 0xdeadbeefcafef00dull;
        auto next = [&state]() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            return state;
        };
        for (int trial = 0; trial < 32; ++trial) {
            const int m = static_cast<int>(next() % tree.size());
            const int top = tree.node(m).stage;
            std::vector<int> stages(static_cast<std::size_t>(d));
            stages[0] = top;
            for (int i = 1; i < d; ++i)
                stages[static_cast<std::size_t>(i)] = static_cast<int>(next() % (top + 1));
            std::vector<int> shuffled = stages;
            for (std::size_t i = shuffled.size(); i > 1; --i)
                std::swap(shuffled[i - 1], shuffled[next() % i]);
            const double lhs = psi(m, stages);
            const double rhs = psi(m, shuffled);
            if (std::fabs(lhs - rhs) > 1e-12 * (1.0 + std::fabs(lhs)))
                throw SpecError("payoff family flagged symmetric fails a permutation spot check");
        }
    }

    // phi(i, m, K): value with i-1 earlier exercises at stages K (sorted) and
    // the i-th taken at m; phi(d, ...) is the payoff itself.
    std::map<std::vector<int>, double> memo; // key = {i, m, K...}
    std::function<double(int, int, const std::vector<int>&)> phi_value =
        [&](int i, int m, const std::vector<int>& earlier) -> double {
        std::vector<int> key;
        key.reserve(earlier.size() + 2);
        key.push_back(i);
        key.push_back(m);
        key.insert(key.end(), earlier.begin(), earlier.end());
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        if (memo.size() >= budget.max_nested_states)
            throw BudgetError("nested recursion state budget exceeded");

        std::vector<int> stages = earlier;
        stages.push_back(tree.node(m).stage);
        double result;
        if (i == d) {
            result = psi(m, stages);
        } else {
            const std::vector<std::uint8_t> mask = tree.subtree_mask(m);
            AdaptedFamily reward(tree.size(), std::numeric_limits<double>::quiet_NaN());
            for (std::size_t mm = 0; mm < tree.size(); ++mm)
                if (mask[mm]) reward[mm] = phi_value(i + 1, static_cast<int>(mm), stages);
            result = snell_envelope_below(tree, ev, reward, m, kHitTol)
                         .value[static_cast<std::size_t>(m)];
        }
        memo.emplace(std::move(key), result);
        return result;
    };

    CascadeSolution out;
    AdaptedFamily phi1(tree.size(), 0.0);
    const std::vector<int> empty;
    for (std::size_t m = 0; m < tree.size(); ++m)
        phi1[m] = phi_value(1, static_cast<int>(m), empty);
    out.stage_values.push_back(phi1);
    out.value = snell_envelope(tree, ev, phi1, kHitTol).value;
    (void)tol;
    return out;
}

CascadeSolution solve_cascade_additive(const ScenarioTree& tree, const Evaluation& ev,
                                       const AdaptedFamily& eta, int d, double tol) {
    if (eta.size() != tree.size()) throw SpecError("eta size does not match the tree");
    if (d < 1) throw SpecError("d must be >= 1");
    spot_check_flag(tree, ev, /*translation=*/true);
    (void)tol;

    CascadeSolution out;
    AdaptedFamily current;
    for (int step = 1; step < d; ++step) {
        AdaptedFamily reward = eta;
        if (step > 1)
            for (std::size_t m = 0; m < reward.size(); ++m) reward[m] += current[m];
        current = snell_envelope(tree, ev, reward, kHitTol).value;
        out.stage_values.push_back(current);
    }
    AdaptedFamily final_reward = eta;
    if (d > 1)
        for (std::size_t m = 0; m < final_reward.size(); ++m) final_reward[m] += current[m];
    out.value = snell_envelope(tree, ev, final_reward, kHitTol).value;
    return out;
}

CascadeSolution solve_cascade_multiplicative(const ScenarioTree& tree, const Evaluation& ev,
                                             const AdaptedFamily& eta, int d, double tol) {
    if (eta.size() != tree.size()) throw SpecError("eta size does not match the tree");
    if (d < 1) throw SpecError("d must be >= 1");
    for (double v : eta)
        if (!(v >= 0.0)) throw SpecError("multiplicative cascade needs eta >= 0");
    spot_check_flag(tree, ev, /*translation=*/false);
    (void)tol;

    CascadeSolution out;
    AdaptedFamily current;
    for (int step = 1; step < d; ++step) {
        AdaptedFamily reward = eta;
        if (step > 1)
            for (std::size_t m = 0; m < reward.size(); ++m) reward[m] *= current[m];
        current = snell_envelope(tree, ev, reward, kHitTol).value;
        out.stage_values.push_back(current);
    }
    AdaptedFamily final_reward = eta;
    if (d > 1)
        for (std::size_t m = 0; m < final_reward.size(); ++m) final_reward[m] *= current[m];
    out.value = snell_envelope(tree, ev, final_reward, kHitTol).value;
    return out;
}

NecessaryCertificate verify_necessary(const ScenarioTree& tree, const Evaluation& ev,
                                      const PayoffFamily& psi, int d,
                                      const std::vector<StoppingTime>& tuple,
                                      const StoppingTime& S, double tol,
                                      const SolveBudget& budget) {
    if (psi.d() != d || static_cast<int>(tuple.size()) != d)
        throw SpecError("tuple arity does not match the payoff family");
    if (!ev.flags().strictly_monotone)
        throw SpecError("necessary-condition certificate needs a strictly monotone evaluation");
    check_budget(tree, d, budget);
    for (const StoppingTime& t : tuple)
        if (!pathwise_leq(S, t)) throw SpecError("tuple component starts before the assessment time");

    Reduction red = reduce_all(tree, ev, psi, tol);
    SnellSolution sol = snell_envelope(tree, ev, red.phi, kHitTol);

    const StoppingTime earliest = meet_all(tuple);
    const StoppingTime latest = join_all(tuple);

    NecessaryCertificate cert;
    // (a) the earliest exercise attains the reduced envelope from S.
    const std::vector<double> plug_a = evaluate(ev, S, earliest, red.phi);
    for (std::size_t m = 0; m < tree.size(); ++m) {
        if (!S.is_frontier(static_cast<int>(m))) continue;
        cert.meet_gap = std::max(cert.meet_gap, std::fabs(plug_a[m] - sol.value[m]));
    }
    cert.meet_optimal = cert.meet_gap <= tol;

    // (b) on each earliest-frontier node, the remaining plan attains the aux
    // value of the slot that exercises there (smallest index).
    const std::vector<double> eta = payoff_on_frontier(psi, tuple, latest, nullptr);
    const std::vector<double> w = evaluate(ev, earliest, latest, eta);
    bool all_regions = true;
    for (std::size_t a = 0; a < tree.size(); ++a) {
        if (!earliest.is_frontier(static_cast<int>(a))) continue;
        int slot = 0;
        while (slot < d && !tuple[static_cast<std::size_t>(slot)].is_frontier(static_cast<int>(a)))
            ++slot;
        if (slot == d) throw SpecError("no tuple component stops at an earliest-frontier node");
        NecessaryCertificate::RegionCheck check;
        check.node = static_cast<int>(a);
        check.slot = slot;
        check.gap = std::fabs(w[a] - red.aux[static_cast<std::size_t>(slot)][a]);
        check.pass = check.gap <= tol;
        all_regions = all_regions && check.pass;
        cert.region_checks.push_back(check);
    }
    cert.pass = cert.meet_optimal && all_regions;
    return cert;
}

SupermartingaleReport check_supermartingale(const ScenarioTree& tree, const Evaluation& ev,
                                            const AdaptedFamily& V, std::size_t max_pairs,
                                            double tol) {
    if (V.size() != tree.size()) throw SpecError("family size does not match the tree");
    const std::vector<StoppingTime> thetas =
        enumerate_stopping_times(tree, StoppingTime::at_stage(tree, 0), EnumerationBudget{});

    std::vector<std::pair<std::size_t, std::size_t>> eligible;
    for (std::size_t i = 0; i < thetas.size(); ++i)
        for (std::size_t j = 0; j < thetas.size(); ++j)
            if (pathwise_leq(thetas[i], thetas[j])) eligible.emplace_back(i, j);

    const std::size_t stride =
        eligible.size() <= max_pairs ? 1 : (eligible.size() + max_pairs - 1) / max_pairs;

    SupermartingaleReport report;
    for (std::size_t k = 0; k < eligible.size(); k += stride) {
        const StoppingTime& sigma = thetas[eligible[k].first];
        const StoppingTime& tau = thetas[eligible[k].second];
        const std::vector<double> val = evaluate(ev, sigma, tau, V);
        ++report.pairs_checked;
        for (std::size_t m = 0; m < tree.size(); ++m) {
            if (!sigma.is_frontier(static_cast<int>(m))) continue;
            const double excess = val[m] - V[m];
            report.worst_violation = std::max(report.worst_violation, excess);
            if (excess > tol && report.pass) {
                report.pass = false;
                std::ostringstream os;
                os << "violation at node '" << node_id(tree, static_cast<int>(m)) << "': "
                   << val[m] << " > " << V[m] << " + " << tol << " (pair #" << k << ")";
                report.counterexample = os.str();
            }
        }
    }
    return report;
}

} // namespace multistop
