#include "multistop/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace multistop {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_count(std::size_t count, std::size_t budget, const char* what) {
    if (count > budget) {
        std::ostringstream os;
        os << what << " count " << count << " exceeds the enumeration budget " << budget;
        throw BudgetError(os.str());
    }
}

// Number of canonical stop-markings of the subtree of m (stop at m, or
// continue and choose independently per child subtree).
std::size_t count_subtree_plans(const ScenarioTree& tree, int m, std::size_t budget) {
    if (tree.is_terminal(m)) return 1;
    std::size_t product = 1;
    for (int c : tree.node(m).children) {
        const std::size_t sub = count_subtree_plans(tree, c, budget);
        if (product > budget / sub + 1) check_count(budget + 1, budget, "stopping-time");
        product *= sub;
        check_count(product, budget, "stopping-time");
    }
    check_count(product + 1, budget, "stopping-time");
    return product + 1;
}

// All stop-markings of the subtree of m, as masks over the whole tree with
// only subtree entries set. Stop-at-m comes first.
std::vector<std::vector<std::uint8_t>> subtree_plans(const ScenarioTree& tree, int m,
                                                     std::size_t budget) {
    const std::vector<std::uint8_t> mask = tree.subtree_mask(m);
    std::vector<std::vector<std::uint8_t>> plans;

    std::vector<std::uint8_t> stop_here(tree.size(), 0);
    for (std::size_t k = 0; k < tree.size(); ++k) stop_here[k] = mask[k];
    plans.push_back(std::move(stop_here));
    if (tree.is_terminal(m)) return plans;

    std::vector<std::vector<std::vector<std::uint8_t>>> per_child;
    for (int c : tree.node(m).children) per_child.push_back(subtree_plans(tree, c, budget));

    std::vector<std::size_t> odo(per_child.size(), 0);
    while (true) {
        std::vector<std::uint8_t> combined(tree.size(), 0);
        for (std::size_t ci = 0; ci < per_child.size(); ++ci) {
            const std::vector<std::uint8_t>& choice = per_child[ci][odo[ci]];
            for (std::size_t k = 0; k < tree.size(); ++k) combined[k] |= choice[k];
        }
        plans.push_back(std::move(combined));
        check_count(plans.size(), budget, "stopping-time");

        std::size_t pos = 0;
        while (pos < odo.size()) {
            if (++odo[pos] < per_child[pos].size()) break;
            odo[pos] = 0;
            ++pos;
        }
        if (pos == odo.size()) break;
    }
    return plans;
}

} // namespace

std::size_t count_stopping_times(const ScenarioTree& tree, const StoppingTime& S,
                                 const EnumerationBudget& budget) {
    std::size_t total = 1;
    for (int a : S.frontier()) {
        const std::size_t sub = count_subtree_plans(tree, a, budget.max_stopping_times);
        if (total > budget.max_stopping_times / sub + 1)
            check_count(budget.max_stopping_times + 1, budget.max_stopping_times, "stopping-time");
        total *= sub;
        check_count(total, budget.max_stopping_times, "stopping-time");
    }
    return total;
}

std::vector<StoppingTime> enumerate_stopping_times(const ScenarioTree& tree, const StoppingTime& S,
                                                   const EnumerationBudget& budget) {
    const std::size_t total = count_stopping_times(tree, S, budget);
    (void)total;

    const std::vector<int> frontier = S.frontier();
    std::vector<std::vector<std::vector<std::uint8_t>>> per_root;
    per_root.reserve(frontier.size());
    for (int a : frontier) per_root.push_back(subtree_plans(tree, a, budget.max_stopping_times));

    std::vector<StoppingTime> out;
    std::vector<std::size_t> odo(per_root.size(), 0);
    while (true) {
        std::vector<std::uint8_t> marks(tree.size(), 0);
        for (std::size_t ri = 0; ri < per_root.size(); ++ri) {
            const std::vector<std::uint8_t>& choice = per_root[ri][odo[ri]];
            for (std::size_t k = 0; k < tree.size(); ++k) marks[k] |= choice[k];
        }
        out.emplace_back(tree, std::move(marks));
        check_count(out.size(), budget.max_stopping_times, "stopping-time");

        std::size_t pos = 0;
        while (pos < odo.size()) {
            if (++odo[pos] < per_root[pos].size()) break;
            odo[pos] = 0;
            ++pos;
        }
        if (pos == odo.size()) break;
    }
    return out;
}

OracleResult brute_force_value(const ScenarioTree& tree, const Evaluation& ev,
                               const PayoffFamily& psi, int d, const StoppingTime& S,
                               const EnumerationBudget& budget, std::size_t max_argmax_per_node) {
    if (psi.d() != d) throw SpecError("payoff family arity does not match d");
    if (d < 1) throw SpecError("d must be >= 1");

    const std::vector<StoppingTime> thetas = enumerate_stopping_times(tree, S, budget);
    const std::size_t count = thetas.size();
    std::size_t tuples = 1;
    for (int i = 0; i < d; ++i) {
        if (tuples > budget.max_tuples / count + 1)
            check_count(budget.max_tuples + 1, budget.max_tuples, "tuple");
        tuples *= count;
        check_count(tuples, budget.max_tuples, "tuple");
    }

    // Per-strategy caches: marks and the stage at which the strategy stops on
    // the path to each node (-1 if not yet stopped).
    const std::size_t N = tree.size();
    std::vector<std::vector<std::uint8_t>> marks(count, std::vector<std::uint8_t>(N, 0));
    std::vector<std::vector<int>> stop_stage(count, std::vector<int>(N, -1));
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t m = 0; m < N; ++m) {
            marks[i][m] = thetas[i].stops_at(static_cast<int>(m)) ? 1 : 0;
            if (!marks[i][m]) continue;
            const int parent = tree.node(static_cast<int>(m)).parent;
            stop_stage[i][m] = (parent >= 0 && marks[i][static_cast<std::size_t>(parent)])
                                   ? stop_stage[i][static_cast<std::size_t>(parent)]
                                   : tree.node(static_cast<int>(m)).stage;
        }
    }

    std::vector<std::uint8_t> in_region(N, 0);
    for (std::size_t m = 0; m < N; ++m) in_region[m] = S.stops_at(static_cast<int>(m)) ? 1 : 0;

    OracleResult result;
    result.strategy_count = count;
    result.frontier = S.frontier();
    result.value.assign(result.frontier.size(), -std::numeric_limits<double>::infinity());
    result.argmax.assign(result.frontier.size(), {});
    result.argmax_count.assign(result.frontier.size(), 0);

    std::vector<int> frontier_slot(N, -1);
    for (std::size_t f = 0; f < result.frontier.size(); ++f)
        frontier_slot[static_cast<std::size_t>(result.frontier[f])] = static_cast<int>(f);

    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    std::vector<double> Y(N, kNaN);
    std::vector<double> child_buf;
    int stages_buf[16];

    auto all_stopped = [&](std::size_t mm) {
        for (int i = 0; i < d; ++i)
            if (!marks[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])][mm]) return false;
        return true;
    };

    while (true) {
        ++result.tuple_count;
        // Backward pass clipped at the tuple's pathwise-latest stop.
        for (int m = static_cast<int>(N) - 1; m >= 0; --m) {
            const std::size_t mm = static_cast<std::size_t>(m);
            if (!in_region[mm]) continue;
            const TreeNode& node = tree.node(m);
            if (all_stopped(mm)) {
                const bool below_frontier =
                    node.parent >= 0 && all_stopped(static_cast<std::size_t>(node.parent));
                if (below_frontier) {
                    Y[mm] = kNaN;
                } else {
                    for (int i = 0; i < d; ++i)
                        stages_buf[i] =
                            stop_stage[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])][mm];
                    Y[mm] = psi(m, std::span<const int>(stages_buf, static_cast<std::size_t>(d)));
                }
            } else {
                child_buf.resize(node.children.size());
                for (std::size_t c = 0; c < node.children.size(); ++c)
                    child_buf[c] = Y[static_cast<std::size_t>(node.children[c])];
                Y[mm] = ev.kernel(tree, m, child_buf);
            }
        }

        for (std::size_t f = 0; f < result.frontier.size(); ++f) {
            const double v = Y[static_cast<std::size_t>(result.frontier[f])];
            if (v > result.value[f]) {
                result.value[f] = v;
                result.argmax[f].clear();
                result.argmax_count[f] = 0;
            }
            if (v == result.value[f]) {
                ++result.argmax_count[f];
                if (result.argmax[f].size() < max_argmax_per_node)
                    result.argmax[f].emplace_back(idx.begin(), idx.end());
            }
        }

        int pos = 0;
        while (pos < d) {
            if (++idx[static_cast<std::size_t>(pos)] < static_cast<int>(count)) break;
            idx[static_cast<std::size_t>(pos)] = 0;
            ++pos;
        }
        if (pos == d) break;
    }
    return result;
}

DirectedUpwardsReport check_directed_upwards(const ScenarioTree& tree, const Evaluation& ev,
                                             const PayoffFamily& psi, int d, const StoppingTime& S,
                                             std::size_t samples, std::uint64_t seed,
                                             const EnumerationBudget& budget) {
    const std::vector<StoppingTime> thetas = enumerate_stopping_times(tree, S, budget);
    const std::size_t count = thetas.size();

    std::size_t tuples = 1;
    bool exhaustive = true;
    for (int i = 0; i < 2 * d; ++i) {
        tuples *= count;
        if (tuples > samples) {
            exhaustive = false;
            break;
        }
    }

    std::uint64_t state = seed ^ 0x2545f4914f6cdd1dull;
    auto next = [&state]() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return state;
    };

    auto tuple_value = [&](const std::vector<StoppingTime>& tuple) {
        StoppingTime last = tuple.front();
        for (std::size_t i = 1; i < tuple.size(); ++i) last = join(last, tuple[i]);
        return evaluate(ev, S, last, payoff_at(psi, tuple));
    };

    DirectedUpwardsReport report;
    const std::vector<int> frontier = S.frontier();

    const std::size_t total = exhaustive ? tuples : samples;
    std::vector<int> digits(static_cast<std::size_t>(2 * d), 0);
    for (std::size_t trial = 0; trial < total; ++trial) {
        if (exhaustive) {
            std::size_t code = trial;
            for (std::size_t i = 0; i < digits.size(); ++i) {
                digits[i] = static_cast<int>(code % count);
                code /= count;
            }
        } else {
            for (std::size_t i = 0; i < digits.size(); ++i)
                digits[i] = static_cast<int>(next() % count);
        }
        std::vector<StoppingTime> first, second;
        for (int i = 0; i < d; ++i) first.push_back(thetas[static_cast<std::size_t>(digits[static_cast<std::size_t>(i)])]);
        for (int i = 0; i < d; ++i)
            second.push_back(thetas[static_cast<std::size_t>(digits[static_cast<std::size_t>(d + i)])]);

        const std::vector<double> val_first = tuple_value(first);
        const std::vector<double> val_second = tuple_value(second);

        std::vector<int> event; // frontier nodes where the first plan dominates
        for (int a : frontier)
            if (val_second[static_cast<std::size_t>(a)] <= val_first[static_cast<std::size_t>(a)])
                event.push_back(a);

        std::vector<StoppingTime> pasted;
        for (int i = 0; i < d; ++i)
            pasted.push_back(paste_at(S, event, first[static_cast<std::size_t>(i)],
                                      second[static_cast<std::size_t>(i)]));
        const std::vector<double> val_pasted = tuple_value(pasted);

        ++report.pairs_checked;
        for (int a : frontier) {
            const std::size_t aa = static_cast<std::size_t>(a);
            const double expected = std::max(val_first[aa], val_second[aa]);
            if (val_pasted[aa] != expected) {
                report.pass = false;
                if (report.counterexample.empty()) {
                    std::ostringstream os;
                    os << "pasted plan value " << val_pasted[aa] << " != max " << expected
                       << " at node '" << tree.node(a).id << "' (trial " << trial << ")";
                    report.counterexample = os.str();
                }
            }
        }
    }
    return report;
}

} // namespace multistop
