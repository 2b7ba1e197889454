#include "multistop/family.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

namespace multistop {

AdaptedFamily node_values(const ScenarioTree& tree) {
    AdaptedFamily out(tree.size());
    for (std::size_t m = 0; m < tree.size(); ++m) out[m] = tree.node(static_cast<int>(m)).value;
    return out;
}

AdaptedFamily call_payoff(const ScenarioTree& tree, double strike) {
    AdaptedFamily out(tree.size());
    for (std::size_t m = 0; m < tree.size(); ++m)
        out[m] = std::max(tree.node(static_cast<int>(m)).value - strike, 0.0);
    return out;
}

PayoffFamily::PayoffFamily(int d, EvalFn eval, bool symmetric, bool additive, bool multiplicative)
    : d_(d), eval_(std::move(eval)), symmetric_(symmetric), additive_(additive),
      multiplicative_(multiplicative) {
    if (d_ < 1) throw SpecError("payoff family needs d >= 1");
}

double PayoffFamily::operator()(int node, std::span<const int> stages) const {
    return eval_(node, stages);
}

PayoffFamily PayoffFamily::additive(const ScenarioTree& tree, AdaptedFamily eta, int d) {
    std::vector<double> weights(static_cast<std::size_t>(d), 1.0);
    PayoffFamily p = weighted_additive(tree, std::move(eta), std::move(weights));
    p.symmetric_ = true;
    p.additive_ = true;
    return p;
}

PayoffFamily PayoffFamily::weighted_additive(const ScenarioTree& tree, AdaptedFamily eta,
                                             std::vector<double> weights) {
    if (eta.size() != tree.size()) throw SpecError("eta size does not match the tree");
    const int d = static_cast<int>(weights.size());
    auto eta_ptr = std::make_shared<AdaptedFamily>(std::move(eta));
    auto w_ptr = std::make_shared<std::vector<double>>(std::move(weights));
    const bool symmetric =
        std::all_of(w_ptr->begin(), w_ptr->end(), [&](double w) { return w == w_ptr->front(); });
    auto fn = [&tree, eta_ptr, w_ptr](int node, std::span<const int> stages) {
        double acc = 0.0;
        for (std::size_t i = 0; i < stages.size(); ++i)
            acc += (*w_ptr)[i] * (*eta_ptr)[static_cast<std::size_t>(
                                      tree.ancestor_at(node, stages[i]))];
        return acc;
    };
    return PayoffFamily(d, std::move(fn), symmetric, symmetric, false);
}

PayoffFamily PayoffFamily::multiplicative(const ScenarioTree& tree, AdaptedFamily eta, int d) {
    if (eta.size() != tree.size()) throw SpecError("eta size does not match the tree");
    for (double v : eta)
        if (v < 0.0) throw SpecError("multiplicative reward needs eta >= 0");
    auto eta_ptr = std::make_shared<AdaptedFamily>(std::move(eta));
    auto fn = [&tree, eta_ptr](int node, std::span<const int> stages) {
        double acc = 1.0;
        for (int k : stages)
            acc *= (*eta_ptr)[static_cast<std::size_t>(tree.ancestor_at(node, k))];
        return acc;
    };
    return PayoffFamily(d, std::move(fn), true, false, true);
}

PayoffFamily PayoffFamily::constant(double c, int d) {
    return PayoffFamily(
        d, [c](int, std::span<const int>) { return c; }, true, false, false);
}

PayoffFamily PayoffFamily::table(const ScenarioTree& tree, int d,
                                 std::vector<TableEntry> entries, bool symmetric) {
    auto map = std::make_shared<std::map<std::pair<int, std::vector<int>>, double>>();
    for (auto& e : entries) {
        if (static_cast<int>(e.stages.size()) != d)
            throw SpecError("table entry stage tuple has the wrong arity");
        std::vector<int> key = e.stages;
        if (symmetric) std::sort(key.begin(), key.end());
        (*map)[{e.node, std::move(key)}] = e.value;
    }
    auto fn = [map, symmetric, &tree](int node, std::span<const int> stages) {
        std::vector<int> key(stages.begin(), stages.end());
        if (symmetric) std::sort(key.begin(), key.end());
        auto it = map->find({node, key});
        if (it == map->end()) {
            std::ostringstream os;
            os << "payoff table has no entry for node '" << tree.node(node).id << "' and stages (";
            for (std::size_t i = 0; i < key.size(); ++i) os << (i ? "," : "") << key[i];
            os << ")";
            throw SpecError(os.str());
        }
        return it->second;
    };
    return PayoffFamily(d, std::move(fn), symmetric, false, false);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

} // namespace

PayoffFamily PayoffFamily::random_table(const ScenarioTree& tree, int d, std::uint64_t seed) {
    (void)tree;
    auto fn = [seed](int node, std::span<const int> stages) {
        std::uint64_t h = splitmix64(seed ^ (static_cast<std::uint64_t>(node) << 32));
        for (int k : stages) h = splitmix64(h ^ static_cast<std::uint64_t>(k + 1));
        // Uniform in [-1, 2).
        return -1.0 + 3.0 * (static_cast<double>(h >> 11) * 0x1.0p-53);
    };
    return PayoffFamily(d, std::move(fn), false, false, false);
}

PayoffFamily PayoffFamily::freeze(int slot, int stage) const {
    if (d_ < 2) throw SpecError("cannot freeze a slot of a single-exercise payoff");
    if (slot < 0 || slot >= d_) throw SpecError("freeze slot out of range");
    EvalFn base = eval_;
    const int d = d_;
    auto fn = [base, slot, stage, d](int node, std::span<const int> stages) {
        std::vector<int> full(static_cast<std::size_t>(d));
        int j = 0;
        for (int i = 0; i < d; ++i) full[static_cast<std::size_t>(i)] = (i == slot) ? stage : stages[static_cast<std::size_t>(j++)];
        return base(node, full);
    };
    return PayoffFamily(d_ - 1, std::move(fn), symmetric_, false, false);
}

std::vector<double> payoff_at(const PayoffFamily& psi, const std::vector<StoppingTime>& tuple) {
    if (tuple.empty() || static_cast<int>(tuple.size()) != psi.d())
        throw SpecError("tuple arity does not match the payoff family");
    const ScenarioTree& tree = tuple.front().tree();
    StoppingTime last = tuple.front();
    for (std::size_t i = 1; i < tuple.size(); ++i) last = join(last, tuple[i]);

    std::vector<double> eta(tree.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<int> stages(tuple.size());
    for (std::size_t m = 0; m < tree.size(); ++m) {
        if (!last.is_frontier(static_cast<int>(m))) continue;
        for (std::size_t i = 0; i < tuple.size(); ++i) {
            stages[i] = tuple[i].stop_stage_at(static_cast<int>(m));
            if (stages[i] < 0)
                throw SpecError("tuple component has not stopped at the joint exercise node");
        }
        eta[m] = psi(static_cast<int>(m), stages);
    }
    return eta;
}

} // namespace multistop
