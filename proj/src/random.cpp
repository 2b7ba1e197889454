#include "multistop/random.hpp"

namespace multistop {

StoppingTime random_stopping_time(Rng& rng, const ScenarioTree& tree, const StoppingTime* floor,
                                  double stop_prob) {
    std::vector<std::uint8_t> marks(tree.size(), 0);
    for (std::size_t m = 0; m < tree.size(); ++m) marks[m] = rng.bernoulli(stop_prob) ? 1 : 0;
    StoppingTime t(tree, std::move(marks));
    if (floor) t = join(t, *floor);
    return t;
}

AdaptedFamily random_family(Rng& rng, const ScenarioTree& tree) {
    AdaptedFamily out(tree.size());
    for (std::size_t m = 0; m < tree.size(); ++m)
        out[m] = (1.0 + tree.node(static_cast<int>(m)).stage) * rng.uniform(-1.0, 1.0);
    return out;
}

std::vector<int> random_event(Rng& rng, const std::vector<int>& nodes, double keep_prob) {
    std::vector<int> out;
    for (int m : nodes)
        if (rng.bernoulli(keep_prob)) out.push_back(m);
    return out;
}

ScenarioTree random_tree(Rng& rng, int min_stages, int max_stages) {
    const int n = min_stages + static_cast<int>(rng.below(
                                   static_cast<std::uint64_t>(max_stages - min_stages + 1)));
    std::vector<ScenarioTree::NodeSpec> specs;
    struct Pending {
        std::string id;
        int stage;
        std::string parent;
        double p;
        double value;
    };
    std::vector<Pending> frontier{{"0", 0, "", 1.0, 1.0}};
    while (!frontier.empty()) {
        std::vector<Pending> next;
        for (const Pending& cur : frontier) {
            specs.push_back({cur.id, cur.stage, cur.parent, cur.p, cur.value});
            if (cur.stage == n) continue;
            const double p = rng.uniform(0.15, 0.85);
            const double up = rng.uniform(1.05, 1.6);
            const double down = rng.uniform(0.4, 0.95);
            next.push_back({cur.id + "u", cur.stage + 1, cur.id, p, cur.value * up});
            next.push_back({cur.id + "d", cur.stage + 1, cur.id, 1.0 - p, cur.value * down});
        }
        frontier = std::move(next);
    }
    return ScenarioTree::from_nodes(BermudanGrid::uniform(n), specs);
}

} // namespace multistop
