// Randomized search for an instance whose model price sits strictly below
// the superhedging price: two-period trees with one statically traded
// option and a once-exercisable claim with per-node exercise values.
// Prints every hit as a pair of config documents plus the observed gap.
#include <cmath>
#include <iostream>
#include <random>

#include "rshedge/duality.hpp"

using namespace rshedge;
using nlohmann::json;

namespace {

struct Candidate {
    json market;
    json actions;
    Rat gap;
    Rat naive, primal;
};

json build_actions_table(const MarketModel& m, const std::vector<Rat>& exercise_value,
                         const PlanIndexer& plans) {
    const auto& t = m.tree;
    json tbl = json::object();
    ActionSpace space = make_action_space({"0", "1"});
    for (int leaf : t.leaves()) {
        for (long p = 0; p < plans.count; ++p) {
            Plan plan = plans.to_plan(p);
            int count = 0, when = -1;
            for (std::size_t k = 0; k < plan.size(); ++k)
                if (plan[k] == 1) {
                    ++count;
                    if (when < 0) when = static_cast<int>(k);
                }
            std::string key = t.key(leaf) + "|" + plan_key(plan, space);
            if (count > 1) {
                tbl[key] = "-inf";
            } else if (count == 0) {
                tbl[key] = "0";
            } else {
                tbl[key] = rat_to_string(exercise_value[t.prefix_of(leaf, when)]);
            }
        }
    }
    return json{{"actions", {"0", "1"}},
                {"constraints", json::array()},
                {"payoff", {{"kind", "table"}, {"values", tbl}}}};
}

}  // namespace

int main(int argc, char** argv) {
    unsigned long seed = argc > 1 ? std::stoul(argv[1]) : 202508;
    int max_trials = argc > 2 ? std::stoi(argv[2]) : 20000;
    std::mt19937_64 rng(seed);
    auto coin = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };

    int found = 0;
    for (int trial = 0; trial < max_trials; ++trial) {
        // tree shape: trinomial first step keeps the measure set fat
        const int b1 = 3, b2 = coin(2, 3);
        std::vector<std::vector<std::string>> labels(2);
        for (int i = 0; i < b1; ++i) labels[0].push_back(std::string(1, 'a' + i));
        for (int i = 0; i < b2; ++i) labels[1].push_back(std::string(1, 'a' + i));
        auto tree = build_tree(2, labels);

        // asset values: integer walk with mixed-sign increments
        std::vector<int> S(tree.nodes.size(), 0);
        S[0] = coin(3, 6);
        bool ok = true;
        for (int d = 0; d < 2 && ok; ++d)
            for (int v : tree.by_depth[d]) {
                bool has_up = false, has_dn = false;
                for (int b = 0; b < tree.num_branches(v); ++b) {
                    int inc = coin(-2, 2);
                    S[tree.child(v, b)] = S[v] + inc;
                    has_up = has_up || inc >= 0;
                    has_dn = has_dn || inc <= 0;
                }
                ok = ok && has_up && has_dn;
            }
        if (!ok) continue;

        json mdoc;
        mdoc["horizon"] = 2;
        mdoc["branches"] = labels;
        json vals = json::object();
        for (std::size_t v = 0; v < tree.nodes.size(); ++v)
            vals[tree.key(static_cast<int>(v))] =
                json::array({std::to_string(S[v])});
        mdoc["assets"] = {{"dimension", 1}, {"values", vals}};
        json priors = json::object();
        for (int d = 0; d < 2; ++d)
            for (int v : tree.by_depth[d]) {
                const int nb = tree.num_branches(v);
                json kernels = json::array();
                const int nk = coin(1, 2);
                for (int k = 0; k < nk; ++k) {
                    std::vector<int> w(nb);
                    int tot = 0;
                    for (int b = 0; b < nb; ++b) {
                        w[b] = coin(1, 4);
                        tot += w[b];
                    }
                    json kern = json::array();
                    for (int b = 0; b < nb; ++b)
                        kern.push_back(rat_to_string(Rat(w[b], tot)));
                    kernels.push_back(std::move(kern));
                }
                priors[tree.key(v)] = std::move(kernels);
            }
        mdoc["priors"] = priors;
        mdoc["static_options"] = json::array();

        MarketModel m0 = load_market(mdoc);
        auto sup0 = support_structure(m0);
        // reference martingale measure from the per-node polytope witnesses
        std::vector<Rat> q0(m0.tree.leaf_count(), Rat(0));
        {
            bool feasible = true;
            std::vector<std::vector<Rat>> kernel(m0.tree.nodes.size());
            for (int d = 0; d < 2 && feasible; ++d)
                for (int v : m0.tree.by_depth[d]) {
                    auto p = one_step_martingale_polytope(m0, sup0, v);
                    if (p.empty) {
                        feasible = false;
                        break;
                    }
                    kernel[v].assign(m0.tree.num_branches(v), Rat(0));
                    for (std::size_t i = 0; i < p.support.size(); ++i)
                        kernel[v][p.support[i]] = p.witness[i];
                }
            if (!feasible) continue;
            for (int leaf : m0.tree.leaves()) {
                Rat w = 1;
                int cur = leaf;
                while (cur != m0.tree.root()) {
                    w *= kernel[m0.tree.nodes[cur].parent][m0.tree.nodes[cur].branch];
                    cur = m0.tree.nodes[cur].parent;
                }
                q0[m0.tree.leaf_local(leaf)] = w;
            }
        }
        // calibrated static option: raw payoff recentred under q0
        std::vector<Rat> g(m0.tree.leaf_count());
        Rat mean = 0;
        for (int i = 0; i < m0.tree.leaf_count(); ++i) {
            g[i] = Rat(coin(-3, 3));
            mean += q0[i] * g[i];
        }
        json pay = json::object();
        for (int i = 0; i < m0.tree.leaf_count(); ++i)
            pay[m0.tree.key(m0.tree.leaves()[i])] = rat_to_string(g[i] - mean);
        mdoc["static_options"] = json::array({json{{"payoff", pay}}});

        // exercise values per node
        std::vector<Rat> ev(m0.tree.nodes.size());
        for (std::size_t v = 0; v < m0.tree.nodes.size(); ++v) ev[v] = Rat(coin(0, 5));
        PlanIndexer plans(2, 3);
        json adoc = build_actions_table(m0, ev, plans);

        try {
            MarketModel m = load_market(mdoc);
            auto sup = support_structure(m);
            BoundPayoff bp(m, sup, load_actions(adoc));
            auto na = check_na(bp, SpaceTag::Original);
            if (!na.holds) continue;
            auto naive = naive_model_price(bp);
            auto primal = superhedge_primal_original(bp);
            if (!naive.price.finite() || !primal.price.finite()) continue;
            Rat gap = primal.price.val() - naive.price.val();
            if (gap < Rat(1, 100)) continue;
            auto dyn = dynamic_extension_check(bp);
            std::cout << "=== trial " << trial << " gap " << rat_to_string(gap)
                      << " naive " << naive.price.str() << " primal "
                      << primal.price.str() << " dynamic-extension "
                      << (dyn.passed() ? "pass" : "FAIL") << "\n";
            std::cout << "--- market\n" << mdoc.dump(2) << "\n--- actions\n"
                      << adoc.dump(2) << "\n";
            if (++found >= 3) return 0;
        } catch (const std::exception& e) {
            std::cerr << "trial " << trial << " error: " << e.what() << "\n";
        }
    }
    std::cout << "found " << found << " instances\n";
    return found > 0 ? 0 : 1;
}
