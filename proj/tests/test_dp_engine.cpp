#include <doctest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rshedge/dp_engine.hpp"
#include "rshedge/duality.hpp"

using namespace rshedge;
using nlohmann::json;

TEST_CASE("terminal operator on BIN2 american put") {
    auto inst = fixtures::bin2_amput();
    const auto& t = inst.market.tree;
    const int dd = t.leaf_local(t.node_by_key("d/d"));
    // prefix (0,0): max over final action of {0, 2} = 2
    long pref = inst.bound.plans().from_plan({0, 0});
    CHECK(terminal_op(inst.bound, dd, pref) == XR(Rat(2)));
    // prefix (1,1): every completion already used two exercises
    long pref11 = inst.bound.plans().from_plan({1, 1});
    CHECK(terminal_op(inst.bound, dd, pref11) == XR::neg_inf());
}

TEST_CASE("terminal operator with a single action is plain evaluation") {
    auto mdoc = fixtures::bin2_market();
    auto adoc = json::parse(R"({
      "actions": ["0"],
      "constraints": [],
      "payoff": {"kind": "american_put", "strike": "4"}
    })");
    auto inst = fixtures::make_instance(mdoc, adoc);
    for (int leaf = 0; leaf < 4; ++leaf)
        CHECK(terminal_op(inst.bound, leaf, 0) == inst.bound.phi(leaf, 0));
}

TEST_CASE("one-step values on BIN2 american put") {
    auto inst = fixtures::bin2_amput();
    auto r = backward_induction(inst.bound);
    const auto& t = inst.market.tree;
    const auto& atoms = r.table.atoms;
    const int d = t.node_by_key("d");
    // at node d with no exercise yet: both actions are worth 1
    long pref0 = inst.bound.plans().prefix_of(inst.bound.plans().from_plan({0, 0, 0}), 1);
    CHECK(r.table.minus[1][atoms.minus_id(d, pref0)] == XR(Rat(1)));
    CHECK(r.value == XR(Rat(1, 2)));
    CHECK(r.table.minus[0][0] == XR(Rat(1, 2)));
}

TEST_CASE("one-step value is translation invariant at constants") {
    auto m = load_market(fixtures::bin2_market());
    auto s = support_structure(m);
    for (const Rat& c : {Rat(3), Rat(-7, 2), Rat(0)}) {
        std::vector<std::vector<XR>> next = {{XR(c), XR(c)}, {XR(c), XR(c)}};
        CHECK(one_step_value(m, s, m.tree.root(), next) == XR(c));
    }
}

TEST_CASE("backward induction trivia") {
    SUBCASE("constant payoff prices at the constant") {
        auto adoc = json::parse(R"({
          "actions": ["a","b"],
          "constraints": [],
          "payoff": {"kind": "table", "values": {}, "default": "5/7"}
        })");
        auto inst = fixtures::make_instance(fixtures::bin2_market(), adoc);
        CHECK(backward_induction(inst.bound).value == XR(Rat(5, 7)));
    }
    SUBCASE("terminal asset with one action prices at the spot") {
        json values = json::object();
        auto tree = build_tree(2, {{"u", "d"}, {"u", "d"}});
        auto mdoc = fixtures::bin2_market();
        // payoff table phi = S_2
        json tbl = json::object();
        auto m = load_market(mdoc);
        for (int leaf : m.tree.leaves())
            tbl[m.tree.key(leaf) + "|0/0/0"] = rat_to_string(m.asset[leaf][0]);
        json adoc = {{"actions", {"0"}},
                     {"constraints", json::array()},
                     {"payoff", {{"kind", "table"}, {"values", tbl}}}};
        auto inst = fixtures::make_instance(mdoc, adoc);
        CHECK(backward_induction(inst.bound).value == XR(Rat(4)));
    }
}

namespace {

// Direct tail-form evaluation: max over full action tails and products of
// vertex kernels of the expected payoff, no one-step composition.
XR tail_sup_value(const fixtures::Instance& inst, int node, long prefix_id) {
    const auto& m = inst.market;
    const auto& t = m.tree;
    const auto& bp = inst.bound;
    const int k = t.nodes[node].depth;
    const int N = t.horizon;
    const int A = bp.model().actions.size();
    const long tails = bp.plans().prefix_count(N + 1 - k);

    // collect subtree non-leaf nodes below (and incl.) `node`
    std::vector<int> inner;
    std::vector<int> stack = {node};
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        if (t.is_leaf(v)) continue;
        inner.push_back(v);
        for (int b : inst.sup.succ_support[v]) stack.push_back(t.child(v, b));
    }
    // vertex sets per inner node
    std::vector<std::vector<std::vector<Rat>>> verts(inner.size());
    for (std::size_t i = 0; i < inner.size(); ++i) {
        std::vector<std::vector<Rat>> dS;
        for (int b : inst.sup.succ_support[inner[i]])
            dS.push_back(m.delta_S(t.child(inner[i], b)));
        verts[i] = oracles::martingale_polytope_vertices(dS);
        if (verts[i].empty()) return XR::neg_inf();  // no martingale measure below
    }
    auto index_of = [&](int v) {
        return std::find(inner.begin(), inner.end(), v) - inner.begin();
    };

    XR best = XR::neg_inf();
    std::vector<std::size_t> pick(inner.size(), 0);
    while (true) {
        for (long tail = 0; tail < tails; ++tail) {
            // full plan id: prefix then tail digits
            long plan = prefix_id;
            for (int j = 0; j < N + 1 - k; ++j)
                plan = bp.plans().extend(plan, k + j,
                                         (tail / bp.plans().prefix_count(j)) % A);
            // expectation under the product of chosen vertices
            std::function<XR(int, Rat)> walk = [&](int v, Rat mass) -> XR {
                if (t.is_leaf(v)) {
                    XR phi = bp.phi(t.leaf_local(v), plan);
                    if (!phi.finite()) return XR::neg_inf();
                    return XR(mass * phi.val());
                }
                const auto& q = verts[index_of(v)][pick[index_of(v)]];
                Rat acc = 0;
                for (std::size_t bi = 0; bi < inst.sup.succ_support[v].size(); ++bi) {
                    if (sgn(q[bi]) == 0) continue;
                    XR sub = walk(t.child(v, inst.sup.succ_support[v][bi]), mass * q[bi]);
                    if (!sub.finite()) return XR::neg_inf();
                    acc += sub.val();
                }
                return XR(acc);
            };
            best = XR::max(best, walk(node, Rat(1)));
        }
        std::size_t i = 0;
        while (i < pick.size() && pick[i] == verts[i].size() - 1) pick[i++] = 0;
        if (i == pick.size()) break;
        ++pick[i];
    }
    return best;
}

}  // namespace

TEST_CASE("composed one-step operators equal the direct tail-sup form") {
    std::vector<std::pair<json, json>> cases;
    cases.push_back({fixtures::bin2_market(), fixtures::amput_actions()});
    {
        auto mdoc = json::parse(R"({
          "horizon": 2,
          "branches": [["a","b","c"],["u","d"]],
          "assets": {"dimension": 1, "values": {
            "": ["4"], "a": ["6"], "b": ["4"], "c": ["3"],
            "a/u": ["7"], "a/d": ["5"], "b/u": ["5"], "b/d": ["3"],
            "c/u": ["4"], "c/d": ["2"]}},
          "priors": {"": [["1/3","1/3","1/3"],["1/2","0","1/2"]],
                     "a": [["1/2","1/2"]], "b": [["2/3","1/3"]], "c": [["1/2","1/2"]]},
          "static_options": []
        })");
        auto adoc = json::parse(R"({
          "actions": ["0","1"],
          "constraints": [{"kind": "per_period_cap", "cap": "1"}],
          "payoff": {"kind": "american_put", "strike": "5", "max_exercises": "2"}
        })");
        cases.push_back({mdoc, adoc});
    }
    for (const auto& [mdoc, adoc] : cases) {
        auto inst = fixtures::make_instance(mdoc, adoc);
        auto r = backward_induction(inst.bound);
        const auto& t = inst.market.tree;
        for (int k = 0; k <= t.horizon; ++k) {
            const long pc = inst.bound.plans().prefix_count(k);
            for (int node : t.by_depth[k]) {
                if (!inst.sup.node_reachable[node]) continue;
                for (long pref = 0; pref < pc; ++pref) {
                    CHECK(r.table.minus[k][r.table.atoms.minus_id(node, pref)] ==
                          tail_sup_value(inst, node, pref));
                }
            }
        }
    }
}

TEST_CASE("swapping action and measure suprema never changes one-step values") {
    auto inst = fixtures::bin2_amput();
    auto r = backward_induction(inst.bound);
    const auto& m = inst.market;
    const auto& t = m.tree;
    const int A = inst.bound.model().actions.size();
    for (int k = 0; k < t.horizon; ++k) {
        const long pc = inst.bound.plans().prefix_count(k);
        for (int node : t.by_depth[k]) {
            if (!inst.sup.node_reachable[node]) continue;
            std::vector<std::vector<Rat>> dS;
            for (int b : inst.sup.succ_support[node])
                dS.push_back(m.delta_S(t.child(node, b)));
            auto verts = oracles::martingale_polytope_vertices(dS);
            for (long pref = 0; pref < pc; ++pref) {
                std::vector<std::vector<XR>> next(A);
                for (int a = 0; a < A; ++a) {
                    next[a].assign(t.num_branches(node), XR::neg_inf());
                    const long np = inst.bound.plans().extend(pref, k, a);
                    for (int b : inst.sup.succ_support[node])
                        next[a][b] =
                            r.table.minus[k + 1]
                                         [r.table.atoms.minus_id(t.child(node, b), np)];
                }
                // sup_a sup_q
                XR order1 = one_step_value(m, inst.sup, node, next);
                // sup_q sup_a over polytope vertices
                XR order2 = XR::neg_inf();
                for (const auto& q : verts) {
                    XR inner = XR::neg_inf();
                    for (int a = 0; a < A; ++a) {
                        Rat acc = 0;
                        bool ok = true;
                        for (std::size_t bi = 0; bi < inst.sup.succ_support[node].size();
                             ++bi) {
                            if (sgn(q[bi]) == 0) continue;
                            const XR& v = next[a][inst.sup.succ_support[node][bi]];
                            if (!v.finite()) {
                                ok = false;
                                break;
                            }
                            acc += q[bi] * v.val();
                        }
                        if (ok) inner = XR::max(inner, XR(acc));
                    }
                    order2 = XR::max(order2, inner);
                }
                CHECK(order1 == order2);
            }
        }
    }
}

TEST_CASE("extracted policy achieves the dynamic value") {
    auto inst = fixtures::bin2_amput();
    auto r = backward_induction(inst.bound);
    auto pol = extract_policy(inst.bound, r.table);
    CHECK(pol.epsilon == 0);
    auto chi = pol.to_action_policy(inst.bound);
    CHECK(policy_value(inst.bound, chi) == r.value);
    // brute force over all 128 policies agrees
    auto all = enumerate_policies(inst.bound.model().actions, inst.market.tree, 200);
    XR best = XR::neg_inf();
    for (const auto& p : all) best = XR::max(best, policy_value(inst.bound, p));
    CHECK(best == r.value);
}

TEST_CASE("constant payoff: extractor returns the lexicographically first policy") {
    auto adoc = json::parse(R"({
      "actions": ["a","b"],
      "constraints": [],
      "payoff": {"kind": "table", "values": {}, "default": "1"}
    })");
    auto inst = fixtures::make_instance(fixtures::bin2_market(), adoc);
    auto r = backward_induction(inst.bound);
    auto pol = extract_policy(inst.bound, r.table);
    for (int k = 0; k < 3; ++k)
        for (int c : pol.choice[k])
            if (c >= 0) CHECK(c == 0);
}

TEST_CASE("hedge extraction on BIN2 american put") {
    auto inst = fixtures::bin2_amput();
    auto r = backward_induction(inst.bound);
    auto h = extract_hedge(inst.bound, r.table);
    CHECK(h.x == Rat(1, 2));
    // root atom with c_0 = 0: y = -1/2
    const long plus0 = r.table.atoms.plus_id(inst.market.tree.root(),
                                             inst.bound.plans().extend(0, 0, 0));
    CHECK(h.y[0][plus0] == std::vector<Rat>{Rat(-1, 2)});
    std::string why;
    CHECK_MESSAGE(check_hedge_domination(inst.bound, h, &why), why);
}

TEST_CASE("constant payoff leads to an all-zero hedge") {
    auto adoc = json::parse(R"({
      "actions": ["a","b"],
      "constraints": [],
      "payoff": {"kind": "table", "values": {}, "default": "2"}
    })");
    auto inst = fixtures::make_instance(fixtures::bin2_market(), adoc);
    auto r = backward_induction(inst.bound);
    auto h = extract_hedge(inst.bound, r.table);
    CHECK(h.x == Rat(2));
    for (const auto& level : h.y)
        for (const auto& y : level)
            for (const auto& c : y) CHECK(c == 0);
    CHECK(check_hedge_domination(inst.bound, h));
}

TEST_CASE("unavoidable -inf successors propagate, avoidable ones do not") {
    // one-period market; payoff table makes leaf u infeasible for every plan
    auto adoc = json::parse(R"({
      "actions": ["z"],
      "constraints": [],
      "payoff": {"kind": "table", "values": {"u|z/z": "-inf"}, "default": "3"}
    })");
    SUBCASE("binary +-1 moves force mass on u") {
        auto mdoc = json::parse(R"({
          "horizon": 1,
          "branches": [["u","d"]],
          "assets": {"dimension": 1, "values": {"": ["4"], "u": ["5"], "d": ["3"]}},
          "priors": {"": [["1/2","1/2"]]},
          "static_options": []
        })");
        json a2 = adoc;
        a2["payoff"]["values"] = {{"u|z/z", "-inf"}};
        auto inst = fixtures::make_instance(mdoc, a2);
        CHECK(backward_induction(inst.bound).value == XR::neg_inf());
    }
    SUBCASE("a flat branch lets the measure avoid u") {
        auto mdoc = json::parse(R"({
          "horizon": 1,
          "branches": [["u","d"]],
          "assets": {"dimension": 1, "values": {"": ["4"], "u": ["5"], "d": ["4"]}},
          "priors": {"": [["1/2","1/2"]]},
          "static_options": []
        })");
        json a2 = adoc;
        a2["payoff"]["values"] = {{"u|z/z", "-inf"}};
        auto inst = fixtures::make_instance(mdoc, a2);
        CHECK(backward_induction(inst.bound).value == XR(Rat(3)));
    }
}

TEST_CASE("value dump lists one row per reachable atom") {
    auto inst = fixtures::bin2_amput();
    auto r = backward_induction(inst.bound);
    std::ostringstream os;
    dump_values_csv(os, inst.bound, r.table);
    // atoms: 1 + (2 nodes x 2 prefixes) + (4 leaves x 4 prefixes) = 21, plus header
    int lines = 0;
    std::string line;
    std::istringstream is(os.str());
    while (std::getline(is, line)) ++lines;
    CHECK(lines == 22);
}
