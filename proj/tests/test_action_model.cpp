#include <doctest.h>

#include "fixtures.hpp"
#include "rshedge/action_model.hpp"

using namespace rshedge;
using nlohmann::json;

TEST_CASE("american put payoff on BIN2") {
    auto inst = fixtures::bin2_amput();
    const auto& t = inst.market.tree;
    const int dd = t.leaf_local(t.node_by_key("d/d"));
    // exercise at time 1 along (d,d): (4 - S_1(d))^+ = 1
    CHECK(inst.bound.eval(dd, {0, 1, 0}) == XR(Rat(1)));
    // two exercises are infeasible
    CHECK(inst.bound.eval(dd, {1, 1, 0}) == XR::neg_inf());
    // exercise at time 2: (4 - 2)^+ = 2
    CHECK(inst.bound.eval(dd, {0, 0, 1}) == XR(Rat(2)));
    // never exercising pays 0
    CHECK(inst.bound.eval(dd, {0, 0, 0}) == XR(Rat(0)));
}

TEST_CASE("swing payoff goes negative-infinite below the volume floor") {
    // one-period toy swing with total-volume window [1, 2]
    auto mdoc = json::parse(R"({
      "horizon": 1,
      "branches": [["u","d"]],
      "assets": {"dimension": 1, "values": {"": ["5"], "u": ["6"], "d": ["4"]}},
      "priors": {"": [["1/2","1/2"]]},
      "static_options": []
    })");
    auto adoc = json::parse(R"({
      "actions": ["0","1"],
      "constraints": [{"kind": "window_sum", "lower": "1", "upper": "2"}],
      "payoff": {"kind": "swing", "strike": "5"}
    })");
    auto inst = fixtures::make_instance(mdoc, adoc);
    CHECK(inst.bound.eval(0, {0, 0}) == XR::neg_inf());
    CHECK(inst.bound.eval(0, {0, 1}) == XR(Rat(1)));   // buy 1 at S_1 = 6
    CHECK(inst.bound.eval(1, {0, 1}) == XR(Rat(-1)));  // buy 1 at S_1 = 4
    CHECK(inst.bound.eval(0, {1, 1}) == XR(Rat(1)));   // time-0 leg is at strike
}

TEST_CASE("exercise-once has four feasible plans per leaf") {
    auto inst = fixtures::bin2_amput();
    for (int leaf = 0; leaf < 4; ++leaf) {
        auto plans = inst.bound.feasible_plans(leaf);
        CHECK(plans.size() == 4);
    }
}

TEST_CASE("waiting period on exercise-time pairs") {
    // two American options, times {1,2,3}, waiting >= 2: only (1,3) and (3,1)
    auto space = make_action_space({"1", "2", "3"});
    auto c = PlanConstraint::waiting_period(2);
    std::vector<Plan> feasible;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            Plan p = {i, j};
            if (c.feasible(p, space, PlanEncoding::ExerciseTimes)) feasible.push_back(p);
        }
    REQUIRE(feasible.size() == 2);
    CHECK(feasible[0] == Plan{0, 2});  // times (1,3)
    CHECK(feasible[1] == Plan{2, 0});  // times (3,1)
}

TEST_CASE("unconstrained plans are the full product") {
    auto mdoc = json::parse(R"({
      "horizon": 1,
      "branches": [["u","d"]],
      "assets": {"dimension": 1, "values": {"": ["4"], "u": ["5"], "d": ["3"]}},
      "priors": {"": [["1/2","1/2"]]},
      "static_options": []
    })");
    auto adoc = json::parse(R"({
      "actions": ["a","b","c"],
      "constraints": [],
      "payoff": {"kind": "table", "values": {}, "default": "0"}
    })");
    auto inst = fixtures::make_instance(mdoc, adoc);
    CHECK(inst.bound.feasible_plans(0).size() == 9);
    CHECK(inst.bound.feasible_plans(1).size() == 9);
}

TEST_CASE("prefix pruning equals brute-force filtering") {
    auto mdoc = json::parse(R"({
      "horizon": 2,
      "branches": [["u","d"],["u","d"]],
      "assets": {"dimension": 1, "values": {
        "": ["4"], "u": ["5"], "d": ["3"],
        "u/u": ["6"], "u/d": ["4"], "d/u": ["4"], "d/d": ["2"]}},
      "priors": {"": [["1/2","1/2"]], "u": [["1/2","1/2"]], "d": [["1/2","1/2"]]},
      "static_options": []
    })");
    std::vector<json> constraint_sets = {
        json::array({{{"kind", "window_sum"}, {"lower", "1"}, {"upper", "2"}}}),
        json::array({{{"kind", "window_sum"}, {"upper", "1"}, {"window", 2}}}),
        json::array({{{"kind", "waiting_period"}, {"n", 2}}}),
        json::array({{{"kind", "per_period_cap"}, {"cap", "1"}}}),
        json::array({{{"kind", "prefix_allowed"},
                      {"allowed", {{"", {"0", "1"}}, {"1", {"0"}}}},
                      {"default_allow", true}}}),
    };
    for (const auto& cs : constraint_sets) {
        json adoc = {{"actions", {"0", "1", "2"}},
                     {"constraints", cs},
                     {"payoff", {{"kind", "table"}, {"values", json::object()}, {"default", "0"}}}};
        auto inst = fixtures::make_instance(mdoc, adoc);
        const auto& am = inst.bound.model();
        for (int leaf = 0; leaf < inst.market.tree.leaf_count(); ++leaf) {
            // brute force: evaluate constraints on every full plan
            std::vector<long> expect;
            for (long id = 0; id < inst.bound.plans().count; ++id) {
                Plan p = inst.bound.plans().to_plan(id);
                bool ok = true;
                for (const auto& c : am.constraints)
                    ok = ok && c.feasible(p, am.actions, am.encoding);
                if (ok) expect.push_back(id);
            }
            CHECK(inst.bound.feasible_plans(leaf) == expect);
        }
    }
}

TEST_CASE("custom predicates participate without pruning") {
    CustomPredicateRegistry::register_predicate(
        "even_total", [](const Plan& p, const ActionSpace& a) {
            Rat sum = 0;
            for (int idx : p) sum += a.value(idx);
            Rat half = sum / 2;
            return half.get_den() == 1;
        });
    auto mdoc = json::parse(R"({
      "horizon": 1,
      "branches": [["u","d"]],
      "assets": {"dimension": 1, "values": {"": ["4"], "u": ["5"], "d": ["3"]}},
      "priors": {"": [["1/2","1/2"]]},
      "static_options": []
    })");
    auto adoc = json::parse(R"({
      "actions": ["0","1"],
      "constraints": [{"kind": "custom_predicate", "name": "even_total"}],
      "payoff": {"kind": "table", "values": {}, "default": "0"}
    })");
    auto inst = fixtures::make_instance(mdoc, adoc);
    CHECK(inst.bound.feasible_plans(0) ==
          std::vector<long>{0, 3});  // (0,0) and (1,1)
    CHECK_THROWS_AS(
        load_actions(json::parse(
            R"({"actions":["0"],"payoff":{"kind":"swing","strike":"1"},
                "constraints":[{"kind":"custom_predicate","name":"no_such"}]})")),
        config_error);
}

TEST_CASE("policy counting and enumeration") {
    auto one = build_tree(1, {{"a", "b"}});
    auto space2 = make_action_space({"0", "1"});
    CHECK(count_policies(space2, one) == 8);  // 2^(1 root + 2 leaves)
    CHECK(enumerate_policies(space2, one, 100).size() == 8);

    auto space1 = make_action_space({"z"});
    CHECK(count_policies(space1, one) == 1);
    CHECK(enumerate_policies(space1, one, 100).size() == 1);

    auto bin2 = build_tree(2, {{"u", "d"}, {"u", "d"}});
    CHECK(count_policies(space2, bin2) == 128);  // 2^1 * 2^2 * 2^4
    CHECK(enumerate_policies(space2, bin2, 200).size() == 128);
    CHECK_THROWS_AS(enumerate_policies(space2, bin2, 100), budget_exceeded);
}

TEST_CASE("policy plans agree with direct evaluation") {
    auto inst = fixtures::bin2_amput();
    const auto& t = inst.market.tree;
    auto policies = enumerate_policies(inst.bound.model().actions, t, 200);
    for (const auto& pol : policies) {
        for (int leaf = 0; leaf < t.leaf_count(); ++leaf) {
            Plan plan = policy_plan(pol, t, t.leaves()[leaf]);
            CHECK(inst.bound.eval(leaf, plan) ==
                  inst.bound.phi(leaf, inst.bound.plans().from_plan(plan)));
        }
    }
}

TEST_CASE("plan enumeration budget is enforced") {
    auto mdoc = fixtures::bin2_market();
    auto adoc = fixtures::amput_actions();
    Budgets tiny;
    tiny.max_paths = 10;  // 4 leaves x 8 plans = 32 > 10
    CHECK_THROWS_AS(fixtures::make_instance(mdoc, adoc, tiny), budget_exceeded);
}

TEST_CASE("action documents round-trip") {
    auto adoc = fixtures::amput_actions();
    auto am = load_actions(adoc);
    CHECK(serialize_actions(am) == adoc);
    auto table = json::parse(R"({
      "actions": ["a","b"],
      "constraints": [{"kind":"per_period_cap","cap":"1"}],
      "payoff": {"kind":"table","values":{"u|a/a":"1","u|a/b":"-inf"},"default":"0"}
    })");
    CHECK(serialize_actions(load_actions(table)) == table);
}

TEST_CASE("payoff table with -inf marks pairs infeasible") {
    auto mdoc = json::parse(R"({
      "horizon": 1,
      "branches": [["u","d"]],
      "assets": {"dimension": 1, "values": {"": ["4"], "u": ["5"], "d": ["3"]}},
      "priors": {"": [["1/2","1/2"]]},
      "static_options": []
    })");
    auto adoc = json::parse(R"({
      "actions": ["a","b"],
      "constraints": [],
      "payoff": {"kind": "table",
                 "values": {"u|a/a": "-inf", "d|a/a": "2"},
                 "default": "1"}
    })");
    auto inst = fixtures::make_instance(mdoc, adoc);
    CHECK(inst.bound.eval(0, {0, 0}) == XR::neg_inf());
    CHECK(inst.bound.eval(1, {0, 0}) == XR(Rat(2)));
    CHECK(inst.bound.eval(0, {1, 0}) == XR(Rat(1)));
    CHECK(inst.bound.upper_bound() == Rat(2));
}
