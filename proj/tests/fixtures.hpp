// Shared instance fixtures for tests.
#ifndef RSHEDGE_TESTS_FIXTURES_HPP
#define RSHEDGE_TESTS_FIXTURES_HPP

#include <json.hpp>

#include "rshedge/action_model.hpp"
#include "rshedge/market_model.hpp"

namespace rshedge::fixtures {

// Two-period binary tree, S0 = 4, +-1 moves, kernels {(9/10,1/10),(1/10,9/10)}
// at every node, no static options.
inline nlohmann::json bin2_market() {
    return nlohmann::json::parse(R"({
      "horizon": 2,
      "branches": [["u","d"],["u","d"]],
      "assets": {"dimension": 1, "values": {
        "": ["4"], "u": ["5"], "d": ["3"],
        "u/u": ["6"], "u/d": ["4"], "d/u": ["4"], "d/d": ["2"]}},
      "priors": {
        "": [["9/10","1/10"],["1/10","9/10"]],
        "u": [["9/10","1/10"],["1/10","9/10"]],
        "d": [["9/10","1/10"],["1/10","9/10"]]},
      "static_options": []
    })");
}

// Exercise-once American put, strike 4, on a binary action alphabet.
inline nlohmann::json amput_actions() {
    return nlohmann::json::parse(R"({
      "actions": ["0","1"],
      "constraints": [{"kind": "window_sum", "lower": "0", "upper": "1"}],
      "payoff": {"kind": "american_put", "strike": "4"}
    })");
}

struct Instance {
    MarketModel market;
    SupportStructure sup;
    BoundPayoff bound;
};

inline Instance make_instance(const nlohmann::json& mdoc, const nlohmann::json& adoc,
                              const Budgets& budgets = {}) {
    MarketModel m = load_market(mdoc);
    SupportStructure sup = support_structure(m);
    BoundPayoff bp(m, sup, load_actions(adoc), budgets);
    return Instance{std::move(m), std::move(sup), std::move(bp)};
}

inline Instance bin2_amput() { return make_instance(bin2_market(), amput_actions()); }

}  // namespace rshedge::fixtures

#endif
