#ifndef RSHEDGE_MARKET_MODEL_HPP
#define RSHEDGE_MARKET_MODEL_HPP

#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "rshedge/errors.hpp"
#include "rshedge/lp_core.hpp"
#include "rshedge/numbers.hpp"

namespace rshedge {

/// Finite scenario tree over per-step label sets. Node identity is the full
/// label prefix; nodes are stored flat, breadth-first, root first.
struct ScenarioTree {
    int horizon = 0;                                      // N
    std::vector<std::vector<std::string>> branch_labels;  // one set per step 1..N

    struct Node {
        int parent = -1;
        int depth = 0;
        int branch = -1;      // index into branch_labels[depth-1]
        int first_child = -1;
        int num_children = 0;
    };
    std::vector<Node> nodes;
    std::vector<std::vector<int>> by_depth;  // node ids per depth

    int root() const { return 0; }
    bool is_leaf(int v) const { return nodes[v].depth == horizon; }
    int child(int v, int branch) const { return nodes[v].first_child + branch; }
    int num_branches(int v) const { return nodes[v].num_children; }
    const std::vector<int>& leaves() const { return by_depth[horizon]; }
    int leaf_count() const { return static_cast<int>(leaves().size()); }
    /// position of a leaf node id within leaves()
    int leaf_local(int node) const;
    /// node id of the depth-k prefix of a leaf
    int prefix_of(int node, int depth) const;

    std::string key(int v) const;  // "/"-joined labels, "" for root
    int node_by_key(const std::string& k) const;  // -1 if absent

    std::unordered_map<std::string, int> key_index;
};

ScenarioTree build_tree(int horizon, std::vector<std::vector<std::string>> branch_labels);

struct MarketModel {
    ScenarioTree tree;
    int dim = 1;                                      // d
    std::vector<std::vector<Rat>> asset;              // [node][component]
    std::vector<std::vector<std::vector<Rat>>> priors;  // [node][kernel][branch]
    std::vector<std::vector<Rat>> options;            // [lambda][leaf_local], price 0

    int num_options() const { return static_cast<int>(options.size()); }
    /// S(child) - S(parent), componentwise
    std::vector<Rat> delta_S(int child_node) const;
};

/// Parses and validates the JSON market document. Errors name the offending
/// node path.
MarketModel load_market(const nlohmann::json& doc);
MarketModel load_market_file(const std::string& path);

/// Canonical serialization; load-then-serialize is the identity on
/// canonical-form documents.
nlohmann::json serialize_market(const MarketModel& m);

/// Reachability under the prior family: a node is reachable iff its parent
/// is and its branch lies in the union of the parent's kernel supports.
/// A property holds quasi-surely iff it holds on every reachable path.
struct SupportStructure {
    std::vector<char> node_reachable;           // per node
    std::vector<std::vector<int>> succ_support;  // per node: branches in union support
    std::vector<int> reachable_leaves;           // node ids
    bool leaf_reachable(const ScenarioTree& t, int leaf_node) const {
        return node_reachable[leaf_node] != 0;
    }
};

SupportStructure support_structure(const MarketModel& m);

/// One-step martingale polytope at a reachable non-leaf node:
///   { q >= 0 on the successor support, sum q = 1, sum_i q_i dS(i) = 0 }.
/// `empty` indicates a local arbitrage candidate.
struct OneStepPolytope {
    int node = -1;
    std::vector<int> support;  // branch indices
    lp::LinearProgram system;  // vars ordered as `support`
    bool empty = false;
    std::vector<Rat> witness;  // a feasible q when nonempty
};

OneStepPolytope one_step_martingale_polytope(const MarketModel& m,
                                             const SupportStructure& sup, int node);

/// Linear description of the (calibrated) martingale measure set on the
/// original path space: variables are weights on reachable leaves, with a
/// mass row, one martingale row per reachable non-leaf node and asset
/// component, and optional calibration rows. `leaf_filter`, when given,
/// restricts the support further (indexed by leaf_local).
struct OriginalSystem {
    std::vector<int> leaves_local;  // variable order
    std::vector<int> var_of_leaf;   // leaf_local -> var or -1
    lp::LinearProgram lp;
    int mass_row = -1;
    std::vector<int> calibration_rows;
};

OriginalSystem original_martingale_constraints(const MarketModel& m,
                                               const SupportStructure& sup,
                                               bool with_calibration,
                                               const std::vector<char>* leaf_filter = nullptr);

}  // namespace rshedge

#endif
