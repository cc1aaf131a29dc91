#ifndef RSHEDGE_ACTION_MODEL_HPP
#define RSHEDGE_ACTION_MODEL_HPP

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "rshedge/errors.hpp"
#include "rshedge/market_model.hpp"
#include "rshedge/numbers.hpp"

namespace rshedge {

/// A plan is one action index per slot; slot k holds the action taken at
/// time k (plan length N+1 when bound to a market).
using Plan = std::vector<int>;

struct ActionSpace {
    std::vector<std::string> labels;
    std::vector<std::optional<Rat>> numeric;  // parsed label values when numeric

    int size() const { return static_cast<int>(labels.size()); }
    bool all_numeric() const;
    const Rat& value(int a) const;  // throws config_error for non-numeric labels
    Rat min_value() const;
    Rat max_value() const;
};

ActionSpace make_action_space(std::vector<std::string> labels);

/// How a plan encodes the buyer's decisions. Constraints that speak about
/// execution times read the plan through this lens:
///   QuantityPerPeriod — slot k carries the quantity executed at time k
///     (times = slots with nonzero value, multiplicity = value).
///   ExerciseTimes — each slot carries the time of one execution
///     (times = the label values themselves).
enum class PlanEncoding { QuantityPerPeriod, ExerciseTimes };

class PlanConstraint {
  public:
    enum class Kind { WindowSum, WaitingPeriod, PerPeriodCap, PrefixAllowed, CustomPredicate };

    static PlanConstraint window_sum(std::optional<Rat> lower, std::optional<Rat> upper,
                                     int window = 0);  // window 0 = whole plan
    static PlanConstraint waiting_period(int n);
    static PlanConstraint per_period_cap(Rat cap);
    static PlanConstraint prefix_allowed(
        std::map<std::string, std::vector<std::string>> allowed, bool default_allow);
    static PlanConstraint custom_predicate(
        std::string name,
        std::function<bool(const Plan&, const ActionSpace&)> predicate);

    Kind kind() const { return kind_; }
    const std::string& predicate_name() const { return predicate_name_; }

    /// Exact full-plan evaluation.
    bool feasible(const Plan& plan, const ActionSpace& a, PlanEncoding enc) const;

    /// Pruning test: false only when no completion of the prefix can be
    /// feasible. Custom predicates never prune.
    bool prefix_viable(const Plan& prefix, int plan_length, const ActionSpace& a,
                       PlanEncoding enc) const;

    nlohmann::json to_json(const ActionSpace& a) const;

  private:
    Kind kind_;
    // window_sum
    std::optional<Rat> lower_, upper_;
    int window_ = 0;
    // waiting_period
    int wait_n_ = 0;
    // per_period_cap
    Rat cap_;
    // prefix_allowed: compiled at bind time against the action space
    std::map<std::string, std::vector<std::string>> allowed_raw_;
    bool default_allow_ = true;
    // custom
    std::string predicate_name_;
    std::function<bool(const Plan&, const ActionSpace&)> predicate_;

    friend class CustomPredicateRegistry;
};

/// Named predicates referencable from JSON ("custom_predicate" kind).
class CustomPredicateRegistry {
  public:
    static void register_predicate(
        const std::string& name,
        std::function<bool(const Plan&, const ActionSpace&)> fn);
    static std::function<bool(const Plan&, const ActionSpace&)> lookup(
        const std::string& name);
};

struct PayoffSpec {
    enum class Kind { AmericanPut, Swing, Table };
    Kind kind = Kind::Table;
    // american_put: sum over slots of value(c_k) * max(strike - S_k, 0),
    //   -inf when total exercised quantity exceeds max_exercises.
    // swing: sum over slots of value(c_k) * (S_k - strike).
    Rat strike;
    int asset = 0;
    Rat max_exercises = 1;
    // table: explicit values keyed "leaf_key|plan_key"; "-inf" allowed.
    std::map<std::string, XR> table;
    std::optional<XR> table_default;
};

struct ActionModel {
    ActionSpace actions;
    std::vector<PlanConstraint> constraints;
    PayoffSpec payoff;
    PlanEncoding encoding = PlanEncoding::QuantityPerPeriod;
    int plan_length = 0;  // 0 = bind to market horizon (N+1)
};

ActionModel load_actions(const nlohmann::json& doc);
ActionModel load_actions_file(const std::string& path);
nlohmann::json serialize_actions(const ActionModel& a);

std::string plan_key(const Plan& plan, const ActionSpace& a);
Plan plan_from_key(const std::string& key, const ActionSpace& a);

/// Mixed-radix plan ids: id = sum_k c_k |A|^k, so a length-l prefix is
/// id mod |A|^l. Deterministic enumeration order everywhere.
struct PlanIndexer {
    int num_actions = 1;
    int length = 0;
    long count = 1;  // |A|^length

    PlanIndexer() = default;
    PlanIndexer(int num_actions, int length);
    long prefix_count(int len) const;
    int digit(long id, int k) const;
    long prefix_of(long id, int len) const;  // first len digits
    long extend(long prefix_id, int prefix_len, int action) const;
    Plan to_plan(long id) const;
    Plan to_prefix(long id, int len) const;
    long from_plan(const Plan& p) const;
};

/// Payoff bound to a market: validates the binding, evaluates and caches
/// phi over every (leaf, plan) pair, and records the global upper bound.
/// Owns copies of the market and support structure; freely movable and
/// safe to share across threads once constructed.
class BoundPayoff {
  public:
    BoundPayoff(const MarketModel& m, const SupportStructure& sup, ActionModel model,
                const Budgets& budgets = {});

    const ActionModel& model() const { return model_; }
    const PlanIndexer& plans() const { return idx_; }
    const MarketModel& market() const { return market_; }
    const SupportStructure& support() const { return support_; }

    const XR& phi(int leaf_local, long plan_id) const {
        return phi_[slot(leaf_local, plan_id)];
    }
    bool feasible(int leaf_local, long plan_id) const {
        return phi_[slot(leaf_local, plan_id)].finite();
    }

    /// Direct (uncached) evaluation; -inf iff the plan is infeasible at ω.
    XR eval(int leaf_local, const Plan& plan) const;

    /// Exact feasible-plan set at a leaf, prefix-pruned then phi-filtered.
    std::vector<long> feasible_plans(int leaf_local) const;

    /// max over finite phi; nullopt if everything is infeasible.
    std::optional<Rat> upper_bound() const { return upper_bound_; }

    long num_pairs() const { return static_cast<long>(phi_.size()); }

  private:
    long slot(int leaf_local, long plan_id) const {
        return static_cast<long>(leaf_local) * idx_.count + plan_id;
    }
    bool constraints_feasible(const Plan& plan) const;
    XR raw_payoff(int leaf_local, const Plan& plan) const;

    MarketModel market_;
    SupportStructure support_;
    ActionModel model_;
    PlanIndexer idx_;
    std::vector<XR> phi_;
    std::optional<Rat> upper_bound_;
};

/// Free-standing payoff evaluation matching BoundPayoff::eval.
XR eval_payoff(const MarketModel& m, const SupportStructure& sup, const ActionModel& a,
               int leaf_local, const Plan& plan);

/// A full adapted policy: one action per tree node (the action taken at
/// time depth(v) given the observed prefix v).
using ActionPolicy = std::vector<int>;

/// All adapted policies; count = prod_k |A|^(#nodes at depth k). Oracle use.
std::vector<ActionPolicy> enumerate_policies(const ActionSpace& a, const ScenarioTree& t,
                                             long budget);
long count_policies(const ActionSpace& a, const ScenarioTree& t);

/// The plan a policy induces along a leaf path.
Plan policy_plan(const ActionPolicy& pol, const ScenarioTree& t, int leaf_node);

}  // namespace rshedge

#endif
