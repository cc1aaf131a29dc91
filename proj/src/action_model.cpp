#include "rshedge/action_model.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace rshedge {

using nlohmann::json;

bool ActionSpace::all_numeric() const {
    for (const auto& v : numeric)
        if (!v) return false;
    return !labels.empty();
}

const Rat& ActionSpace::value(int a) const {
    if (!numeric[a])
        throw config_error("action label '" + labels[a] + "' is not numeric");
    return *numeric[a];
}

Rat ActionSpace::min_value() const {
    Rat m = value(0);
    for (int a = 1; a < size(); ++a) m = std::min(m, value(a));
    return m;
}

Rat ActionSpace::max_value() const {
    Rat m = value(0);
    for (int a = 1; a < size(); ++a) m = std::max(m, value(a));
    return m;
}

ActionSpace make_action_space(std::vector<std::string> labels) {
    if (labels.empty()) throw config_error("action space must be nonempty");
    std::set<std::string> distinct(labels.begin(), labels.end());
    if (distinct.size() != labels.size())
        throw config_error("duplicate action label");
    ActionSpace a;
    for (const auto& l : labels) {
        if (l.empty() || l.find('/') != std::string::npos || l.find('|') != std::string::npos)
            throw config_error("action label '" + l + "' must be nonempty without '/' or '|'");
        try {
            a.numeric.push_back(rat_from_string(l));
        } catch (const parse_error&) {
            a.numeric.push_back(std::nullopt);
        }
    }
    a.labels = std::move(labels);
    return a;
}

// ---------------------------------------------------------------------------
// constraints

PlanConstraint PlanConstraint::window_sum(std::optional<Rat> lower,
                                          std::optional<Rat> upper, int window) {
    PlanConstraint c;
    c.kind_ = Kind::WindowSum;
    c.lower_ = std::move(lower);
    c.upper_ = std::move(upper);
    c.window_ = window;
    return c;
}
PlanConstraint PlanConstraint::waiting_period(int n) {
    if (n < 1) throw config_error("waiting_period: n must be >= 1");
    PlanConstraint c;
    c.kind_ = Kind::WaitingPeriod;
    c.wait_n_ = n;
    return c;
}
PlanConstraint PlanConstraint::per_period_cap(Rat cap) {
    PlanConstraint c;
    c.kind_ = Kind::PerPeriodCap;
    c.cap_ = std::move(cap);
    return c;
}
PlanConstraint PlanConstraint::prefix_allowed(
    std::map<std::string, std::vector<std::string>> allowed, bool default_allow) {
    PlanConstraint c;
    c.kind_ = Kind::PrefixAllowed;
    c.allowed_raw_ = std::move(allowed);
    c.default_allow_ = default_allow;
    return c;
}
PlanConstraint PlanConstraint::custom_predicate(
    std::string name, std::function<bool(const Plan&, const ActionSpace&)> predicate) {
    PlanConstraint c;
    c.kind_ = Kind::CustomPredicate;
    c.predicate_name_ = std::move(name);
    c.predicate_ = std::move(predicate);
    return c;
}

namespace {

// (time, multiplicity) view of a (partial) plan under the encoding
struct Execution {
    Rat time;
    Rat mult;
};

std::vector<Execution> executions(const Plan& plan, const ActionSpace& a,
                                  PlanEncoding enc) {
    std::vector<Execution> out;
    if (enc == PlanEncoding::QuantityPerPeriod) {
        for (std::size_t k = 0; k < plan.size(); ++k) {
            const Rat& v = a.value(plan[k]);
            if (sgn(v) != 0) out.push_back({Rat(static_cast<long>(k)), v});
        }
    } else {
        for (int idx : plan) out.push_back({a.value(idx), Rat(1)});
    }
    return out;
}

bool waiting_ok(const std::vector<Execution>& ex, int n) {
    for (std::size_t i = 0; i < ex.size(); ++i) {
        if (ex[i].mult > 1) return false;  // simultaneous executions
        for (std::size_t j = i + 1; j < ex.size(); ++j) {
            Rat d = abs(ex[i].time - ex[j].time);
            if (d < n) return false;
        }
    }
    return true;
}

}  // namespace

bool PlanConstraint::feasible(const Plan& plan, const ActionSpace& a,
                              PlanEncoding enc) const {
    switch (kind_) {
        case Kind::WindowSum: {
            const int len = static_cast<int>(plan.size());
            const int w = window_ > 0 ? window_ : len;
            if (w > len) return true;  // no complete window
            for (int s = 0; s + w <= len; ++s) {
                Rat sum = 0;
                for (int k = s; k < s + w; ++k) sum += a.value(plan[k]);
                if (lower_ && sum < *lower_) return false;
                if (upper_ && sum > *upper_) return false;
            }
            return true;
        }
        case Kind::WaitingPeriod:
            return waiting_ok(executions(plan, a, enc), wait_n_);
        case Kind::PerPeriodCap: {
            if (enc == PlanEncoding::QuantityPerPeriod) {
                for (int idx : plan)
                    if (a.value(idx) > cap_) return false;
                return true;
            }
            std::map<Rat, Rat> count;
            for (int idx : plan) count[a.value(idx)] += 1;
            for (const auto& [time, c] : count)
                if (c > cap_) return false;
            return true;
        }
        case Kind::PrefixAllowed: {
            std::string prefix;
            for (std::size_t k = 0; k < plan.size(); ++k) {
                auto it = allowed_raw_.find(prefix);
                const std::string& lbl = a.labels[plan[k]];
                if (it != allowed_raw_.end()) {
                    if (std::find(it->second.begin(), it->second.end(), lbl) ==
                        it->second.end())
                        return false;
                } else if (!default_allow_) {
                    return false;
                }
                if (!prefix.empty()) prefix += "/";
                prefix += lbl;
            }
            return true;
        }
        case Kind::CustomPredicate:
            return predicate_(plan, a);
    }
    return true;
}

bool PlanConstraint::prefix_viable(const Plan& prefix, int plan_length,
                                   const ActionSpace& a, PlanEncoding enc) const {
    const int len = static_cast<int>(prefix.size());
    switch (kind_) {
        case Kind::WindowSum: {
            const int w = window_ > 0 ? window_ : plan_length;
            if (w > plan_length) return true;
            const Rat lo_act = a.min_value(), hi_act = a.max_value();
            for (int s = 0; s + w <= plan_length; ++s) {
                if (s >= len) break;
                Rat sum = 0;
                int known = std::min(len, s + w) - s;
                for (int k = s; k < s + known; ++k) sum += a.value(prefix[k]);
                const int rest = w - known;
                // best/worst completions of this window
                Rat best = sum + hi_act * rest;
                Rat worst = sum + lo_act * rest;
                if (upper_ && worst > *upper_) return false;
                if (lower_ && best < *lower_) return false;
            }
            return true;
        }
        case Kind::WaitingPeriod:
            return waiting_ok(executions(prefix, a, enc), wait_n_);
        case Kind::PerPeriodCap: {
            Plan p = prefix;
            return feasible(p, a, enc);  // violations within a prefix are final
        }
        case Kind::PrefixAllowed: {
            Plan p = prefix;
            return feasible(p, a, enc);
        }
        case Kind::CustomPredicate:
            return true;  // never prunes
    }
    return true;
}

nlohmann::json PlanConstraint::to_json(const ActionSpace&) const {
    json j;
    switch (kind_) {
        case Kind::WindowSum:
            j["kind"] = "window_sum";
            if (lower_) j["lower"] = rat_to_string(*lower_);
            if (upper_) j["upper"] = rat_to_string(*upper_);
            if (window_ > 0) j["window"] = window_;
            break;
        case Kind::WaitingPeriod:
            j["kind"] = "waiting_period";
            j["n"] = wait_n_;
            break;
        case Kind::PerPeriodCap:
            j["kind"] = "per_period_cap";
            j["cap"] = rat_to_string(cap_);
            break;
        case Kind::PrefixAllowed:
            j["kind"] = "prefix_allowed";
            j["allowed"] = allowed_raw_;
            j["default_allow"] = default_allow_;
            break;
        case Kind::CustomPredicate:
            j["kind"] = "custom_predicate";
            j["name"] = predicate_name_;
            break;
    }
    return j;
}

// ---------------------------------------------------------------------------
// registry

namespace {
std::map<std::string, std::function<bool(const Plan&, const ActionSpace&)>>&
predicate_registry() {
    static std::map<std::string, std::function<bool(const Plan&, const ActionSpace&)>> r;
    return r;
}
}  // namespace

void CustomPredicateRegistry::register_predicate(
    const std::string& name, std::function<bool(const Plan&, const ActionSpace&)> fn) {
    predicate_registry()[name] = std::move(fn);
}

std::function<bool(const Plan&, const ActionSpace&)> CustomPredicateRegistry::lookup(
    const std::string& name) {
    auto it = predicate_registry().find(name);
    if (it == predicate_registry().end())
        throw config_error("unknown custom predicate '" + name + "'");
    return it->second;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

const json& need(const json& doc, const char* field) {
    auto it = doc.find(field);
    if (it == doc.end()) throw config_error(std::string("missing field '") + field + "'");
    return *it;
}

Rat rat_field(const json& j, const std::string& where) {
    if (!j.is_string()) throw config_error("expected rational string at " + where);
    try {
        return rat_from_string(j.get<std::string>());
    } catch (const parse_error& e) {
        throw config_error(std::string(e.what()) + " at " + where);
    }
}

XR xr_field(const json& j, const std::string& where) {
    if (j.is_string() && j.get<std::string>() == "-inf") return XR::neg_inf();
    return XR(rat_field(j, where));
}

}  // namespace

ActionModel load_actions(const json& doc) {
    if (!doc.is_object()) throw config_error("action document must be an object");
    static const std::set<std::string> known = {"actions", "constraints", "payoff",
                                               "encoding", "plan_length"};
    for (auto it = doc.begin(); it != doc.end(); ++it)
        if (!known.count(it.key()))
            throw config_error("unknown action field '" + it.key() + "'");

    ActionModel am;
    const json& ja = need(doc, "actions");
    if (!ja.is_array() || ja.empty()) throw config_error("actions must be a nonempty array");
    std::vector<std::string> labels;
    for (const auto& l : ja) {
        if (!l.is_string()) throw config_error("action labels must be strings");
        labels.push_back(l.get<std::string>());
    }
    am.actions = make_action_space(std::move(labels));

    if (doc.contains("encoding")) {
        std::string e = doc["encoding"].get<std::string>();
        if (e == "quantity_per_period")
            am.encoding = PlanEncoding::QuantityPerPeriod;
        else if (e == "exercise_times")
            am.encoding = PlanEncoding::ExerciseTimes;
        else
            throw config_error("unknown encoding '" + e + "'");
    }
    if (doc.contains("plan_length")) {
        am.plan_length = doc["plan_length"].get<int>();
        if (am.plan_length < 1) throw config_error("plan_length must be >= 1");
    }

    if (doc.contains("constraints")) {
        const json& jc = doc["constraints"];
        if (!jc.is_array()) throw config_error("constraints must be an array");
        for (const auto& c : jc) {
            std::string kind = need(c, "kind").get<std::string>();
            if (kind == "window_sum") {
                std::optional<Rat> lo, hi;
                if (c.contains("lower")) lo = rat_field(c["lower"], "window_sum.lower");
                if (c.contains("upper")) hi = rat_field(c["upper"], "window_sum.upper");
                int w = c.contains("window") ? c["window"].get<int>() : 0;
                am.constraints.push_back(PlanConstraint::window_sum(lo, hi, w));
            } else if (kind == "waiting_period") {
                am.constraints.push_back(
                    PlanConstraint::waiting_period(need(c, "n").get<int>()));
            } else if (kind == "per_period_cap") {
                am.constraints.push_back(
                    PlanConstraint::per_period_cap(rat_field(need(c, "cap"), "cap")));
            } else if (kind == "prefix_allowed") {
                std::map<std::string, std::vector<std::string>> allowed;
                for (auto it = need(c, "allowed").items().begin();
                     it != need(c, "allowed").items().end(); ++it)
                    allowed[it.key()] = it.value().get<std::vector<std::string>>();
                bool da = c.contains("default_allow") ? c["default_allow"].get<bool>() : true;
                am.constraints.push_back(PlanConstraint::prefix_allowed(allowed, da));
            } else if (kind == "custom_predicate") {
                std::string name = need(c, "name").get<std::string>();
                am.constraints.push_back(PlanConstraint::custom_predicate(
                    name, CustomPredicateRegistry::lookup(name)));
            } else {
                throw config_error("unknown constraint kind '" + kind + "'");
            }
        }
    }

    const json& jp = need(doc, "payoff");
    std::string pk = need(jp, "kind").get<std::string>();
    if (pk == "american_put") {
        am.payoff.kind = PayoffSpec::Kind::AmericanPut;
        am.payoff.strike = rat_field(need(jp, "strike"), "payoff.strike");
        if (jp.contains("asset")) am.payoff.asset = jp["asset"].get<int>();
        if (jp.contains("max_exercises"))
            am.payoff.max_exercises = rat_field(jp["max_exercises"], "payoff.max_exercises");
    } else if (pk == "swing") {
        am.payoff.kind = PayoffSpec::Kind::Swing;
        am.payoff.strike = rat_field(need(jp, "strike"), "payoff.strike");
        if (jp.contains("asset")) am.payoff.asset = jp["asset"].get<int>();
    } else if (pk == "table") {
        am.payoff.kind = PayoffSpec::Kind::Table;
        const json& jv = need(jp, "values");
        if (!jv.is_object()) throw config_error("payoff.values must be an object");
        for (auto it = jv.begin(); it != jv.end(); ++it)
            am.payoff.table[it.key()] = xr_field(it.value(), "payoff.values['" + it.key() + "']");
        if (jp.contains("default"))
            am.payoff.table_default = xr_field(jp["default"], "payoff.default");
    } else {
        throw config_error("unknown payoff kind '" + pk + "'");
    }
    return am;
}

ActionModel load_actions_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open action file '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw config_error("action file '" + path + "': " + e.what());
    }
    return load_actions(doc);
}

nlohmann::json serialize_actions(const ActionModel& a) {
    json doc;
    doc["actions"] = a.actions.labels;
    json cs = json::array();
    for (const auto& c : a.constraints) cs.push_back(c.to_json(a.actions));
    doc["constraints"] = std::move(cs);
    json p;
    switch (a.payoff.kind) {
        case PayoffSpec::Kind::AmericanPut:
            p["kind"] = "american_put";
            p["strike"] = rat_to_string(a.payoff.strike);
            if (a.payoff.asset != 0) p["asset"] = a.payoff.asset;
            if (a.payoff.max_exercises != 1)
                p["max_exercises"] = rat_to_string(a.payoff.max_exercises);
            break;
        case PayoffSpec::Kind::Swing:
            p["kind"] = "swing";
            p["strike"] = rat_to_string(a.payoff.strike);
            if (a.payoff.asset != 0) p["asset"] = a.payoff.asset;
            break;
        case PayoffSpec::Kind::Table: {
            p["kind"] = "table";
            json vals = json::object();
            for (const auto& [k, v] : a.payoff.table) vals[k] = v.str();
            p["values"] = std::move(vals);
            if (a.payoff.table_default) p["default"] = a.payoff.table_default->str();
            break;
        }
    }
    doc["payoff"] = std::move(p);
    if (a.encoding == PlanEncoding::ExerciseTimes) doc["encoding"] = "exercise_times";
    if (a.plan_length > 0) doc["plan_length"] = a.plan_length;
    return doc;
}

std::string plan_key(const Plan& plan, const ActionSpace& a) {
    std::string out;
    for (std::size_t k = 0; k < plan.size(); ++k) {
        if (k) out += "/";
        out += a.labels[plan[k]];
    }
    return out;
}

Plan plan_from_key(const std::string& key, const ActionSpace& a) {
    Plan p;
    std::stringstream ss(key);
    std::string part;
    while (std::getline(ss, part, '/')) {
        auto it = std::find(a.labels.begin(), a.labels.end(), part);
        if (it == a.labels.end())
            throw config_error("unknown action label '" + part + "' in plan key");
        p.push_back(static_cast<int>(it - a.labels.begin()));
    }
    return p;
}

// ---------------------------------------------------------------------------
// plan indexing

PlanIndexer::PlanIndexer(int num_actions_, int length_)
    : num_actions(num_actions_), length(length_) {
    count = 1;
    for (int k = 0; k < length; ++k) {
        if (count > std::numeric_limits<long>::max() / num_actions)
            throw budget_exceeded("plan space too large to index");
        count *= num_actions;
    }
}
long PlanIndexer::prefix_count(int len) const {
    long c = 1;
    for (int k = 0; k < len; ++k) c *= num_actions;
    return c;
}
int PlanIndexer::digit(long id, int k) const {
    long c = prefix_count(k);
    return static_cast<int>((id / c) % num_actions);
}
long PlanIndexer::prefix_of(long id, int len) const { return id % prefix_count(len); }
long PlanIndexer::extend(long prefix_id, int prefix_len, int action) const {
    return prefix_id + static_cast<long>(action) * prefix_count(prefix_len);
}
Plan PlanIndexer::to_plan(long id) const { return to_prefix(id, length); }
Plan PlanIndexer::to_prefix(long id, int len) const {
    Plan p(len);
    for (int k = 0; k < len; ++k) {
        p[k] = static_cast<int>(id % num_actions);
        id /= num_actions;
    }
    return p;
}
long PlanIndexer::from_plan(const Plan& p) const {
    long id = 0, mult = 1;
    for (std::size_t k = 0; k < p.size(); ++k) {
        id += p[k] * mult;
        mult *= num_actions;
    }
    return id;
}

// ---------------------------------------------------------------------------
// bound payoff

BoundPayoff::BoundPayoff(const MarketModel& m, const SupportStructure& sup,
                         ActionModel model, const Budgets& budgets)
    : market_(m), support_(sup), model_(std::move(model)) {
    const int want = m.tree.horizon + 1;
    if (model_.plan_length == 0) model_.plan_length = want;
    if (model_.plan_length != want)
        throw config_error("plan length " + std::to_string(model_.plan_length) +
                           " does not match horizon+1 = " + std::to_string(want));
    idx_ = PlanIndexer(model_.actions.size(), model_.plan_length);

    const bool needs_numeric =
        model_.payoff.kind != PayoffSpec::Kind::Table ||
        std::any_of(model_.constraints.begin(), model_.constraints.end(),
                    [](const PlanConstraint& c) {
                        return c.kind() == PlanConstraint::Kind::WindowSum ||
                               c.kind() == PlanConstraint::Kind::WaitingPeriod ||
                               c.kind() == PlanConstraint::Kind::PerPeriodCap;
                    });
    if (needs_numeric && !model_.actions.all_numeric())
        throw config_error("this payoff/constraint combination needs numeric action labels");
    if (model_.payoff.kind == PayoffSpec::Kind::AmericanPut) {
        for (int a = 0; a < model_.actions.size(); ++a)
            if (sgn(model_.actions.value(a)) < 0)
                throw config_error("american_put actions must be nonnegative quantities");
        if (model_.payoff.asset < 0 || model_.payoff.asset >= m.dim)
            throw config_error("payoff asset index out of range");
    }
    if (model_.payoff.kind == PayoffSpec::Kind::Swing &&
        (model_.payoff.asset < 0 || model_.payoff.asset >= m.dim))
        throw config_error("payoff asset index out of range");

    const long pairs = static_cast<long>(m.tree.leaf_count()) * idx_.count;
    if (pairs > budgets.max_paths)
        throw budget_exceeded("leaf x plan enumeration of " + std::to_string(pairs) +
                              " pairs exceeds budget " + std::to_string(budgets.max_paths));

    phi_.assign(pairs, XR::neg_inf());
    Plan prefix;
    prefix.reserve(model_.plan_length);
    for (int leaf = 0; leaf < m.tree.leaf_count(); ++leaf) {
        // DFS with constraint pruning; pruned subtrees stay -inf
        std::function<void(long)> walk = [&](long prefix_id) {
            const int len = static_cast<int>(prefix.size());
            if (len == model_.plan_length) {
                if (!constraints_feasible(prefix)) return;
                phi_[slot(leaf, prefix_id)] = raw_payoff(leaf, prefix);
                return;
            }
            for (int a = 0; a < model_.actions.size(); ++a) {
                prefix.push_back(a);
                bool viable = true;
                for (const auto& c : model_.constraints)
                    if (!c.prefix_viable(prefix, model_.plan_length, model_.actions,
                                         model_.encoding)) {
                        viable = false;
                        break;
                    }
                if (viable)
                    walk(idx_.extend(prefix_id, len, a));
                prefix.pop_back();
            }
        };
        walk(0);
    }
    for (const auto& v : phi_) {
        if (!v.finite()) continue;
        if (!upper_bound_ || v.val() > *upper_bound_) upper_bound_ = v.val();
    }
}

bool BoundPayoff::constraints_feasible(const Plan& plan) const {
    for (const auto& c : model_.constraints)
        if (!c.feasible(plan, model_.actions, model_.encoding)) return false;
    return true;
}

XR BoundPayoff::raw_payoff(int leaf_local, const Plan& plan) const {
    const auto& t = market_.tree;
    const int leaf_node = t.leaves()[leaf_local];
    const auto& p = model_.payoff;
    switch (p.kind) {
        case PayoffSpec::Kind::AmericanPut: {
            Rat total = 0;
            for (int idx : plan) total += model_.actions.value(idx);
            if (total > p.max_exercises) return XR::neg_inf();
            Rat pay = 0;
            for (std::size_t k = 0; k < plan.size(); ++k) {
                const Rat& q = model_.actions.value(plan[k]);
                if (sgn(q) == 0) continue;
                const Rat& s =
                    market_.asset[t.prefix_of(leaf_node, static_cast<int>(k))][p.asset];
                Rat intrinsic = p.strike - s;
                if (sgn(intrinsic) > 0) pay += q * intrinsic;
            }
            return XR(pay);
        }
        case PayoffSpec::Kind::Swing: {
            Rat pay = 0;
            for (std::size_t k = 0; k < plan.size(); ++k) {
                const Rat& q = model_.actions.value(plan[k]);
                if (sgn(q) == 0) continue;
                const Rat& s =
                    market_.asset[t.prefix_of(leaf_node, static_cast<int>(k))][p.asset];
                pay += q * (s - p.strike);
            }
            return XR(pay);
        }
        case PayoffSpec::Kind::Table: {
            const std::string key = t.key(leaf_node) + "|" + plan_key(plan, model_.actions);
            auto it = p.table.find(key);
            if (it != p.table.end()) return it->second;
            if (p.table_default) return *p.table_default;
            throw config_error("payoff table has no entry for '" + key +
                               "' and no default");
        }
    }
    return XR::neg_inf();
}

XR BoundPayoff::eval(int leaf_local, const Plan& plan) const {
    if (static_cast<int>(plan.size()) != model_.plan_length)
        throw config_error("plan length mismatch in eval");
    if (!constraints_feasible(plan)) return XR::neg_inf();
    return raw_payoff(leaf_local, plan);
}

std::vector<long> BoundPayoff::feasible_plans(int leaf_local) const {
    std::vector<long> out;
    for (long id = 0; id < idx_.count; ++id)
        if (feasible(leaf_local, id)) out.push_back(id);
    return out;
}

XR eval_payoff(const MarketModel& m, const SupportStructure& sup, const ActionModel& a,
               int leaf_local, const Plan& plan) {
    BoundPayoff bp(m, sup, a);
    return bp.eval(leaf_local, plan);
}

// ---------------------------------------------------------------------------
// policies

long count_policies(const ActionSpace& a, const ScenarioTree& t) {
    const long cap = std::numeric_limits<long>::max();
    long count = 1;
    for (const auto& n : t.nodes) {
        (void)n;
        if (count > cap / a.size()) return cap;
        count *= a.size();
    }
    return count;
}

std::vector<ActionPolicy> enumerate_policies(const ActionSpace& a, const ScenarioTree& t,
                                             long budget) {
    const long count = count_policies(a, t);
    if (count > budget)
        throw budget_exceeded("policy enumeration of " + std::to_string(count) +
                              " exceeds budget " + std::to_string(budget));
    std::vector<ActionPolicy> out;
    out.reserve(count);
    ActionPolicy cur(t.nodes.size(), 0);
    while (true) {
        out.push_back(cur);
        std::size_t i = 0;
        while (i < cur.size() && cur[i] == a.size() - 1) cur[i++] = 0;
        if (i == cur.size()) break;
        ++cur[i];
    }
    return out;
}

Plan policy_plan(const ActionPolicy& pol, const ScenarioTree& t, int leaf_node) {
    Plan p(t.horizon + 1);
    for (int k = 0; k <= t.horizon; ++k) p[k] = pol[t.prefix_of(leaf_node, k)];
    return p;
}

}  // namespace rshedge
