#include "rshedge/market_model.hpp"

#include <fstream>
#include <set>

namespace rshedge {

using nlohmann::json;

int ScenarioTree::leaf_local(int node) const {
    return node - by_depth[horizon].front();
}

int ScenarioTree::prefix_of(int node, int depth) const {
    int v = node;
    while (nodes[v].depth > depth) v = nodes[v].parent;
    return v;
}

std::string ScenarioTree::key(int v) const {
    if (v == root()) return "";
    std::vector<const std::string*> parts;
    int cur = v;
    while (cur != root()) {
        parts.push_back(&branch_labels[nodes[cur].depth - 1][nodes[cur].branch]);
        cur = nodes[cur].parent;
    }
    std::string out;
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
        if (!out.empty()) out += "/";
        out += **it;
    }
    return out;
}

int ScenarioTree::node_by_key(const std::string& k) const {
    auto it = key_index.find(k);
    return it == key_index.end() ? -1 : it->second;
}

ScenarioTree build_tree(int horizon, std::vector<std::vector<std::string>> branch_labels) {
    if (horizon < 1) throw config_error("horizon must be >= 1");
    if (static_cast<int>(branch_labels.size()) != horizon)
        throw config_error("branches must list one label set per period");
    for (int k = 0; k < horizon; ++k) {
        if (branch_labels[k].empty())
            throw config_error("empty branch label set at period " + std::to_string(k + 1));
        std::set<std::string> distinct(branch_labels[k].begin(), branch_labels[k].end());
        if (distinct.size() != branch_labels[k].size())
            throw config_error("duplicate branch label at period " + std::to_string(k + 1));
        for (const auto& l : branch_labels[k])
            if (l.empty() || l.find('/') != std::string::npos || l.find('|') != std::string::npos)
                throw config_error("branch label '" + l + "' must be nonempty without '/' or '|'");
    }
    ScenarioTree t;
    t.horizon = horizon;
    t.branch_labels = std::move(branch_labels);
    t.by_depth.resize(horizon + 1);
    t.nodes.push_back({});
    t.by_depth[0].push_back(0);
    for (int d = 0; d < horizon; ++d) {
        const int nb = static_cast<int>(t.branch_labels[d].size());
        for (int v : t.by_depth[d]) {
            t.nodes[v].first_child = static_cast<int>(t.nodes.size());
            t.nodes[v].num_children = nb;
            for (int b = 0; b < nb; ++b) {
                ScenarioTree::Node n;
                n.parent = v;
                n.depth = d + 1;
                n.branch = b;
                t.by_depth[d + 1].push_back(static_cast<int>(t.nodes.size()));
                t.nodes.push_back(n);
            }
        }
    }
    for (std::size_t v = 0; v < t.nodes.size(); ++v)
        t.key_index.emplace(t.key(static_cast<int>(v)), static_cast<int>(v));
    return t;
}

std::vector<Rat> MarketModel::delta_S(int child_node) const {
    const int p = tree.nodes[child_node].parent;
    std::vector<Rat> d(dim);
    for (int j = 0; j < dim; ++j) d[j] = asset[child_node][j] - asset[p][j];
    return d;
}

namespace {

Rat parse_field(const json& j, const std::string& where) {
    if (!j.is_string())
        throw config_error("expected rational string at " + where);
    try {
        return rat_from_string(j.get<std::string>());
    } catch (const parse_error& e) {
        throw config_error(std::string(e.what()) + " at " + where);
    }
}

const json& need(const json& doc, const char* field) {
    auto it = doc.find(field);
    if (it == doc.end()) throw config_error(std::string("missing field '") + field + "'");
    return *it;
}

}  // namespace

MarketModel load_market(const json& doc) {
    if (!doc.is_object()) throw config_error("market document must be an object");
    static const std::set<std::string> known = {"horizon", "branches", "assets",
                                               "priors", "static_options"};
    for (auto it = doc.begin(); it != doc.end(); ++it)
        if (!known.count(it.key()))
            throw config_error("unknown market field '" + it.key() + "'");

    const json& jh = need(doc, "horizon");
    if (!jh.is_number_integer()) throw config_error("horizon must be an integer");
    const int N = jh.get<int>();

    const json& jb = need(doc, "branches");
    if (!jb.is_array()) throw config_error("branches must be an array");
    std::vector<std::vector<std::string>> labels;
    for (const auto& step : jb) {
        std::vector<std::string> ls;
        for (const auto& l : step) {
            if (!l.is_string()) throw config_error("branch labels must be strings");
            ls.push_back(l.get<std::string>());
        }
        labels.push_back(std::move(ls));
    }

    MarketModel m;
    m.tree = build_tree(N, std::move(labels));
    const auto& t = m.tree;

    const json& ja = need(doc, "assets");
    const json& jd = need(ja, "dimension");
    if (!jd.is_number_integer() || jd.get<int>() < 1)
        throw config_error("assets.dimension must be a positive integer");
    m.dim = jd.get<int>();
    const json& jv = need(ja, "values");
    if (!jv.is_object()) throw config_error("assets.values must be an object");
    m.asset.assign(t.nodes.size(), {});
    for (auto it = jv.begin(); it != jv.end(); ++it) {
        int v = t.node_by_key(it.key());
        if (v < 0) throw config_error("assets.values: unknown node '" + it.key() + "'");
        if (!it.value().is_array() || static_cast<int>(it.value().size()) != m.dim)
            throw config_error("assets.values: expected " + std::to_string(m.dim) +
                               " components at node '" + it.key() + "'");
        std::vector<Rat> s;
        for (const auto& c : it.value())
            s.push_back(parse_field(c, "assets.values['" + it.key() + "']"));
        m.asset[v] = std::move(s);
    }
    for (std::size_t v = 0; v < t.nodes.size(); ++v)
        if (m.asset[v].empty())
            throw config_error("missing asset values at node '" + t.key(static_cast<int>(v)) + "'");

    const json& jp = need(doc, "priors");
    if (!jp.is_object()) throw config_error("priors must be an object");
    m.priors.assign(t.nodes.size(), {});
    for (auto it = jp.begin(); it != jp.end(); ++it) {
        int v = t.node_by_key(it.key());
        if (v < 0) throw config_error("priors: unknown node '" + it.key() + "'");
        if (t.is_leaf(v)) throw config_error("priors given at leaf '" + it.key() + "'");
        if (!it.value().is_array() || it.value().empty())
            throw config_error("priors at node '" + it.key() + "' must be a nonempty list");
        const int nb = t.num_branches(v);
        for (const auto& kern : it.value()) {
            if (!kern.is_array() || static_cast<int>(kern.size()) != nb)
                throw config_error("kernel arity mismatch at node '" + it.key() + "'");
            std::vector<Rat> q;
            Rat total = 0;
            for (const auto& c : kern) {
                Rat w = parse_field(c, "priors['" + it.key() + "']");
                if (sgn(w) < 0)
                    throw config_error("negative kernel weight at node '" + it.key() + "'");
                total += w;
                q.push_back(std::move(w));
            }
            if (total != 1)
                throw config_error("kernel does not sum to 1 at node '" + it.key() + "'");
            m.priors[v].push_back(std::move(q));
        }
    }
    for (int d = 0; d < N; ++d)
        for (int v : t.by_depth[d])
            if (m.priors[v].empty())
                throw config_error("missing priors at node '" + t.key(v) + "'");

    const json& jo = need(doc, "static_options");
    if (!jo.is_array()) throw config_error("static_options must be an array");
    for (const auto& opt : jo) {
        if (!opt.is_object() || opt.size() != 1)
            throw config_error("each static option must be {\"payoff\": {...}}");
        const json& pay = need(opt, "payoff");
        if (!pay.is_object()) throw config_error("static option payoff must be an object");
        std::vector<Rat> g(t.leaf_count());
        std::vector<char> seen(t.leaf_count(), 0);
        for (auto it = pay.begin(); it != pay.end(); ++it) {
            int v = t.node_by_key(it.key());
            if (v < 0 || !t.is_leaf(v))
                throw config_error("static option payoff: unknown leaf '" + it.key() + "'");
            g[t.leaf_local(v)] = parse_field(it.value(), "static option payoff['" + it.key() + "']");
            seen[t.leaf_local(v)] = 1;
        }
        for (int i = 0; i < t.leaf_count(); ++i)
            if (!seen[i])
                throw config_error("static option payoff missing at leaf '" +
                                   t.key(t.leaves()[i]) + "'");
        m.options.push_back(std::move(g));
    }
    return m;
}

MarketModel load_market_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open market file '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw config_error("market file '" + path + "': " + e.what());
    }
    return load_market(doc);
}

nlohmann::json serialize_market(const MarketModel& m) {
    const auto& t = m.tree;
    json doc;
    doc["horizon"] = t.horizon;
    doc["branches"] = t.branch_labels;
    json values = json::object();
    for (std::size_t v = 0; v < t.nodes.size(); ++v) {
        json arr = json::array();
        for (const auto& c : m.asset[v]) arr.push_back(rat_to_string(c));
        values[t.key(static_cast<int>(v))] = std::move(arr);
    }
    doc["assets"] = {{"dimension", m.dim}, {"values", std::move(values)}};
    json priors = json::object();
    for (int d = 0; d < t.horizon; ++d)
        for (int v : t.by_depth[d]) {
            json kernels = json::array();
            for (const auto& k : m.priors[v]) {
                json kern = json::array();
                for (const auto& w : k) kern.push_back(rat_to_string(w));
                kernels.push_back(std::move(kern));
            }
            priors[t.key(v)] = std::move(kernels);
        }
    doc["priors"] = std::move(priors);
    json opts = json::array();
    for (const auto& g : m.options) {
        json pay = json::object();
        for (int i = 0; i < t.leaf_count(); ++i)
            pay[t.key(t.leaves()[i])] = rat_to_string(g[i]);
        opts.push_back(json{{"payoff", std::move(pay)}});
    }
    doc["static_options"] = std::move(opts);
    return doc;
}

SupportStructure support_structure(const MarketModel& m) {
    const auto& t = m.tree;
    SupportStructure s;
    s.node_reachable.assign(t.nodes.size(), 0);
    s.succ_support.assign(t.nodes.size(), {});
    s.node_reachable[t.root()] = 1;
    for (int d = 0; d < t.horizon; ++d) {
        for (int v : t.by_depth[d]) {
            const int nb = t.num_branches(v);
            std::vector<char> in_support(nb, 0);
            for (const auto& kern : m.priors[v])
                for (int b = 0; b < nb; ++b)
                    if (sgn(kern[b]) > 0) in_support[b] = 1;
            for (int b = 0; b < nb; ++b)
                if (in_support[b]) s.succ_support[v].push_back(b);
            if (!s.node_reachable[v]) continue;
            for (int b : s.succ_support[v]) s.node_reachable[t.child(v, b)] = 1;
        }
    }
    for (int leaf : t.leaves())
        if (s.node_reachable[leaf]) s.reachable_leaves.push_back(leaf);
    return s;
}

OneStepPolytope one_step_martingale_polytope(const MarketModel& m,
                                             const SupportStructure& sup, int node) {
    const auto& t = m.tree;
    if (t.is_leaf(node)) throw config_error("one-step polytope requested at a leaf");
    if (!sup.node_reachable[node])
        throw config_error("one-step polytope requested at unreachable node '" +
                           t.key(node) + "'");
    OneStepPolytope p;
    p.node = node;
    p.support = sup.succ_support[node];
    auto& lp = p.system;
    for (int b : p.support)
        lp.add_var("q_" + t.branch_labels[t.nodes[node].depth][b]);
    auto& mass = lp.add_row(lp::Rel::EQ, Rat(1), "mass");
    for (std::size_t i = 0; i < p.support.size(); ++i)
        mass.terms.push_back({static_cast<int>(i), Rat(1)});
    for (int j = 0; j < m.dim; ++j) {
        auto& row = lp.add_row(lp::Rel::EQ, Rat(0), "mart_" + std::to_string(j));
        for (std::size_t i = 0; i < p.support.size(); ++i) {
            Rat ds = m.delta_S(t.child(node, p.support[i]))[j];
            if (sgn(ds) != 0) row.terms.push_back({static_cast<int>(i), std::move(ds)});
        }
    }
    auto out = lp::solve_rational(lp);
    p.empty = (out.status == lp::Status::Infeasible);
    if (!p.empty) p.witness = out.primal;
    return p;
}

OriginalSystem original_martingale_constraints(const MarketModel& m,
                                               const SupportStructure& sup,
                                               bool with_calibration,
                                               const std::vector<char>* leaf_filter) {
    const auto& t = m.tree;
    OriginalSystem sys;
    sys.var_of_leaf.assign(t.leaf_count(), -1);
    for (int leaf : sup.reachable_leaves) {
        const int ll = t.leaf_local(leaf);
        if (leaf_filter && !(*leaf_filter)[ll]) continue;
        sys.var_of_leaf[ll] = static_cast<int>(sys.leaves_local.size());
        sys.leaves_local.push_back(ll);
        sys.lp.add_var("u_" + t.key(leaf));
    }
    auto& mass = sys.lp.add_row(lp::Rel::EQ, Rat(1), "mass");
    for (int v = 0; v < static_cast<int>(sys.leaves_local.size()); ++v)
        mass.terms.push_back({v, Rat(1)});
    sys.mass_row = 0;
    for (int d = 0; d < t.horizon; ++d) {
        for (int node : t.by_depth[d]) {
            if (!sup.node_reachable[node]) continue;
            std::vector<std::vector<lp::Term>> terms(m.dim);
            for (int v = 0; v < static_cast<int>(sys.leaves_local.size()); ++v) {
                const int leaf = t.leaves()[sys.leaves_local[v]];
                if (t.prefix_of(leaf, d) != node) continue;
                auto dS = m.delta_S(t.prefix_of(leaf, d + 1));
                for (int j = 0; j < m.dim; ++j)
                    if (sgn(dS[j]) != 0) terms[j].push_back({v, dS[j]});
            }
            for (int j = 0; j < m.dim; ++j) {
                bool any = false;
                for (const auto& tt : terms) any = any || !tt.empty();
                if (!any) break;
                auto& row = sys.lp.add_row(
                    lp::Rel::EQ, Rat(0),
                    "mart[" + t.key(node) + "]" +
                        (m.dim > 1 ? "#" + std::to_string(j) : ""));
                row.terms = std::move(terms[j]);
            }
        }
    }
    if (with_calibration) {
        for (int l = 0; l < m.num_options(); ++l) {
            auto& row = sys.lp.add_row(lp::Rel::EQ, Rat(0), "calib" + std::to_string(l));
            for (int v = 0; v < static_cast<int>(sys.leaves_local.size()); ++v) {
                const Rat& g = m.options[l][sys.leaves_local[v]];
                if (sgn(g) != 0) row.terms.push_back({v, g});
            }
            sys.calibration_rows.push_back(static_cast<int>(sys.lp.rows.size()) - 1);
        }
    }
    return sys;
}

}  // namespace rshedge
