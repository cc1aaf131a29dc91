#include "rshedge/dp_engine.hpp"

#include <algorithm>

namespace rshedge {

XR terminal_op(const BoundPayoff& bp, int leaf_local, long prefix_id) {
    const int N = bp.market().tree.horizon;
    XR best = XR::neg_inf();
    for (int a = 0; a < bp.model().actions.size(); ++a) {
        const long plan = bp.plans().extend(prefix_id, N, a);
        best = XR::max(best, bp.phi(leaf_local, plan));
    }
    return best;
}

namespace {

// LP maximum of sum q_b v_b over the one-step martingale polytope with
// support restricted to finite-valued branches. Returns the optimal q via
// `q_out` (indexed like `branches`) when nonempty.
XR restricted_step_max(const MarketModel& m, const SupportStructure& sup, int node,
                       const std::vector<XR>& value_per_branch,
                       std::vector<Rat>* q_out = nullptr) {
    const auto& t = m.tree;
    std::vector<int> live;
    for (int b : sup.succ_support[node])
        if (value_per_branch[b].finite()) live.push_back(b);
    if (q_out) q_out->assign(value_per_branch.size(), Rat(0));
    if (live.empty()) return XR::neg_inf();
    lp::LinearProgram lp;
    lp.sense = lp::Sense::Max;
    for (std::size_t i = 0; i < live.size(); ++i) {
        lp.add_var("q" + std::to_string(live[i]));
        const Rat& v = value_per_branch[live[i]].val();
        if (sgn(v) != 0) lp.set_objective(static_cast<int>(i), v);
    }
    auto& mass = lp.add_row(lp::Rel::EQ, Rat(1), "mass");
    for (std::size_t i = 0; i < live.size(); ++i)
        mass.terms.push_back({static_cast<int>(i), Rat(1)});
    for (int j = 0; j < m.dim; ++j) {
        auto& row = lp.add_row(lp::Rel::EQ, Rat(0), "mart");
        for (std::size_t i = 0; i < live.size(); ++i) {
            Rat ds = m.delta_S(t.child(node, live[i]))[j];
            if (sgn(ds) != 0) row.terms.push_back({static_cast<int>(i), std::move(ds)});
        }
    }
    auto out = lp::solve_rational(lp);
    if (out.status == lp::Status::Infeasible) return XR::neg_inf();
    if (out.status != lp::Status::Optimal)
        throw std::logic_error("one-step LP cannot be unbounded");
    if (q_out)
        for (std::size_t i = 0; i < live.size(); ++i) (*q_out)[live[i]] = out.primal[i];
    return out.value;
}

}  // namespace

XR one_step_action_value(const MarketModel& m, const SupportStructure& sup, int node,
                         const std::vector<XR>& value_per_branch) {
    return restricted_step_max(m, sup, node, value_per_branch);
}

XR one_step_value(const MarketModel& m, const SupportStructure& sup, int node,
                  const std::vector<std::vector<XR>>& next_by_action) {
    XR best = XR::neg_inf();
    for (const auto& vals : next_by_action)
        best = XR::max(best, one_step_action_value(m, sup, node, vals));
    return best;
}

BackwardResult backward_induction(const BoundPayoff& bp) {
    const auto& m = bp.market();
    const auto& t = m.tree;
    const auto& sup = bp.support();
    const int N = t.horizon;
    const int A = bp.model().actions.size();

    BackwardResult r;
    auto& tab = r.table;
    tab.atoms = EnlargedAtoms(t, bp.plans());
    tab.minus.resize(N + 1);
    tab.plus.resize(N);
    for (int k = 0; k <= N; ++k)
        tab.minus[k].assign(tab.atoms.minus_count(k), XR::neg_inf());
    for (int k = 0; k < N; ++k)
        tab.plus[k].assign(tab.atoms.plus_count(k), XR::neg_inf());

    // terminal level
    for (int i = 0; i < t.leaf_count(); ++i) {
        const int leaf = t.leaves()[i];
        if (!sup.node_reachable[leaf]) continue;
        const long pc = bp.plans().prefix_count(N);
        for (long pref = 0; pref < pc; ++pref)
            tab.minus[N][tab.atoms.minus_id(leaf, pref)] = terminal_op(bp, i, pref);
    }

    // backward sweep
    for (int k = N - 1; k >= 0; --k) {
        const long pc = bp.plans().prefix_count(k);
        for (int local = 0; local < tab.atoms.nodes_at(k); ++local) {
            const int node = tab.atoms.node_at(k, local);
            if (!sup.node_reachable[node]) continue;
            const int nb = t.num_branches(node);
            for (long pref = 0; pref < pc; ++pref) {
                XR best = XR::neg_inf();
                for (int a = 0; a < A; ++a) {
                    const long next_pref = bp.plans().extend(pref, k, a);
                    std::vector<XR> vals(nb, XR::neg_inf());
                    for (int b : sup.succ_support[node])
                        vals[b] =
                            tab.minus[k + 1][tab.atoms.minus_id(t.child(node, b), next_pref)];
                    XR w = one_step_action_value(m, sup, node, vals);
                    tab.plus[k][tab.atoms.plus_id(node, next_pref)] = w;
                    best = XR::max(best, w);
                }
                tab.minus[k][tab.atoms.minus_id(node, pref)] = best;
            }
        }
    }
    tab.root_value = tab.minus[0][0];
    r.value = tab.root_value;
    return r;
}

ExtractedPolicy extract_policy(const BoundPayoff& bp, const ValueTable& table) {
    const auto& t = bp.market().tree;
    const auto& sup = bp.support();
    const int N = t.horizon;
    const int A = bp.model().actions.size();
    ExtractedPolicy pol;
    pol.choice.resize(N + 1);
    for (int k = 0; k <= N; ++k)
        pol.choice[k].assign(table.atoms.minus_count(k), -1);

    for (int k = 0; k < N; ++k) {
        const long pc = bp.plans().prefix_count(k);
        for (int local = 0; local < table.atoms.nodes_at(k); ++local) {
            const int node = table.atoms.node_at(k, local);
            if (!sup.node_reachable[node]) continue;
            for (long pref = 0; pref < pc; ++pref) {
                const long id = table.atoms.minus_id(node, pref);
                const XR& target = table.minus[k][id];
                if (!target.finite()) continue;
                for (int a = 0; a < A; ++a) {
                    const long plus = table.atoms.plus_id(node, bp.plans().extend(pref, k, a));
                    if (table.plus[k][plus] == target) {
                        pol.choice[k][id] = a;
                        break;
                    }
                }
            }
        }
    }
    // terminal action
    for (int i = 0; i < t.leaf_count(); ++i) {
        const int leaf = t.leaves()[i];
        if (!sup.node_reachable[leaf]) continue;
        const long pc = bp.plans().prefix_count(N);
        for (long pref = 0; pref < pc; ++pref) {
            const long id = table.atoms.minus_id(leaf, pref);
            const XR& target = table.minus[N][id];
            if (!target.finite()) continue;
            for (int a = 0; a < A; ++a) {
                if (bp.phi(i, bp.plans().extend(pref, N, a)) == target) {
                    pol.choice[N][id] = a;
                    break;
                }
            }
        }
    }
    return pol;
}

Plan ExtractedPolicy::plan_for_leaf(const BoundPayoff& bp, int leaf_local) const {
    const auto& t = bp.market().tree;
    EnlargedAtoms atoms(t, bp.plans());
    const int leaf = t.leaves()[leaf_local];
    Plan plan;
    long pref = 0;
    for (int k = 0; k <= t.horizon; ++k) {
        const int node = t.prefix_of(leaf, k);
        int a = choice[k][atoms.minus_id(node, pref)];
        if (a < 0) a = 0;  // unreachable or fully infeasible atom
        plan.push_back(a);
        pref = bp.plans().extend(pref, k, a);
    }
    return plan;
}

ActionPolicy ExtractedPolicy::to_action_policy(const BoundPayoff& bp) const {
    const auto& t = bp.market().tree;
    EnlargedAtoms atoms(t, bp.plans());
    ActionPolicy pol(t.nodes.size(), 0);
    // walk the tree forward, carrying the action prefix chosen so far
    std::vector<long> pref_of_node(t.nodes.size(), 0);
    for (int k = 0; k <= t.horizon; ++k) {
        for (int node : t.by_depth[k]) {
            const long pref = pref_of_node[node];
            int a = choice[k].empty() ? 0 : choice[k][atoms.minus_id(node, pref)];
            if (a < 0) a = 0;
            pol[node] = a;
            if (k < t.horizon) {
                const long next = bp.plans().extend(pref, k, a);
                for (int b = 0; b < t.num_branches(node); ++b)
                    pref_of_node[t.child(node, b)] = next;
            }
        }
    }
    return pol;
}

ExtractedHedge extract_hedge(const BoundPayoff& bp, const ValueTable& table) {
    const auto& m = bp.market();
    const auto& t = m.tree;
    const auto& sup = bp.support();
    const int N = t.horizon;
    if (!table.root_value.finite())
        throw hedge_infeasible("root value is not finite; nothing to hedge");

    ExtractedHedge h;
    h.x = table.root_value.val();
    h.y.resize(N);
    for (int k = 0; k < N; ++k)
        h.y[k].assign(table.atoms.plus_count(k), std::vector<Rat>(m.dim, Rat(0)));

    for (int k = 0; k < N; ++k) {
        const long pc = bp.plans().prefix_count(k + 1);
        for (int local = 0; local < table.atoms.nodes_at(k); ++local) {
            const int node = table.atoms.node_at(k, local);
            if (!sup.node_reachable[node]) continue;
            const long minus_pc = bp.plans().prefix_count(k);
            for (long pref = 0; pref < pc; ++pref) {
                const long plus_id = table.atoms.plus_id(node, pref);
                const long minus_id = table.atoms.minus_id(node, pref % minus_pc);
                const XR& vk = table.minus[k][minus_id];
                // rows over reachable successors with finite next value
                std::vector<std::pair<int, Rat>> rows;  // (branch, rhs)
                bool finite_succ = false;
                for (int b : sup.succ_support[node]) {
                    const XR& vn =
                        table.minus[k + 1][table.atoms.minus_id(t.child(node, b), pref)];
                    if (!vn.finite()) continue;
                    finite_succ = true;
                    if (!vk.finite())
                        throw hedge_infeasible(
                            "value -inf at atom '" +
                            table.atoms.atom_key(node, pref % minus_pc, k,
                                                 bp.model().actions) +
                            "' with a finite successor");
                    rows.push_back({b, vn.val() - vk.val()});
                }
                if (!finite_succ) continue;  // nothing to dominate along this action

                lp::LinearProgram lp;
                lp.sense = lp::Sense::Min;
                for (int j = 0; j < m.dim; ++j) {
                    lp.add_var("yp" + std::to_string(j));
                    lp.add_var("yn" + std::to_string(j));
                    lp.set_objective(2 * j, Rat(1));
                    lp.set_objective(2 * j + 1, Rat(1));
                }
                for (const auto& [b, rhs] : rows) {
                    auto& row = lp.add_row(lp::Rel::GE, rhs);
                    auto dS = m.delta_S(t.child(node, b));
                    for (int j = 0; j < m.dim; ++j) {
                        if (sgn(dS[j]) == 0) continue;
                        row.terms.push_back({2 * j, dS[j]});
                        row.terms.push_back({2 * j + 1, -dS[j]});
                    }
                }
                auto out = lp::solve_rational(lp);
                if (out.status != lp::Status::Optimal)
                    throw hedge_infeasible(
                        "one-step superhedge infeasible at atom '" +
                        table.atoms.atom_key(node, pref, k + 1, bp.model().actions) +
                        "' (no-arbitrage violation)");
                for (int j = 0; j < m.dim; ++j)
                    h.y[k][plus_id][j] = out.primal[2 * j] - out.primal[2 * j + 1];
            }
        }
    }
    return h;
}

bool check_hedge_domination(const BoundPayoff& bp, const ExtractedHedge& h,
                            std::string* why) {
    const auto& m = bp.market();
    const auto& t = m.tree;
    const auto& sup = bp.support();
    EnlargedAtoms atoms(t, bp.plans());
    for (int i = 0; i < t.leaf_count(); ++i) {
        const int leaf = t.leaves()[i];
        if (!sup.node_reachable[leaf]) continue;
        for (long p = 0; p < bp.plans().count; ++p) {
            const XR phi = bp.phi(i, p);
            if (!phi.finite()) continue;
            Rat wealth = h.x;
            for (int k = 0; k < t.horizon; ++k) {
                const int node = t.prefix_of(leaf, k);
                const long plus = atoms.plus_id(node, bp.plans().prefix_of(p, k + 1));
                const auto& y = h.y[k][plus];
                auto dS = m.delta_S(t.prefix_of(leaf, k + 1));
                for (int j = 0; j < m.dim; ++j) wealth += y[j] * dS[j];
            }
            if (wealth < phi.val()) {
                if (why)
                    *why = "domination fails at " + t.key(leaf) + "|" +
                           plan_key(bp.plans().to_plan(p), bp.model().actions) + ": " +
                           rat_to_string(wealth) + " < " + rat_to_string(phi.val());
                return false;
            }
        }
    }
    return true;
}

LiftedMeasure optimal_lifted_measure(const BoundPayoff& bp, const ValueTable& table) {
    const auto& m = bp.market();
    const auto& t = m.tree;
    const auto& sup = bp.support();
    const int N = t.horizon;
    if (!table.root_value.finite())
        throw std::logic_error("optimal measure undefined for -inf value");

    LiftedMeasure q;
    // forward pass: (node, prefix) -> mass
    std::map<std::pair<int, long>, Rat> front;
    front[{t.root(), 0}] = 1;
    for (int k = 0; k < N; ++k) {
        std::map<std::pair<int, long>, Rat> next;
        for (const auto& [key, mass] : front) {
            const auto& [node, pref] = key;
            const long minus_id = table.atoms.minus_id(node, pref);
            const XR& target = table.minus[k][minus_id];
            if (!target.finite())
                throw std::logic_error("optimal measure hit a -inf atom");
            int best_a = -1;
            for (int a = 0; a < bp.model().actions.size(); ++a) {
                if (table.plus[k][table.atoms.plus_id(node, bp.plans().extend(pref, k, a))] ==
                    target) {
                    best_a = a;
                    break;
                }
            }
            if (best_a < 0) throw std::logic_error("no action attains the atom value");
            const long next_pref = bp.plans().extend(pref, k, best_a);
            std::vector<XR> vals(t.num_branches(node), XR::neg_inf());
            for (int b : sup.succ_support[node])
                vals[b] = table.minus[k + 1][table.atoms.minus_id(t.child(node, b), next_pref)];
            std::vector<Rat> qstep;
            restricted_step_max(m, sup, node, vals, &qstep);
            for (int b = 0; b < t.num_branches(node); ++b)
                if (sgn(qstep[b]) > 0)
                    next[{t.child(node, b), next_pref}] += mass * qstep[b];
        }
        front = std::move(next);
    }
    // terminal action
    for (const auto& [key, mass] : front) {
        const auto& [leaf, pref] = key;
        const long id = table.atoms.minus_id(leaf, pref);
        const XR& target = table.minus[N][id];
        const int i = t.leaf_local(leaf);
        int best_a = -1;
        for (int a = 0; a < bp.model().actions.size(); ++a)
            if (bp.phi(i, bp.plans().extend(pref, N, a)) == target) {
                best_a = a;
                break;
            }
        if (best_a < 0) throw std::logic_error("no terminal action attains the atom value");
        q.entries.push_back({i, bp.plans().extend(pref, N, best_a), mass});
    }
    q.sort_and_merge();
    return q;
}

void dump_values_csv(std::ostream& os, const BoundPayoff& bp, const ValueTable& table) {
    const auto& t = bp.market().tree;
    os << "level,atom_key,value\n";
    for (int k = 0; k <= t.horizon; ++k) {
        const long pc = bp.plans().prefix_count(k);
        for (int local = 0; local < table.atoms.nodes_at(k); ++local) {
            const int node = table.atoms.node_at(k, local);
            if (!bp.support().node_reachable[node]) continue;
            for (long pref = 0; pref < pc; ++pref)
                os << k << ","
                   << table.atoms.atom_key(node, pref, k, bp.model().actions) << ","
                   << table.minus[k][table.atoms.minus_id(node, pref)].str() << "\n";
        }
    }
}

}  // namespace rshedge
