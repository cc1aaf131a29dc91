#include "rshedge/enlarged_space.hpp"

#include <algorithm>

namespace rshedge {

long EnlargedPathSet::feasible_count() const {
    long n = 0;
    for (char c : pair_feasible) n += (c != 0);
    return n;
}

EnlargedPathSet enumerate_enlarged(const BoundPayoff& bp) {
    const auto& t = bp.market().tree;
    EnlargedPathSet s;
    s.num_leaves = t.leaf_count();
    s.num_plans = bp.plans().count;
    s.leaf_reachable.assign(s.num_leaves, 0);
    for (int i = 0; i < s.num_leaves; ++i)
        s.leaf_reachable[i] = bp.support().node_reachable[t.leaves()[i]];
    s.pair_feasible.assign(s.count(), 0);
    for (int i = 0; i < s.num_leaves; ++i)
        for (long p = 0; p < s.num_plans; ++p)
            s.pair_feasible[static_cast<long>(i) * s.num_plans + p] = bp.feasible(i, p);
    return s;
}

Rat LiftedMeasure::total_mass() const {
    Rat m = 0;
    for (const auto& e : entries) m += e.weight;
    return m;
}

Rat LiftedMeasure::weight(int leaf_local, long plan_id) const {
    for (const auto& e : entries)
        if (e.leaf_local == leaf_local && e.plan_id == plan_id) return e.weight;
    return Rat(0);
}

std::vector<Rat> LiftedMeasure::omega_marginal(int num_leaves) const {
    std::vector<Rat> m(num_leaves, Rat(0));
    for (const auto& e : entries) m[e.leaf_local] += e.weight;
    return m;
}

void LiftedMeasure::sort_and_merge() {
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return a.leaf_local != b.leaf_local ? a.leaf_local < b.leaf_local
                                            : a.plan_id < b.plan_id;
    });
    std::vector<Entry> merged;
    for (auto& e : entries) {
        if (!merged.empty() && merged.back().leaf_local == e.leaf_local &&
            merged.back().plan_id == e.plan_id)
            merged.back().weight += e.weight;
        else
            merged.push_back(e);
    }
    entries.clear();
    for (auto& e : merged)
        if (sgn(e.weight) != 0) entries.push_back(std::move(e));
}

LiftedMeasure lift_measure(const std::vector<Rat>& leaf_dist,
                           const std::map<long, Rat>& plan_dist) {
    LiftedMeasure q;
    for (const auto& [plan, nu] : plan_dist) {
        if (sgn(nu) == 0) continue;
        for (int i = 0; i < static_cast<int>(leaf_dist.size()); ++i) {
            if (sgn(leaf_dist[i]) == 0) continue;
            q.entries.push_back({i, plan, leaf_dist[i] * nu});
        }
    }
    q.sort_and_merge();
    return q;
}

LiftedMeasure lift_mixture(
    const std::map<long, std::pair<Rat, std::vector<Rat>>>& nu_and_components) {
    LiftedMeasure q;
    for (const auto& [plan, part] : nu_and_components) {
        const auto& [nu, comp] = part;
        if (sgn(nu) == 0) continue;
        for (int i = 0; i < static_cast<int>(comp.size()); ++i)
            if (sgn(comp[i]) != 0) q.entries.push_back({i, plan, nu * comp[i]});
    }
    q.sort_and_merge();
    return q;
}

Disintegration disintegrate(const LiftedMeasure& q, int num_leaves) {
    Disintegration d;
    for (const auto& e : q.entries) d.nu[e.plan_id] += e.weight;
    for (const auto& e : q.entries) {
        auto& comp = d.components[e.plan_id];
        if (comp.empty()) comp.assign(num_leaves, Rat(0));
        comp[e.leaf_local] += e.weight / d.nu[e.plan_id];
    }
    return d;
}

EnlargedSystem enlarged_martingale_constraints(const BoundPayoff& bp,
                                               bool with_calibration,
                                               PlanSupport filter) {
    const auto& m = bp.market();
    const auto& t = m.tree;
    const auto& sup = bp.support();
    EnlargedSystem sys;
    sys.atoms = EnlargedAtoms(t, bp.plans());
    const long P = bp.plans().count;

    for (int i = 0; i < t.leaf_count(); ++i) {
        if (!sup.node_reachable[t.leaves()[i]]) continue;
        for (long p = 0; p < P; ++p) {
            if (filter == PlanSupport::FeasibleOnly && !bp.feasible(i, p)) continue;
            sys.var_index[{i, p}] = static_cast<int>(sys.vars.size());
            sys.vars.push_back({i, p});
            sys.lp.add_var("w_" + std::to_string(i) + "_" + std::to_string(p));
        }
    }

    auto& mass = sys.lp.add_row(lp::Rel::EQ, Rat(1), "mass");
    for (int v = 0; v < static_cast<int>(sys.vars.size()); ++v)
        mass.terms.push_back({v, Rat(1)});
    sys.mass_row = 0;

    // martingale rows: step k, conditioning atoms at level k-1 extended by
    // the time-(k-1) action
    const int leaf_base = t.leaves().front();
    for (int k = 1; k <= t.horizon; ++k) {
        const long pc = bp.plans().prefix_count(k);
        for (int local = 0; local < sys.atoms.nodes_at(k - 1); ++local) {
            const int node = sys.atoms.node_at(k - 1, local);
            if (!sup.node_reachable[node]) continue;
            // leaves under `node` form a contiguous block
            int first_leaf = node, last_leaf = node;
            while (!t.is_leaf(first_leaf)) {
                first_leaf = t.nodes[first_leaf].first_child;
                last_leaf = t.nodes[last_leaf].first_child + t.nodes[last_leaf].num_children - 1;
            }
            for (long pref = 0; pref < pc; ++pref) {
                // collect terms once per asset component
                std::vector<std::vector<lp::Term>> terms(m.dim);
                for (int leaf = first_leaf; leaf <= last_leaf; ++leaf) {
                    const int ll = leaf - leaf_base;
                    const int step_node = t.prefix_of(leaf, k);
                    auto dS = m.delta_S(step_node);
                    for (long p = pref; p < P; p += pc) {
                        const int v = sys.var_of(ll, p);
                        if (v < 0) continue;
                        for (int j = 0; j < m.dim; ++j)
                            if (sgn(dS[j]) != 0) terms[j].push_back({v, dS[j]});
                    }
                }
                bool any = false;
                for (int j = 0; j < m.dim; ++j) any = any || !terms[j].empty();
                if (!any) continue;
                for (int j = 0; j < m.dim; ++j) {
                    auto& row = sys.lp.add_row(
                        lp::Rel::EQ, Rat(0),
                        "mart" + std::to_string(k) + "[" +
                            sys.atoms.atom_key(node, pref, k, bp.model().actions) + "]" +
                            (m.dim > 1 ? "#" + std::to_string(j) : ""));
                    row.terms = std::move(terms[j]);
                }
            }
        }
    }

    if (with_calibration) {
        for (int l = 0; l < m.num_options(); ++l) {
            auto& row = sys.lp.add_row(lp::Rel::EQ, Rat(0), "calib" + std::to_string(l));
            for (int v = 0; v < static_cast<int>(sys.vars.size()); ++v) {
                const Rat& g = m.options[l][sys.vars[v].first];
                if (sgn(g) != 0) row.terms.push_back({v, g});
            }
            sys.calibration_rows.push_back(static_cast<int>(sys.lp.rows.size()) - 1);
        }
    }
    return sys;
}

bool measure_in_martingale_set(const BoundPayoff& bp, const LiftedMeasure& q,
                               bool with_calibration, std::string* why) {
    const auto& m = bp.market();
    const auto& t = m.tree;
    const auto& sup = bp.support();
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    Rat mass = 0;
    for (const auto& e : q.entries) {
        if (sgn(e.weight) < 0) return fail("negative weight");
        if (!sup.node_reachable[t.leaves()[e.leaf_local]])
            return fail("mass on unreachable leaf " + t.key(t.leaves()[e.leaf_local]));
        mass += e.weight;
    }
    if (mass != 1) return fail("total mass " + rat_to_string(mass));
    // conditional martingale identities, aggregated per atom
    for (int k = 1; k <= t.horizon; ++k) {
        std::map<std::pair<int, long>, std::vector<Rat>> sums;  // (node, prefix) -> dS sums
        for (const auto& e : q.entries) {
            const int leaf = t.leaves()[e.leaf_local];
            const int node = t.prefix_of(leaf, k - 1);
            const long pref = bp.plans().prefix_of(e.plan_id, k);
            auto& acc = sums[{node, pref}];
            if (acc.empty()) acc.assign(m.dim, Rat(0));
            auto dS = m.delta_S(t.prefix_of(leaf, k));
            for (int j = 0; j < m.dim; ++j) acc[j] += e.weight * dS[j];
        }
        for (const auto& [atom, acc] : sums)
            for (int j = 0; j < m.dim; ++j)
                if (sgn(acc[j]) != 0)
                    return fail("martingale violation at step " + std::to_string(k) +
                                " atom " + t.key(atom.first) + "|" +
                                plan_key(bp.plans().to_prefix(atom.second, k),
                                         bp.model().actions));
    }
    if (with_calibration) {
        for (int l = 0; l < m.num_options(); ++l) {
            Rat v = 0;
            for (const auto& e : q.entries) v += e.weight * m.options[l][e.leaf_local];
            if (sgn(v) != 0)
                return fail("calibration violation on option " + std::to_string(l));
        }
    }
    return true;
}

void dump_constraints_csv(std::ostream& os, const EnlargedSystem& sys,
                          const BoundPayoff& bp) {
    const auto& t = bp.market().tree;
    os << "row,path_key,coef\n";
    for (const auto& row : sys.lp.rows) {
        for (const auto& term : row.terms) {
            const auto& [leaf, plan] = sys.vars[term.var];
            os << row.name << "," << t.key(t.leaves()[leaf]) << "|"
               << plan_key(bp.plans().to_plan(plan), bp.model().actions) << ","
               << rat_to_string(term.coef) << "\n";
        }
    }
}

}  // namespace rshedge
